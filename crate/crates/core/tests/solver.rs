use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinlab_core::solver::local_schauder_check;
use thinlab_core::*;

fn sine(s: f64) -> BoundaryProfile {
    make_profile(&ProfileDescriptor::sine(s)).unwrap()
}

fn max_error(u: &DiscreteSolution, exact: &AnalyticField) -> f64 {
    let g = u.grid();
    let mut e = 0.0f64;
    for i in 0..=g.nx {
        for j in 0..=g.ny {
            let (x, y) = g.point(i, j);
            e = e.max((u.value(i, j) - exact.value(x, y)).abs());
        }
    }
    e
}

#[test]
fn manufactured_harmonic_converges_at_second_order() {
    let exact = AnalyticField::harmonic_cosh_cos();
    let spec = BVPSpec::manufactured(CoefficientSet::laplace(), sine(0.05), &exact);
    let e: Vec<f64> = [64, 128]
        .iter()
        .map(|&n| max_error(&solve_bvp(&spec, n, n).unwrap(), &exact))
        .collect();
    let ratio = e[0] / e[1];
    assert!((3.4..=4.6).contains(&ratio), "{e:?}");
}

#[test]
fn variable_coefficients_converge() {
    let exact = AnalyticField::harmonic_cosh_cos();
    let c = CoefficientSet::variable().with_g(Smooth1d::polynomial(vec![0.1, 0.2]));
    let spec = BVPSpec::manufactured(c, sine(0.05), &exact);
    let e: Vec<f64> = [32, 64]
        .iter()
        .map(|&n| max_error(&solve_bvp(&spec, n, n / 2).unwrap(), &exact))
        .collect();
    let order = (e[0] / e[1]).log2();
    assert!(order >= 1.8, "{e:?}");
}

fn random_phi(seed: u64) -> Smooth1d {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..6)
        .map(|k| rng.gen_range(-1.0..1.0) / (1.0 + k as f64))
        .collect();
    let s: Vec<f64> = (0..6)
        .map(|k| rng.gen_range(-1.0..1.0) / (1.0 + k as f64))
        .collect();
    Smooth1d::trig_series(c, s)
}

#[test]
fn discrete_maximum_principle() {
    let p = sine(0.05);
    for seed in 0..20 {
        let phi = random_phi(seed);
        let spec = BVPSpec::new(CoefficientSet::laplace(), p.clone(), phi.clone());
        let u = solve_bvp(&spec, 64, 16).unwrap();
        let (mut lo, mut hi, mut sup) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for i in 0..=4096 {
            let v = phi.value(i as f64 / 4096.0);
            lo = lo.min(v);
            hi = hi.max(v);
            sup = sup.max(v.abs());
        }
        let tol = 1e-6 * sup;
        let h = u.header();
        assert!(
            h.min >= lo - tol && h.max <= hi + tol,
            "seed {seed}: [{}, {}] vs [{lo}, {hi}]",
            h.min,
            h.max
        );
    }
}

#[test]
fn constant_data_gives_unit_schauder_ratio() {
    let spec = BVPSpec::new(
        CoefficientSet::laplace(),
        sine(0.02),
        Smooth1d::constant(1.0),
    );
    let u = solve_bvp(&spec, 64, 8).unwrap();
    let r = local_schauder_check(&u, &spec);
    // second differences carry roundoff scaled by 1/(f deta)^2 in thin columns
    assert!((r.ratio_global - 1.0).abs() < 1e-6, "{r:?}");
    assert!(r.ratio_left <= r.ratio_global + 1e-12);
}

#[test]
fn residual_meets_tolerance() {
    let spec = BVPSpec::new(
        CoefficientSet::variable(),
        sine(0.04),
        Smooth1d::cosine(1.0, 1.0),
    );
    let u = solve_bvp(&spec, 96, 24).unwrap();
    assert!(u.residual <= 1e-10, "{}", u.residual);
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let spec = BVPSpec::new(CoefficientSet::variable(), sine(0.04), random_phi(7));
    let a = solve_bvp(&spec, 64, 16).unwrap();
    let b = solve_bvp(&spec, 64, 16).unwrap();
    assert_eq!(a.values(), b.values());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solution_map_is_linear(s1 in 0u64..500, s2 in 500u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let p = sine(0.05);
        let c = CoefficientSet::variable();
        let (f1, f2) = (random_phi(s1), random_phi(s2));
        let psi = Smooth1d::polynomial(vec![0.3, -0.2]);
        let u1 = solve_bvp(&BVPSpec::new(c.clone(), p.clone(), f1.clone()).with_psi(psi.clone()), 32, 8).unwrap();
        let u2 = solve_bvp(&BVPSpec::new(c.clone(), p.clone(), f2.clone()), 32, 8).unwrap();
        let combo = BVPSpec::new(c, p, f1.scaled(a).add_scaled(b, &f2)).with_psi(psi.scaled(a));
        let u = solve_bvp(&combo, 32, 8).unwrap();
        for (k, v) in u.values().iter().enumerate() {
            let want = a * u1.values()[k] + b * u2.values()[k];
            prop_assert!((v - want).abs() <= 1e-8 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn maximum_principle_on_random_data(seed in 0u64..10_000, sigma in 0.005f64..0.08) {
        let phi = random_phi(seed);
        let spec = BVPSpec::new(CoefficientSet::laplace(), sine(sigma), phi.clone());
        let u = solve_bvp(&spec, 64, 8).unwrap();
        let vals: Vec<f64> = (0..=4096).map(|i| phi.value(i as f64 / 4096.0)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-6 * vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = u.header();
        prop_assert!(h.min >= lo - tol && h.max <= hi + tol);
    }
}
