use nalgebra::{Matrix6, Vector6};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinlab_core::asymptotic::*;
use thinlab_core::{
    make_profile, AnalyticField, BVPSpec, CoefficientSet, Field2d, ProfileDescriptor, Smooth1d,
};

struct Preset {
    c: CoefficientSet,
    phi: Smooth1d,
}

fn random_preset(seed: u64) -> Preset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    let mut c = CoefficientSet::constant(1.0, 0.0, 1.0, 0.0, 0.0, 0.5, 4.0);
    c.a = Field2d::polynomial(vec![(r(1.0, 2.0), 0, 0), (r(-0.3, 0.3), 1, 0)]);
    c.b = Field2d::polynomial(vec![(r(-0.5, 0.5), 0, 0), (r(-0.2, 0.2), 1, 0)]);
    c.c = Field2d::polynomial(vec![(r(1.0, 2.0), 0, 0), (r(-0.3, 0.3), 2, 0)]);
    c.d = Field2d::polynomial(vec![(r(-1.0, 1.0), 0, 0), (r(-1.0, 1.0), 1, 0)]);
    c.e = Field2d::polynomial(vec![(r(-1.0, 1.0), 0, 0)]);
    c.g = Smooth1d::polynomial(vec![r(-0.5, 0.5), r(-0.5, 0.5), r(-0.5, 0.5)]);
    let phi = Smooth1d::trig_series(
        (0..4).map(|_| r(-1.0, 1.0)).collect(),
        (0..4).map(|_| r(-1.0, 1.0)).collect(),
    );
    Preset { c, phi }
}

/// Solves the six relations on `(u, ux, uy, uxx, uxy, uyy)` as a dense system.
fn brute_force(c: &CoefficientSet, phi: &Smooth1d, x: f64) -> [f64; 6] {
    let [a, b, cc, d, e] = c.at(x, 0.0);
    let [g, g1, _] = c.g.jet(x);
    let [p0, p1, p2] = phi.jet(x);
    #[rustfmt::skip]
    let m = Matrix6::new(
        1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
        0.0, g, 1.0, 0.0, 0.0, 0.0,
        0.0, g1, 0.0, g, 1.0, 0.0,
        0.0, d, e, a, b, cc,
    );
    let rhs = Vector6::new(p0, p1, p2, 0.0, 0.0, 0.0);
    let s = m.lu().solve(&rhs).expect("nonsingular");
    [s[0], s[1], s[2], s[3], s[4], s[5]]
}

#[test]
fn closed_form_matches_dense_solve() {
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    for seed in 0..10 {
        let p = random_preset(seed);
        let st = solve_asymptotic(&p.c, &p.c.g, &p.phi, &grid).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            let want = brute_force(&p.c, &p.phi, x);
            for (a, b) in st.node(i).iter().zip(want) {
                assert!(
                    (a - b).abs() <= 1e-12 * b.abs().max(1.0),
                    "seed {seed} x {x}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn identities_hold_on_random_presets() {
    let grid: Vec<f64> = (0..=128).map(|i| i as f64 / 128.0).collect();
    for seed in 0..10 {
        let p = random_preset(seed);
        let st = solve_asymptotic(&p.c, &p.c.g, &p.phi, &grid).unwrap();
        let [l0, big_l0, big_l] = st.identity_residuals(&p.c, &p.c.g);
        assert!(
            l0 <= 1e-12 && big_l0 <= 1e-12 && big_l <= 1e-10,
            "{l0} {big_l0} {big_l}"
        );
    }
}

#[test]
fn tangential_consistency_is_second_order() {
    let p = random_preset(3);
    let err = |n: usize| {
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let st = solve_asymptotic(&p.c, &p.c.g, &p.phi, &grid).unwrap();
        let h = 1.0 / n as f64;
        (1..n)
            .map(|i| {
                let d0 = (st.ustar[i + 1] - st.ustar[i - 1]) / (2.0 * h) - st.ux[i];
                let d1 = (st.ux[i + 1] - st.ux[i - 1]) / (2.0 * h) - st.uxx[i];
                d0.abs().max(d1.abs())
            })
            .fold(0.0, f64::max)
    };
    let ratio = err(64) / err(128);
    assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
}

#[test]
fn derivative_list_residuals_converge() {
    let prof = make_profile(&ProfileDescriptor::sine(0.05)).unwrap();
    let spec = BVPSpec::manufactured(
        CoefficientSet::laplace(),
        prof,
        &AnalyticField::harmonic_cosh_cos(),
    );
    let r: Vec<f64> = [64, 128]
        .into_iter()
        .map(|n| {
            derivative_list_residuals(&thinlab_core::solve_bvp(&spec, n, n).unwrap(), &spec).max()
        })
        .collect();
    assert!(r[0] / r[1] >= 1.8, "{r:?}");
}

#[test]
fn order_zero_deviation_of_the_harmonic_solution() {
    // u = cosh(pi y) cos(pi x) with trace phi = cosh(pi f) cos(pi x): the
    // deviation is bounded by sup |cosh(pi y) cos(pi x) - phi(x)|
    let sigma = 0.05;
    let prof = make_profile(&ProfileDescriptor::sine(sigma)).unwrap();
    let spec = BVPSpec::manufactured(
        CoefficientSet::laplace(),
        prof.clone(),
        &AnalyticField::harmonic_cosh_cos(),
    );
    let n = 128;
    let u = thinlab_core::solve_bvp(&spec, n, 32).unwrap();
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let st = solve_asymptotic(&spec.coefficients, &spec.coefficients.g, &spec.phi, &grid).unwrap();
    let dev = deviation(&u, &st).unwrap();
    let pi = std::f64::consts::PI;
    let mut bound = 0.0f64;
    for i in 0..=4096 {
        let x = i as f64 / 4096.0;
        let f = prof.eval(x);
        for j in 0..=64 {
            let y = f * j as f64 / 64.0;
            bound = bound
                .max(((pi * y).cosh() * (pi * x).cos() - (pi * f).cosh() * (pi * x).cos()).abs());
        }
    }
    assert!(!dev.resampled);
    assert!(dev.sup[0] <= bound + 1e-5, "{} vs {bound}", dev.sup[0]);
    assert!(dev.sup[0] >= 0.5 * bound, "{} vs {bound}", dev.sup[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_in_phi(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let p = random_preset(seed);
        let q = random_preset(seed + 1);
        let grid: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let combo = p.phi.scaled(a).add_scaled(b, &q.phi);
        let s1 = solve_asymptotic(&p.c, &p.c.g, &p.phi, &grid).unwrap();
        let s2 = solve_asymptotic(&p.c, &p.c.g, &q.phi, &grid).unwrap();
        let s = solve_asymptotic(&p.c, &p.c.g, &combo, &grid).unwrap();
        for i in 0..grid.len() {
            let (n, n1, n2) = (s.node(i), s1.node(i), s2.node(i));
            for k in 0..6 {
                let want = a * n1[k] + b * n2[k];
                prop_assert!((n[k] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn scaling_phi_scales_every_array(seed in 0u64..1000, a in -4.0f64..4.0) {
        let p = random_preset(seed);
        let grid: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
        let s = solve_asymptotic(&p.c, &p.c.g, &p.phi, &grid).unwrap();
        let t = solve_asymptotic(&p.c, &p.c.g, &p.phi.scaled(a), &grid).unwrap();
        for i in 0..grid.len() {
            for (u, v) in s.node(i).iter().zip(t.node(i)) {
                prop_assert!((a * u - v).abs() <= 1e-13 * (1.0 + v.abs()));
            }
        }
    }
}
