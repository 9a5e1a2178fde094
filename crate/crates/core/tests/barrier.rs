#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use thinlab_core::barrier::*;
use thinlab_core::{
    make_profile, BVPSpec, BoundaryProfile, CoefficientSet, ProfileDescriptor, Smooth1d,
};

fn corner(s: f64) -> BoundaryProfile {
    make_profile(&ProfileDescriptor::corner(s)).unwrap()
}

/// `r^-alpha cos(k theta)` written out independently of the crate.
fn y_formula(k: f64, alpha: f64, x: f64, y: f64) -> f64 {
    x.hypot(y).powf(-alpha) * (k * y.atan2(x)).cos()
}

const D1: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];
const D2: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];

fn ly_oracle(c: &CoefficientSet, k: f64, alpha: f64, p: [f64; 2]) -> f64 {
    let h = 1e-3 * p[0].hypot(p[1]);
    let off = |i: usize| (i as f64 - 3.0) * h;
    let (mut ux, mut uy, mut uxx, mut uyy, mut uxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for a in 0..7 {
        let fx = y_formula(k, alpha, p[0] + off(a), p[1]);
        let fy = y_formula(k, alpha, p[0], p[1] + off(a));
        ux += D1[a] * fx;
        uxx += D2[a] * fx;
        uy += D1[a] * fy;
        uyy += D2[a] * fy;
        for b in 0..7 {
            uxy += D1[a] * D1[b] * y_formula(k, alpha, p[0] + off(a), p[1] + off(b));
        }
    }
    let [a, b, cc, d, e] = c.at(p[0], p[1]);
    (a * uxx + b * uxy + cc * uyy) / (h * h) + (d * ux + e * uy) / h
}

#[test]
fn closed_form_ly_against_difference_oracle() {
    let sets = [
        CoefficientSet::constant(1.5, 0.2, 1.2, 0.5, 0.5, 1.0, 2.0),
        CoefficientSet::constant(1.0, -0.6, 2.0, -1.0, 0.3, 1.0, 2.0),
        CoefficientSet::variable(),
    ];
    let params = BarrierParams::new(&corner(0.05), 0.5, 1.0, 2.0, 0.5).unwrap();
    let samples = wedge_samples(&params, 50, 20);
    assert_eq!(samples.len(), 1000);
    for c in &sets {
        for alpha in [params.alpha, -params.alpha] {
            for &p in &samples {
                let want = ly_oracle(c, params.k, alpha, p);
                let got = eval_ly_closed_form(c, &params, alpha, p).unwrap();
                assert!(
                    (got - want).abs() <= 1e-6 * want.abs(),
                    "{p:?}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn y_has_zero_normal_derivative_on_the_axis() {
    let params = BarrierParams::new(&corner(0.05), 0.5, 1.0, 2.0, 0.5).unwrap();
    for i in 1..=50 {
        let x = i as f64 / 50.0;
        let h = 1e-6 * x;
        let d = eval_y(&params, params.alpha, [x, h]).unwrap()
            - eval_y(&params, params.alpha, [x, -h]).unwrap();
        assert!(d.abs() < 1e-14);
        let d = eval_h(&params, [x, h]).unwrap() - eval_h(&params, [x, -h]).unwrap();
        assert!(d.abs() < 1e-14 * eval_h(&params, [x, 0.0]).unwrap().abs().max(1e-300));
    }
}

#[test]
fn y_margin_fails_on_a_fat_wedge() {
    let c = CoefficientSet::constant(1.0, 0.0, 1.0, 0.0, 2.0, 1.0, 2.0);
    let params = BarrierParams::new(&corner(0.5), 0.5, 1.0, 2.0, 0.5).unwrap();
    let rep = verify_y_supersolution(&c, &params, &wedge_samples(&params, 128, 32)).unwrap();
    assert!(!rep.pass);
}

#[test]
fn y_margin_tolerates_drift_bounded_only_in_r() {
    // D = c/r is unbounded, but r |D| = c stays below Lambda
    let c = CoefficientSet::inverse_radius_drift(0.5).with_bounds(1.0, 2.0);
    let params = BarrierParams::new(&corner(0.02), 0.5, 1.0, 2.0, 0.5).unwrap();
    let rep = verify_y_supersolution(&c, &params, &wedge_samples(&params, 256, 64)).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!((rep.sup_r_de - 0.5).abs() < 1e-12);
}

#[test]
fn margins_uniform_over_a_shrinking_family() {
    let c = CoefficientSet::constant(1.5, 0.2, 1.2, 0.5, 0.5, 1.0, 2.0);
    let mut mins = Vec::new();
    for s in [0.08, 0.02, 0.005] {
        let prof = corner(s / 1000.0);
        let params = BarrierParams::new(&prof, 0.3, 1.0, 2.0, 0.5).unwrap();
        let y = verify_y_supersolution(&c, &params, &wedge_samples(&params, 128, 32)).unwrap();
        let h = verify_h_bounds(&c, &params, &prof).unwrap();
        assert!(y.pass && h.pass, "{y:?} {h:?}");
        mins.push(y.min_margin.min(h.min_margin()));
    }
    let (lo, hi) = mins
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
    assert!(hi / lo <= 2.0, "{mins:?}");
}

#[test]
fn comparison_of_a_constant_solution_is_trivial() {
    let prof = make_profile(&ProfileDescriptor::sine(0.02)).unwrap();
    let spec = BVPSpec::new(CoefficientSet::laplace(), prof, Smooth1d::constant(3.0));
    let u = thinlab_core::solve_bvp(&spec, 64, 8).unwrap();
    let rep = comparison_check(&u, &spec, 0.3, None).unwrap();
    assert_eq!(rep.corrector.n, 0.0);
    // the window scale f0^-2.5 amplifies roundoff; |v| itself is at ulp level
    assert!(rep.window_constant * rep.f0.powf(2.5) < 1e-13, "{rep:?}");
}

#[test]
fn corrector_is_tangent_to_the_boundary_to_higher_order() {
    let prof = make_profile(&ProfileDescriptor::sine(0.02)).unwrap();
    let spec = BVPSpec::new(
        CoefficientSet::laplace(),
        prof.clone(),
        Smooth1d::cosine(1.0, 1.0),
    );
    let p = build_corrector(&spec, 0.4).unwrap();
    assert!(p.eval(0.4, prof.eval(0.4)).abs() < 1e-15);
    // |P(x, f(x))| / |x - x0|^(2+gamma) stays bounded as x -> x0
    let q = |d: f64| p.eval(0.4 + d, prof.eval(0.4 + d)).abs() / d.abs().powf(2.5);
    let near: f64 = [1e-3, -1e-3, 1e-4, -1e-4]
        .iter()
        .map(|&d| q(d))
        .fold(0.0, f64::max);
    assert!(near <= 1.5 * q(1e-2).max(q(-1e-2)), "{near}");
    assert!(p.boundary_taylor_constant(&prof, 0.5, 2048).is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn barriers_are_even(r in 0.01f64..2.0, t in -1.0f64..1.0, x0 in 0.05f64..0.65) {
        let prof = corner(0.05);
        let params = BarrierParams::new(&prof, x0, 1.0, 2.0, 0.5).unwrap();
        let th = t * params.slope;
        let (p, q) = ([r * th.cos(), r * th.sin()], [r * th.cos(), -r * th.sin()]);
        let (a, b) = (eval_h(&params, p).unwrap(), eval_h(&params, q).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * a.abs());
        let (a, b) = (eval_y(&params, -params.alpha, p).unwrap(), eval_y(&params, -params.alpha, q).unwrap());
        prop_assert!((a - b).abs() <= 1e-14 * a.abs());
    }
}
