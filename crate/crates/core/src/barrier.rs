//! Corner barrier `Y = r^-alpha cos(k theta)`, the two-sided barrier `H`, the
//! quadratic corrector `P_x0`, and margin scans verifying their inequalities.
//!
//! Polar coordinates are centred at the left corner `(0, 0)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::func::{Jet2, TwiceDifferentiable};
use crate::geometry::BoundaryProfile;
use crate::solver::{BVPSpec, DiscreteSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub k: f64,
    /// the large constant `M = 100 Lambda / lambda`
    pub big_m: f64,
    /// `|alpha| = k / M`
    pub alpha: f64,
    pub r0: f64,
    pub x0: f64,
    /// `f(x0)`
    pub f0: f64,
    /// `f'(0)`, the half opening of the wedge
    pub slope: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub big_lambda: f64,
    /// weight order; `None` for the plain barrier
    pub m: Option<f64>,
}

impl BarrierParams {
    pub fn new(
        profile: &BoundaryProfile,
        x0: f64,
        lambda: f64,
        big_lambda: f64,
        gamma: f64,
    ) -> Result<Self> {
        let slope = profile.eval_d1(0.0);
        if !(slope > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "barrier needs f'(0) > 0, got {slope}"
            )));
        }
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(Error::InvalidArgument(format!("x0 = {x0} outside (0, 1)")));
        }
        if !(lambda > 0.0 && big_lambda >= lambda) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < lambda <= Lambda, got {lambda}, {big_lambda}"
            )));
        }
        let k = std::f64::consts::PI / (8.0 * slope);
        let big_m = 100.0 * big_lambda / lambda;
        let f0 = profile.eval(x0);
        Ok(Self {
            k,
            big_m,
            alpha: k / big_m,
            r0: (1.0 + slope * slope).sqrt() * f0 / slope,
            x0,
            f0,
            slope,
            gamma,
            lambda,
            big_lambda,
            m: None,
        })
    }

    /// Weighted barrier of order `m`; needs `k / (4M) >= m + 2 + gamma`.
    pub fn weighted(mut self, m: f64) -> Result<Self> {
        let need = m + 2.0 + self.gamma;
        if self.k / (4.0 * self.big_m) < need {
            return Err(Error::InvalidArgument(format!(
                "weighted barrier needs k/(4M) >= m + 2 + gamma = {need}, got {}",
                self.k / (4.0 * self.big_m)
            )));
        }
        self.m = Some(m);
        Ok(self)
    }

    /// `x0^-(m+2+gamma)` for the weighted barrier, 1 otherwise.
    pub fn prefactor(&self) -> f64 {
        self.m
            .map_or(1.0, |m| self.x0.powf(-(m + 2.0 + self.gamma)))
    }

    fn log_prefactor(&self) -> f64 {
        self.m
            .map_or(0.0, |m| -(m + 2.0 + self.gamma) * self.x0.ln())
    }
}

fn polar(p: [f64; 2]) -> (f64, f64) {
    (p[0].hypot(p[1]), p[1].atan2(p[0]))
}

fn wedge_check(params: &BarrierParams, p: [f64; 2]) -> Result<(f64, f64)> {
    let (r, theta) = polar(p);
    if !(r > 0.0) || theta.abs() > params.slope * (1.0 + 1e-12) {
        return Err(Error::OutOfWedge {
            x: p[0],
            y: p[1],
            theta,
            half_angle: params.slope,
        });
    }
    Ok((r, theta))
}

/// `Y = r^-alpha cos(k theta)` for a signed exponent `alpha`.
pub fn eval_y(params: &BarrierParams, alpha: f64, p: [f64; 2]) -> Result<f64> {
    let (r, theta) = wedge_check(params, p)?;
    Ok(r.powf(-alpha) * (params.k * theta).cos())
}

/// `r^(alpha+2) L Y` from the polar expansion of `L`.
fn bracket(c: &CoefficientSet, k: f64, alpha: f64, r: f64, theta: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    let (sk, ck) = (k * theta).sin_cos();
    let [a, b, cc, d, e] = c.at(r * co, r * s);
    let (s2, c2) = (2.0 * theta).sin_cos();
    let tang = a * s * s - b * s * co + cc * co * co;
    alpha * (alpha + 1.0) * (a * co * co + b * s * co + cc * s * s) * ck
        + alpha * k * ((cc - a) * s2 + b * c2) * sk
        - k * k * tang * ck
        - alpha * (tang + d * r * co + e * r * s) * ck
        - k * ((a - cc) * s2 - b * c2 - d * r * s + e * r * co) * sk
}

/// Closed-form `L Y` for a signed exponent `alpha`.
pub fn eval_ly_closed_form(
    c: &CoefficientSet,
    params: &BarrierParams,
    alpha: f64,
    p: [f64; 2],
) -> Result<f64> {
    let (r, theta) = wedge_check(params, p)?;
    Ok(r.powf(-alpha - 2.0) * bracket(c, params.k, alpha, r, theta))
}

/// `L Y` from central second differences of `Y` with step `h`.
pub fn eval_ly_numeric(
    c: &CoefficientSet,
    params: &BarrierParams,
    alpha: f64,
    p: [f64; 2],
    h: f64,
) -> f64 {
    let y = |x: f64, yy: f64| {
        let (r, t) = polar([x, yy]);
        r.powf(-alpha) * (params.k * t).cos()
    };
    let [x, yv] = p;
    let u = y(x, yv);
    let ux = (y(x + h, yv) - y(x - h, yv)) / (2.0 * h);
    let uy = (y(x, yv + h) - y(x, yv - h)) / (2.0 * h);
    let uxx = (y(x + h, yv) - 2.0 * u + y(x - h, yv)) / (h * h);
    let uyy = (y(x, yv + h) - 2.0 * u + y(x, yv - h)) / (h * h);
    let uxy =
        (y(x + h, yv + h) - y(x + h, yv - h) - y(x - h, yv + h) + y(x - h, yv - h)) / (4.0 * h * h);
    let [a, b, cc, d, e] = c.at(x, yv);
    a * uxx + b * uxy + cc * uyy + d * ux + e * uy
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCase {
    pub case: String,
    pub min_margin: f64,
    pub argmin_point: [f64; 2],
    pub samples: usize,
}

impl MarginCase {
    fn empty(case: &str) -> Self {
        Self {
            case: case.into(),
            min_margin: f64::INFINITY,
            argmin_point: [f64::NAN; 2],
            samples: 0,
        }
    }

    fn absorb(&mut self, v: f64, p: [f64; 2]) {
        self.samples += 1;
        // NaN sticks and counts as a failure
        if self.min_margin.is_nan() {
            return;
        }
        if v.is_nan()
            || v < self.min_margin
            || (v == self.min_margin && lex_lt(p, self.argmin_point))
        {
            self.min_margin = v;
            self.argmin_point = p;
        }
    }

    fn merge(mut self, o: MarginCase) -> Self {
        let n = self.samples + o.samples;
        if o.samples > 0 {
            self.samples = 0;
            self.absorb(o.min_margin, o.argmin_point);
        }
        self.samples = n;
        self
    }

    pub fn positive(&self) -> bool {
        self.min_margin > 0.0
    }
}

fn lex_lt(a: [f64; 2], b: [f64; 2]) -> bool {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).is_lt()
}

/// Geometric-in-`r`, uniform-in-`theta` samples of the full wedge.
pub fn wedge_samples(params: &BarrierParams, nr: usize, ntheta: usize) -> Vec<[f64; 2]> {
    let (lo, hi) = ((params.r0 / 8.0).ln(), (8.0 * params.r0).ln());
    let mut out = Vec::with_capacity(nr * ntheta);
    for i in 0..nr {
        let r = (lo + (hi - lo) * i as f64 / (nr - 1) as f64).exp();
        for j in 0..ntheta {
            let t = params.slope * (-1.0 + 2.0 * j as f64 / (ntheta - 1) as f64);
            out.push([r * t.cos(), r * t.sin()]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YMarginReport {
    /// one entry per sign of `alpha`, margin `(-L Y) r^(alpha+2) / (lambda k^2 / 8)`
    pub per_sign: Vec<MarginCase>,
    pub min_margin: f64,
    /// `sup r (|D| + |E|)` over the samples
    pub sup_r_de: f64,
    pub params: BarrierParams,
    pub pass: bool,
}

/// Scans `-L Y >= (lambda k^2 / 8) r^(-alpha-2)` for both signs of `alpha`.
pub fn verify_y_supersolution(
    c: &CoefficientSet,
    params: &BarrierParams,
    samples: &[[f64; 2]],
) -> Result<YMarginReport> {
    let scale = params.lambda * params.k * params.k / 8.0;
    let mut per_sign = Vec::new();
    for (name, alpha) in [("alpha+", params.alpha), ("alpha-", -params.alpha)] {
        let case = samples
            .par_iter()
            .map(|&p| -> Result<MarginCase> {
                let (r, t) = wedge_check(params, p)?;
                let mut m = MarginCase::empty(name);
                m.absorb(-bracket(c, params.k, alpha, r, t) / scale, p);
                Ok(m)
            })
            .try_reduce(|| MarginCase::empty(name), |a, b| Ok(a.merge(b)))?;
        per_sign.push(case);
    }
    let sup_r_de = samples
        .iter()
        .map(|p| {
            let [_, _, _, d, e] = c.at(p[0], p[1]);
            p[0].hypot(p[1]) * (d.abs() + e.abs())
        })
        .fold(0.0, f64::max);
    let min_margin = per_sign
        .iter()
        .map(|m| m.min_margin)
        .fold(f64::INFINITY, f64::min);
    Ok(YMarginReport {
        per_sign,
        min_margin,
        sup_r_de,
        params: *params,
        pass: min_margin >= 1.0,
    })
}

/// `H = W f(x0)^(2+gamma) ((r/r0)^|alpha| + (r/r0)^-|alpha|) cos(k theta)`.
pub fn eval_h(params: &BarrierParams, p: [f64; 2]) -> Result<f64> {
    let (r, theta) = wedge_check(params, p)?;
    let q = r / params.r0;
    Ok(params.prefactor()
        * params.f0.powf(2.0 + params.gamma)
        * (q.powf(params.alpha) + q.powf(-params.alpha))
        * (params.k * theta).cos())
}

/// `ln H`; `None` where `cos(k theta) <= 0`.
pub fn log_h(params: &BarrierParams, p: [f64; 2]) -> Result<Option<f64>> {
    let (r, theta) = wedge_check(params, p)?;
    let ck = (params.k * theta).cos();
    if ck <= 0.0 {
        return Ok(None);
    }
    let lq = (r / params.r0).ln();
    Ok(Some(
        params.log_prefactor()
            + (2.0 + params.gamma) * params.f0.ln()
            + logaddexp(params.alpha * lq, -params.alpha * lq)
            + ck.ln(),
    ))
}

fn logaddexp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Closed-form `L H` (may overflow far from `r0` when `|alpha|` is large).
pub fn eval_lh(c: &CoefficientSet, params: &BarrierParams, p: [f64; 2]) -> Result<f64> {
    let (r, theta) = wedge_check(params, p)?;
    let q = r / params.r0;
    let a = params.alpha;
    Ok(params.prefactor()
        * params.f0.powf(2.0 + params.gamma)
        * r.powi(-2)
        * (q.powf(a) * bracket(c, params.k, -a, r, theta)
            + q.powf(-a) * bracket(c, params.k, a, r, theta)))
}

/// `(sign, ln |-L H|)`, stable for any `|alpha|`.
pub fn signed_log_neg_lh(
    c: &CoefficientSet,
    params: &BarrierParams,
    p: [f64; 2],
) -> Result<(f64, f64)> {
    let (r, theta) = wedge_check(params, p)?;
    let lq = (r / params.r0).ln();
    let a = params.alpha;
    let base = params.log_prefactor() + (2.0 + params.gamma) * params.f0.ln() - 2.0 * r.ln();
    let t1 = -bracket(c, params.k, -a, r, theta);
    let t2 = -bracket(c, params.k, a, r, theta);
    let (s, l) = signed_add(
        (t1.signum(), a * lq + t1.abs().ln()),
        (t2.signum(), -a * lq + t2.abs().ln()),
    );
    Ok((s, base + l))
}

fn signed_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    if x.0 == 0.0 || x.1 == f64::NEG_INFINITY {
        return y;
    }
    if y.0 == 0.0 || y.1 == f64::NEG_INFINITY {
        return x;
    }
    if x.0 == y.0 {
        return (x.0, logaddexp(x.1, y.1));
    }
    let (big, small) = if x.1 >= y.1 { (x, y) } else { (y, x) };
    let d = (small.1 - big.1).exp();
    if d >= 1.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    (big.0, big.1 + (-d).ln_1p())
}

fn signed_exp(v: (f64, f64)) -> f64 {
    if v.0 == 0.0 {
        0.0
    } else {
        v.0 * v.1.exp()
    }
}

/// Samples of the closed domain resolving the scale `f(x0)` around `x0`.
pub fn omega_samples(profile: &BoundaryProfile, x0: f64, ny: usize) -> Vec<[f64; 2]> {
    let f0 = profile.eval(x0);
    let mut xs: Vec<f64> = (1..512).map(|i| i as f64 / 512.0).collect();
    xs.extend((0..=160).map(|i| x0 + f0 * (-4.0 + i as f64 / 20.0)));
    for k in 0..40 {
        let d = f0 * 4.0 * 1.25f64.powi(k);
        xs.push(x0 + d);
        xs.push(x0 - d);
    }
    xs.extend((1..=40).map(|k| x0 * 0.5f64.powi(k)));
    xs.retain(|&x| x > 0.0 && x < 1.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out = Vec::with_capacity(xs.len() * (ny + 1));
    for x in xs {
        let f = profile.eval(x);
        for j in 0..=ny {
            out.push([x, f * j as f64 / ny as f64]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HBoundsReport {
    /// lower bounds of `-L H / |p - p0|^gamma`, split by case
    pub interior: Vec<MarginCase>,
    /// `H / |x - x0|^(2+gamma)` on the upper boundary
    pub boundary: MarginCase,
    /// `sup H / f(x0)^(2+gamma)` over the window `|x - x0| < f(x0)`
    pub window_sup: f64,
    pub window_argmax: [f64; 2],
    pub params: BarrierParams,
    pub pass: bool,
}

impl HBoundsReport {
    pub fn min_margin(&self) -> f64 {
        self.interior
            .iter()
            .map(|c| c.min_margin)
            .fold(self.boundary.min_margin, f64::min)
    }
}

/// Scans the lower bounds on `-L H` and on `H|_{upper boundary}` and the
/// window bound on `H`. Weighted barriers use the weight `x0^(m+2+gamma)`
/// for `x >= x0/2` and `x^(m+2+gamma)` below.
pub fn verify_h_bounds(
    c: &CoefficientSet,
    params: &BarrierParams,
    profile: &BoundaryProfile,
) -> Result<HBoundsReport> {
    let (x0, f0, g) = (params.x0, params.f0, params.gamma);
    let p0 = [x0, f0];
    let samples = omega_samples(profile, x0, 16);
    let names = ["near", "right", "left", "weighted_far_left"];
    let weight_exp = params.m.map(|m| m + 2.0 + g);
    let interior = samples
        .par_iter()
        .map(|&p| -> Result<Vec<MarginCase>> {
            let mut cases: Vec<MarginCase> = names.iter().map(|n| MarginCase::empty(n)).collect();
            let dist = (p[0] - p0[0]).hypot(p[1] - p0[1]);
            if dist == 0.0 {
                return Ok(cases);
            }
            let (s, l) = signed_log_neg_lh(c, params, p)?;
            let mut lw = l - g * dist.ln();
            let idx = if weight_exp.is_some() && p[0] <= x0 / 2.0 {
                3
            } else if (p[0] - x0).abs() <= f0 {
                0
            } else if p[0] - x0 >= f0 {
                1
            } else {
                2
            };
            if let Some(w) = weight_exp {
                lw += w * if idx == 3 { p[0].ln() } else { x0.ln() };
            }
            cases[idx].absorb(signed_exp((s, lw)), p);
            Ok(cases)
        })
        .try_reduce(
            || names.iter().map(|n| MarginCase::empty(n)).collect(),
            |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()),
        )?;
    let interior: Vec<MarginCase> = interior.into_iter().filter(|c| c.samples > 0).collect();

    let mut boundary = MarginCase::empty("upper_boundary");
    let mut window_sup = 0.0f64;
    let mut window_argmax = p0;
    let lw = weight_exp.map_or(0.0, |w| w * x0.ln());
    let mut xs: Vec<f64> = samples.iter().map(|p| p[0]).collect();
    xs.dedup();
    for &x in &xs {
        let p = [x, profile.eval(x)];
        let Some(lh) = log_h(params, p)? else {
            boundary.absorb(-1.0, p);
            continue;
        };
        let d = (x - x0).abs();
        if d > 0.0 {
            boundary.absorb((lh + lw - (2.0 + g) * d.ln()).exp(), p);
        }
    }
    for &p in &samples {
        if (p[0] - x0).abs() < f0 {
            if let Some(lh) = log_h(params, p)? {
                let v = (lh + lw - (2.0 + g) * f0.ln()).exp();
                if v > window_sup {
                    window_sup = v;
                    window_argmax = p;
                }
            }
        }
    }
    let pass =
        interior.iter().all(MarginCase::positive) && boundary.positive() && window_sup.is_finite();
    Ok(HBoundsReport {
        interior,
        boundary,
        window_sup,
        window_argmax,
        params: *params,
        pass,
    })
}

/// `P = N ((f0^2 - y^2) + (f^2)'(x0)(x - x0) + (f^2)''(x0)(x - x0)^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorPolynomial {
    pub x0: f64,
    pub n: f64,
    pub f0: f64,
    /// `(f^2)'(x0)`
    pub d1: f64,
    /// `(f^2)''(x0)`
    pub d2: f64,
    /// `-L phi (x0, f(x0))`
    pub minus_l_phi: f64,
    /// extremes of `L p` over the sampled domain
    pub lp_range: [f64; 2],
}

impl CorrectorPolynomial {
    /// Value and derivatives of the unscaled `p`.
    pub fn p_jet(&self, x: f64, y: f64) -> Jet2 {
        let dx = x - self.x0;
        Jet2 {
            u: self.f0 * self.f0 - y * y + self.d1 * dx + 0.5 * self.d2 * dx * dx,
            ux: self.d1 + self.d2 * dx,
            uy: -2.0 * y,
            uxx: self.d2,
            uxy: 0.0,
            uyy: -2.0,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.jet(x, y).u
    }

    /// `L p` at `(x, y)`.
    pub fn lp(&self, c: &CoefficientSet, x: f64, y: f64) -> f64 {
        let j = self.p_jet(x, y);
        let [a, b, cc, d, e] = c.at(x, y);
        a * j.uxx + b * j.uxy + cc * j.uyy + d * j.ux + e * j.uy
    }

    /// `sup |P(x, f(x))| / |x - x0|^(2+gamma)` on `n` boundary samples.
    pub fn boundary_taylor_constant(&self, profile: &BoundaryProfile, gamma: f64, n: usize) -> f64 {
        (0..=n)
            .map(|i| i as f64 / n as f64)
            .filter(|&x| x != self.x0)
            .map(|x| self.eval(x, profile.eval(x)).abs() / (x - self.x0).abs().powf(2.0 + gamma))
            .fold(0.0, f64::max)
    }
}

impl TwiceDifferentiable for CorrectorPolynomial {
    fn jet(&self, x: f64, y: f64) -> Jet2 {
        self.p_jet(x, y).scaled(self.n)
    }
}

/// Builds `P_x0` with `N = -L phi / L p` at `(x0, f(x0))` and checks
/// `L p in [-10 Lambda, -lambda]` over the domain.
pub fn build_corrector(spec: &BVPSpec, x0: f64) -> Result<CorrectorPolynomial> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::InvalidArgument(format!("x0 = {x0} outside (0, 1)")));
    }
    let c = &spec.coefficients;
    let [f, fp, fpp] = spec.profile.jet(x0);
    let mut poly = CorrectorPolynomial {
        x0,
        n: 0.0,
        f0: f,
        d1: 2.0 * f * fp,
        d2: 2.0 * (fp * fp + f * fpp),
        minus_l_phi: 0.0,
        lp_range: [f64::INFINITY, f64::NEG_INFINITY],
    };
    let (lo, hi) = (-10.0 * c.big_lambda, -c.lambda);
    for p in crate::transforms::domain_samples(&spec.profile, 256, 8) {
        let v = poly.lp(c, p[0], p[1]);
        poly.lp_range = [poly.lp_range[0].min(v), poly.lp_range[1].max(v)];
        if !(v >= lo && v <= hi) {
            return Err(Error::RangeViolation {
                x: p[0],
                y: p[1],
                value: v,
                lo,
                hi,
            });
        }
    }
    let [_, phi1, phi2] = spec.phi.jet(x0);
    let [a, _, _, d, _] = c.at(x0, f);
    let l_phi = a * phi2 + d * phi1;
    poly.minus_l_phi = -l_phi;
    poly.n = -l_phi / poly.lp(c, x0, f);
    Ok(poly)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub x0: f64,
    pub f0: f64,
    pub m: Option<f64>,
    /// `sup_{window} |v - P| / f(x0)^(2+gamma)`, times `x0^(m+2+gamma)` when weighted
    pub window_constant: f64,
    pub window_argmax: [f64; 2],
    pub window_nodes: usize,
    /// `sup |v - P| / H` over nodes inside the barrier wedge
    pub barrier_ratio: Option<f64>,
    pub corrector: CorrectorPolynomial,
}

/// Empirical constants of the comparison `|v - P_x0| <= C H` for a computed
/// solution, `v = u - phi`.
pub fn comparison_check(
    u: &DiscreteSolution,
    spec: &BVPSpec,
    x0: f64,
    m: Option<f64>,
) -> Result<ComparisonReport> {
    let corrector = build_corrector(spec, x0)?;
    let c = &spec.coefficients;
    let gamma = c.gamma;
    let g = u.grid();
    let f0 = corrector.f0;
    let weight = m.map_or(1.0, |m| x0.powf(m + 2.0 + gamma));
    let params = BarrierParams::new(&spec.profile, x0, c.lambda, c.big_lambda, gamma)
        .and_then(|p| match m {
            Some(m) => p.weighted(m),
            None => Ok(p),
        })
        .ok();
    let mut rep = ComparisonReport {
        x0,
        f0,
        m,
        window_constant: 0.0,
        window_argmax: [x0, f0],
        window_nodes: 0,
        barrier_ratio: params.map(|_| 0.0),
        corrector,
    };
    let scale = f0.powf(2.0 + gamma);
    for i in 0..=g.nx {
        let x = g.x(i);
        let phi = spec.phi.value(x);
        for j in 0..=g.ny {
            let (_, y) = g.point(i, j);
            let w = (u.value(i, j) - phi - corrector.eval(x, y)).abs();
            if (x - x0).abs() <= f0 && y <= g.f[i][0] {
                rep.window_nodes += 1;
                let v = w * weight / scale;
                if v > rep.window_constant {
                    rep.window_constant = v;
                    rep.window_argmax = [x, y];
                }
            }
            if let (Some(p), Some(br)) = (params.as_ref(), rep.barrier_ratio.as_mut()) {
                if i > 0 && w > 0.0 {
                    if let Ok(Some(lh)) = log_h(p, [x, y]) {
                        *br = br.max((w.ln() - lh).exp());
                    }
                }
            }
        }
    }
    Ok(rep)
}
