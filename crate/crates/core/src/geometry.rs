//! The crescent domain `{0 < x < 1, 0 < y < f(x)}` and its upper boundary profile `f`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::Smooth1d;
use crate::norms::{self, Sampled1d};
use crate::spline::CubicSpline;

/// Samples used for the non-degeneracy constants.
pub const PROFILE_SAMPLES: usize = 4096;
/// Samples used for the discrete C^{2,gamma} norm of the profile.
pub const NORM_SAMPLES: usize = 1024;
const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `a sin(pi x)`
    Sine,
    /// `a x (1 - x) q(x)` with `q(x) = sum coeffs[k] x^k` (default `q = 1`)
    Poly,
    /// Straight corner: slope `a` on `[0, 3/4]`, cubic downturn to `f(1) = 0`
    Corner,
    /// Natural cubic spline through `(x, a y)`
    Table,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDescriptor {
    pub kind: ProfileKind,
    pub amplitude: f64,
    #[serde(default)]
    pub params: ProfileParams,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.5
}

impl ProfileDescriptor {
    pub fn new(kind: ProfileKind, amplitude: f64) -> Self {
        Self {
            kind,
            amplitude,
            params: ProfileParams::default(),
            gamma: default_gamma(),
        }
    }

    pub fn sine(amplitude: f64) -> Self {
        Self::new(ProfileKind::Sine, amplitude)
    }

    pub fn corner(slope: f64) -> Self {
        Self::new(ProfileKind::Corner, slope)
    }

    pub fn poly(amplitude: f64, coeffs: Vec<f64>) -> Self {
        let mut d = Self::new(ProfileKind::Poly, amplitude);
        d.params.coeffs = Some(coeffs);
        d
    }

    pub fn table(amplitude: f64, x: Vec<f64>, y: Vec<f64>) -> Self {
        let mut d = Self::new(ProfileKind::Table, amplitude);
        d.params.x = Some(x);
        d.params.y = Some(y);
        d
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Same shape with a different amplitude (the thinning parameter).
    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }
}

/// Upper boundary `y = f(x)` with its non-degeneracy constants.
///
/// `pi_const` is `inf f / sin(pi x)`, `pi_bar` the C^2 norm of `f` in the max
/// convention `max(sup|f|, sup|f'|, sup|f''|)`, and `c_f = pi_bar / pi_const`.
/// `sigma` is the discrete C^{2,gamma} norm (sum convention, see [`norms`]).
#[derive(Clone)]
pub struct BoundaryProfile {
    jet: Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>,
    label: String,
    pub amplitude: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub pi_const: f64,
    pub pi_bar: f64,
    pub c_f: f64,
}

impl fmt::Debug for BoundaryProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryProfile")
            .field("label", &self.label)
            .field("sigma", &self.sigma)
            .field("pi_const", &self.pi_const)
            .field("pi_bar", &self.pi_bar)
            .field("c_f", &self.c_f)
            .finish()
    }
}

/// Plain-data summary of a profile for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub label: String,
    pub amplitude: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub pi_const: f64,
    pub pi_bar: f64,
    pub c_f: f64,
    pub slope_at_zero: f64,
}

pub fn make_profile(desc: &ProfileDescriptor) -> Result<BoundaryProfile> {
    let a = desc.amplitude;
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::InvalidDescriptor(format!(
            "amplitude must be finite and > 0 (got {a})"
        )));
    }
    if !(desc.gamma > 0.0 && desc.gamma < 1.0) {
        return Err(Error::InvalidDescriptor(format!(
            "gamma must lie in (0, 1) (got {})",
            desc.gamma
        )));
    }
    let f = match desc.kind {
        ProfileKind::Sine => Smooth1d::sine(a, 1.0),
        ProfileKind::Poly => {
            let q = desc.params.coeffs.clone().unwrap_or_else(|| vec![1.0]);
            if q.is_empty() || q.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidDescriptor(
                    "poly coeffs must be finite and non-empty".into(),
                ));
            }
            // a x (1 - x) q(x) = a (x - x^2) q(x)
            let mut c = vec![0.0; q.len() + 2];
            for (k, &qk) in q.iter().enumerate() {
                c[k + 1] += a * qk;
                c[k + 2] -= a * qk;
            }
            Smooth1d::polynomial(c)
        }
        ProfileKind::Corner => corner_profile(a),
        ProfileKind::Table => {
            let (Some(x), Some(y)) = (desc.params.x.clone(), desc.params.y.clone()) else {
                return Err(Error::InvalidDescriptor(
                    "table profile needs params.x and params.y".into(),
                ));
            };
            if x.first() != Some(&0.0) || x.last() != Some(&1.0) {
                return Err(Error::InvalidDescriptor(
                    "table knots must span exactly [0, 1]".into(),
                ));
            }
            let y = y.into_iter().map(|v| a * v).collect();
            let s =
                CubicSpline::natural(x, y).map_err(|e| Error::InvalidDescriptor(e.to_string()))?;
            Smooth1d::from_jet("table", move |t| s.jet(t))
        }
    };
    let label = format!("{:?}(a={a})", desc.kind).to_lowercase();
    BoundaryProfile::from_smooth(label, a, desc.gamma, f)
}

/// `s x` on `[0, 3/4]`, `s x (1 - t^3)` with `t = 4 (x - 3/4)` on `[3/4, 1]`.
/// The blend is C^{2,1}, stays below `y = s x`, and has `f'(1) = -12 s`.
fn corner_profile(slope: f64) -> Smooth1d {
    Smooth1d::from_jet(format!("corner({slope})"), move |x| {
        if x <= 0.75 {
            [slope * x, slope, 0.0]
        } else {
            let t = 4.0 * (x - 0.75);
            let (t2, t3) = (t * t, t * t * t);
            [
                slope * x * (1.0 - t3),
                slope * (1.0 - t3) - 12.0 * slope * x * t2,
                -24.0 * slope * t2 - 96.0 * slope * x * t,
            ]
        }
    })
}

impl BoundaryProfile {
    /// Builds a profile from any smooth function, validating the standing
    /// assumptions and computing the constants.
    pub fn from_smooth(
        label: impl Into<String>,
        amplitude: f64,
        gamma: f64,
        f: Smooth1d,
    ) -> Result<Self> {
        for x in [0.0, 1.0] {
            let v = f.value(x);
            if !(v.abs() <= ENDPOINT_TOL) {
                return Err(Error::EndpointViolation { x, value: v });
            }
        }
        let n = PROFILE_SAMPLES;
        for i in 1..n {
            let x = i as f64 / n as f64;
            let v = f.value(x);
            if !(v > 0.0) {
                return Err(Error::NonPositiveProfile { x, value: v });
            }
        }
        let pi_const = infimum_ratio(&f);
        let pi_bar = c2_norm_max(&f);
        let sampled = Sampled1d::from_smooth(&f, NORM_SAMPLES, 0.0, 1.0);
        let sigma = norms::holder_norm_1d(&sampled, 2, gamma).value;
        let jet = move |x: f64| f.jet(x);
        Ok(Self {
            jet: Arc::new(jet),
            label: label.into(),
            amplitude,
            gamma,
            sigma,
            pi_const,
            pi_bar,
            c_f: pi_bar / pi_const,
        })
    }

    #[inline]
    pub fn jet(&self, x: f64) -> [f64; 3] {
        (self.jet)(x)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    #[inline]
    pub fn eval_d1(&self, x: f64) -> f64 {
        self.jet(x)[1]
    }

    #[inline]
    pub fn eval_d2(&self, x: f64) -> f64 {
        self.jet(x)[2]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn as_smooth(&self) -> Smooth1d {
        let j = self.jet.clone();
        Smooth1d::from_jet(self.label.clone(), move |x| j(x))
    }

    pub fn max_height(&self) -> f64 {
        (0..=NORM_SAMPLES)
            .map(|i| self.eval(i as f64 / NORM_SAMPLES as f64))
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            label: self.label.clone(),
            amplitude: self.amplitude,
            gamma: self.gamma,
            sigma: self.sigma,
            pi_const: self.pi_const,
            pi_bar: self.pi_bar,
            c_f: self.c_f,
            slope_at_zero: self.eval_d1(0.0),
        }
    }

    /// `f' = f'(0)` on `[0, 3/4]` and `f(x) <= f'(0) x` on `n` samples.
    pub fn is_straight_corner(&self, n: usize) -> bool {
        let s = self.eval_d1(0.0);
        if s <= 0.0 {
            return false;
        }
        (0..=n).all(|i| {
            let x = i as f64 / n as f64;
            let [v, d1, _] = self.jet(x);
            let below = v <= s * x * (1.0 + 1e-12) + 1e-15;
            let straight = x > 0.75 || (d1 - s).abs() <= 1e-12 * s.max(1.0);
            below && straight
        })
    }
}

/// `inf f(x)/sin(pi x)` from dense samples, the endpoint limits `f'(0)/pi`
/// and `-f'(1)/pi`, and a golden-section refinement around the sampled minimum.
fn infimum_ratio(f: &Smooth1d) -> f64 {
    let n = PROFILE_SAMPLES;
    let ratio = |x: f64| f.value(x) / (PI * x).sin();
    let mut best = (f.d1(0.0) / PI, 0usize);
    let right = -f.d1(1.0) / PI;
    if right < best.0 {
        best = (right, n);
    }
    for i in 1..n {
        let r = ratio(i as f64 / n as f64);
        if r < best.0 {
            best = (r, i);
        }
    }
    let (val, i) = best;
    if i == 0 || i == n {
        return val;
    }
    let h = 1.0 / n as f64;
    let a = ((i - 1) as f64 * h).max(h * 1e-3);
    let b = ((i + 1) as f64 * h).min(1.0 - h * 1e-3);
    let refined = golden_min(&ratio, a, b);
    refined.min(val)
}

fn c2_norm_max(f: &Smooth1d) -> f64 {
    let n = PROFILE_SAMPLES;
    let mut best = [0.0f64; 3];
    let mut at = [0usize; 3];
    for i in 0..=n {
        let j = f.jet(i as f64 / n as f64);
        for k in 0..3 {
            if j[k].abs() > best[k] {
                best[k] = j[k].abs();
                at[k] = i;
            }
        }
    }
    let h = 1.0 / n as f64;
    let mut out = 0.0f64;
    for k in 0..3 {
        let a = (at[k] as f64 - 1.0).max(0.0) * h;
        let b = ((at[k] + 1) as f64 * h).min(1.0);
        let neg = |x: f64| -f.jet(x)[k].abs();
        out = out.max(best[k]).max(-golden_min(&neg, a, b));
    }
    out
}

/// Golden-section minimization on `[a, b]` (unimodal assumed).
pub(crate) fn golden_min(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    gc.min(gd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPart {
    /// Upper boundary `y = f(x)` carrying the Dirichlet data.
    Upper,
    /// Flat boundary `y = 0` carrying the oblique condition.
    Lower,
}

#[derive(Debug, Clone)]
pub struct CrescentDomain {
    pub profile: BoundaryProfile,
}

impl CrescentDomain {
    pub fn new(profile: BoundaryProfile) -> Self {
        Self { profile }
    }

    /// Open-set membership `0 < x < 1, 0 < y < f(x)`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > 0.0 && x < 1.0 && y > 0.0 && y < self.profile.eval(x)
    }

    /// Boundary classification within `tol`; the pinch corners belong to both
    /// parts and are reported as `Upper`.
    pub fn classify(&self, x: f64, y: f64, tol: f64) -> Option<BoundaryPart> {
        if !(-tol..=1.0 + tol).contains(&x) {
            return None;
        }
        let f = self.profile.eval(x.clamp(0.0, 1.0));
        if (y - f).abs() <= tol {
            Some(BoundaryPart::Upper)
        } else if y.abs() <= tol && y <= f {
            Some(BoundaryPart::Lower)
        } else {
            None
        }
    }
}

/// Outcome of the smallness check on `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub norm: f64,
    pub sigma0: f64,
    pub within_sigma0: bool,
    pub pi_const: f64,
    pub pi_bar: f64,
    pub c_f: f64,
    pub growth_constants_finite: bool,
    pub pass: bool,
}

pub fn validate_smallness(p: &BoundaryProfile, sigma0: f64) -> Result<SmallnessReport> {
    if !(sigma0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma0 must be > 0 (got {sigma0})"
        )));
    }
    let within = p.sigma <= sigma0;
    let finite = p.pi_const > 0.0 && p.pi_const.is_finite() && p.c_f.is_finite();
    Ok(SmallnessReport {
        norm: p.sigma,
        sigma0,
        within_sigma0: within,
        pi_const: p.pi_const,
        pi_bar: p.pi_bar,
        c_f: p.c_f,
        growth_constants_finite: finite,
        pass: within && finite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn sine_profile_constants() {
        let p = make_profile(&ProfileDescriptor::sine(0.1)).unwrap();
        assert!(rel(p.pi_const, 0.1) < 1e-12);
        assert!(rel(p.pi_bar, 0.1 * PI * PI) < 1e-12);
        assert!(rel(p.c_f, PI * PI) < 1e-10);
        assert!(rel(p.pi_bar, p.c_f * p.pi_const) < 1e-10);
    }

    #[test]
    fn poly_profile_constants() {
        // x(1-x)/sin(pi x) is minimized at x = 1/2 with value 1/4; |f''| = 2.
        let p = make_profile(&ProfileDescriptor::poly(1.0, vec![1.0])).unwrap();
        assert!(rel(p.pi_const, 0.25) < 1e-10, "{}", p.pi_const);
        assert!(rel(p.pi_bar, 2.0) < 1e-12);
        assert!(rel(p.c_f, 8.0) < 1e-10);
    }

    #[test]
    fn sign_violation_rejected() {
        let f = Smooth1d::sine(1.0, 2.0);
        let err = BoundaryProfile::from_smooth("sin2", 1.0, 0.5, f).unwrap_err();
        assert!(matches!(err, Error::NonPositiveProfile { x, .. } if x > 0.5));
    }

    #[test]
    fn endpoint_violation_rejected() {
        let f = Smooth1d::polynomial(vec![1e-6, 1.0, -1.0]);
        let err = BoundaryProfile::from_smooth("shifted", 1.0, 0.5, f).unwrap_err();
        assert!(matches!(err, Error::EndpointViolation { x, .. } if x == 0.0));
    }

    #[test]
    fn zero_amplitude_rejected_upstream() {
        assert!(matches!(
            make_profile(&ProfileDescriptor::sine(0.0)),
            Err(Error::InvalidDescriptor(_))
        ));
    }

    #[test]
    fn derivatives_agree_with_central_differences() {
        for desc in [
            ProfileDescriptor::sine(0.3),
            ProfileDescriptor::poly(0.5, vec![1.0, 0.5]),
            ProfileDescriptor::corner(0.05),
        ] {
            let p = make_profile(&desc).unwrap();
            let err = |h: f64| {
                (1..40)
                    .map(|i| {
                        let x = 0.02 + 0.024 * i as f64;
                        let d1 = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
                        (d1 - p.eval_d1(x)).abs()
                    })
                    .fold(0.0, f64::max)
            };
            let (e1, e2) = (err(1e-3), err(5e-4));
            assert!(e1 < 1e-5 && e2 <= e1 / 3.0 + 1e-12, "{desc:?}: {e1} {e2}");
        }
    }

    #[test]
    fn corner_profile_is_straight_and_below_its_tangent() {
        let p = make_profile(&ProfileDescriptor::corner(0.05)).unwrap();
        assert!(p.is_straight_corner(4096));
        assert!(rel(p.eval_d1(0.0), 0.05) < 1e-15);
        assert!(p.eval(1.0).abs() < 1e-15);
        // right endpoint limit 12 s / pi is larger than the left one s / pi
        assert!(rel(p.pi_const, 0.05 / PI) < 1e-9);
        let sine = make_profile(&ProfileDescriptor::sine(0.05)).unwrap();
        assert!(!sine.is_straight_corner(512));
    }

    #[test]
    fn table_profile_matches_sampled_sine() {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let y: Vec<f64> = x.iter().map(|&t| (PI * t).sin()).collect();
        let mut y = y;
        y[200] = 0.0;
        let p = make_profile(&ProfileDescriptor::table(0.2, x, y)).unwrap();
        assert!((p.eval(0.37) - 0.2 * (PI * 0.37).sin()).abs() < 1e-7);
        assert!(rel(p.pi_const, 0.2) < 1e-3);
    }

    #[test]
    fn scaling_is_linear_in_amplitude() {
        for base in [
            ProfileDescriptor::sine(1.0),
            ProfileDescriptor::poly(1.0, vec![1.0, 1.0]),
        ] {
            let p1 = make_profile(&base.with_amplitude(0.08)).unwrap();
            let p2 = make_profile(&base.with_amplitude(0.01)).unwrap();
            assert!(rel(p1.pi_const / 0.08, p2.pi_const / 0.01) < 1e-8);
            assert!(rel(p1.pi_bar / 0.08, p2.pi_bar / 0.01) < 1e-8);
            assert!(rel(p1.c_f, p2.c_f) < 1e-8);
        }
    }

    #[test]
    fn smallness_report() {
        let small = make_profile(&ProfileDescriptor::sine(0.01)).unwrap();
        let r = validate_smallness(&small, 1.0).unwrap();
        assert!(r.pass);
        // sum convention: sup|f| + sup|f'| + sup|f''| + seminorm of f''
        let sups = 0.01 * (1.0 + PI + PI * PI);
        assert!(r.norm > sups && r.norm < 0.01 * PI * PI * 3.0, "{}", r.norm);
        let big = make_profile(&ProfileDescriptor::sine(0.5)).unwrap();
        assert!(!validate_smallness(&big, 0.1).unwrap().pass);
    }

    #[test]
    fn domain_membership() {
        let d = CrescentDomain::new(make_profile(&ProfileDescriptor::sine(0.1)).unwrap());
        assert!(d.contains(0.5, 0.05));
        assert!(!d.contains(0.5, 0.11));
        assert!(!d.contains(0.0, 0.0));
        assert_eq!(d.classify(0.5, 0.1, 1e-12), Some(BoundaryPart::Upper));
        assert_eq!(d.classify(0.3, 0.0, 1e-12), Some(BoundaryPart::Lower));
        assert_eq!(d.classify(0.3, 0.01, 1e-12), None);
    }
}
