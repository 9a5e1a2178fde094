//! Closed-form scalar functions used as data: one-variable functions carried
//! with their first two derivatives, plain two-variable coefficient fields, and
//! twice-differentiable test fields.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type JetFn = dyn Fn(f64) -> [f64; 3] + Send + Sync;
type ValueFn2 = dyn Fn(f64, f64) -> f64 + Send + Sync;
type JetFn2 = dyn Fn(f64, f64) -> Jet2 + Send + Sync;

/// A function of one variable together with its first and second derivative.
#[derive(Clone)]
pub struct Smooth1d {
    jet: Arc<JetFn>,
    label: String,
}

impl fmt::Debug for Smooth1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Smooth1d").field(&self.label).finish()
    }
}

impl Smooth1d {
    pub fn from_jet(
        label: impl Into<String>,
        jet: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self {
            jet: Arc::new(jet),
            label: label.into(),
        }
    }

    /// Wraps a value-only function; derivatives come from fourth-order
    /// central differences with step `h`.
    pub fn from_values(
        label: impl Into<String>,
        h: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_jet(label, move |x| {
            let (fm2, fm1, f0, fp1, fp2) =
                (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
            let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
            let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
            [f0, d1, d2]
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::from_jet(format!("const({c})"), move |_| [c, 0.0, 0.0])
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `sum_k coeffs[k] x^k`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let label = format!("poly{coeffs:?}");
        Self::from_jet(label, move |x| poly_jet(&coeffs, x))
    }

    /// `amp * cos(freq * pi * x)`.
    pub fn cosine(amp: f64, freq: f64) -> Self {
        let w = freq * PI;
        Self::from_jet(format!("{amp}*cos({freq}*pi*x)"), move |x| {
            let (s, c) = (w * x).sin_cos();
            [amp * c, -amp * w * s, -amp * w * w * c]
        })
    }

    /// `amp * sin(freq * pi * x)`.
    pub fn sine(amp: f64, freq: f64) -> Self {
        let w = freq * PI;
        Self::from_jet(format!("{amp}*sin({freq}*pi*x)"), move |x| {
            let (s, c) = (w * x).sin_cos();
            [amp * s, amp * w * c, -amp * w * w * s]
        })
    }

    /// `sum_k cos_coeffs[k] cos(k pi x) + sin_coeffs[k] sin(k pi x)`.
    pub fn trig_series(cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        let label = format!("trig(cos={cos_coeffs:?}, sin={sin_coeffs:?})");
        Self::from_jet(label, move |x| {
            let mut out = [0.0; 3];
            for (k, &a) in cos_coeffs.iter().enumerate() {
                let w = k as f64 * PI;
                let (s, c) = (w * x).sin_cos();
                out[0] += a * c;
                out[1] -= a * w * s;
                out[2] -= a * w * w * c;
            }
            for (k, &b) in sin_coeffs.iter().enumerate() {
                let w = k as f64 * PI;
                let (s, c) = (w * x).sin_cos();
                out[0] += b * s;
                out[1] += b * w * c;
                out[2] -= b * w * w * s;
            }
            out
        })
    }

    /// `amp * (x + shift)^exponent`.
    pub fn shifted_power(amp: f64, shift: f64, exponent: f64) -> Self {
        Self::from_jet(format!("{amp}*(x+{shift})^{exponent}"), move |x| {
            let t = x + shift;
            [
                amp * t.powf(exponent),
                amp * exponent * t.powf(exponent - 1.0),
                amp * exponent * (exponent - 1.0) * t.powf(exponent - 2.0),
            ]
        })
    }

    /// `sum_c |x - c|^(2+gamma) / ((2+gamma)(1+gamma))`: second derivative is
    /// `sum_c |x - c|^gamma`, so the function is exactly C^{2,gamma} at each center.
    pub fn holder_cusps(centers: Vec<f64>, gamma: f64) -> Self {
        let label = format!("cusps({centers:?}, gamma={gamma})");
        let p = 2.0 + gamma;
        let norm = p * (1.0 + gamma);
        Self::from_jet(label, move |x| {
            let mut out = [0.0; 3];
            for &c in &centers {
                let d = x - c;
                let a = d.abs();
                out[0] += a.powf(p) / norm;
                out[1] += d.signum() * a.powf(1.0 + gamma) / (1.0 + gamma);
                out[2] += a.powf(gamma);
            }
            out
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn jet(&self, x: f64) -> [f64; 3] {
        (self.jet)(x)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    #[inline]
    pub fn d1(&self, x: f64) -> f64 {
        self.jet(x)[1]
    }

    #[inline]
    pub fn d2(&self, x: f64) -> f64 {
        self.jet(x)[2]
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, scale: f64, other: &Smooth1d) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::from_jet(format!("{} + {scale}*{}", a.label, b.label), move |x| {
            let (p, q) = (a.jet(x), b.jet(x));
            [
                p[0] + scale * q[0],
                p[1] + scale * q[1],
                p[2] + scale * q[2],
            ]
        })
    }

    pub fn scaled(&self, scale: f64) -> Self {
        let a = self.clone();
        Self::from_jet(format!("{scale}*{}", a.label), move |x| {
            let p = a.jet(x);
            [scale * p[0], scale * p[1], scale * p[2]]
        })
    }
}

fn poly_jet(coeffs: &[f64], x: f64) -> [f64; 3] {
    let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for &c in coeffs.iter().rev() {
        d2 = d2 * x + 2.0 * d1;
        d1 = d1 * x + v;
        v = v * x + c;
    }
    [v, d1, d2]
}

/// A scalar field on the plane (operator coefficients, sources).
#[derive(Clone)]
pub struct Field2d {
    f: Arc<ValueFn2>,
    label: String,
}

impl fmt::Debug for Field2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Field2d").field(&self.label).finish()
    }
}

impl Field2d {
    pub fn from_fn(
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fn(format!("{c}"), move |_, _| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Polynomial `sum c x^px y^py` from `(c, px, py)` terms.
    pub fn polynomial(terms: Vec<(f64, i32, i32)>) -> Self {
        let label = format!("poly2{terms:?}");
        Self::from_fn(label, move |x, y| {
            terms
                .iter()
                .map(|&(c, px, py)| c * x.powi(px) * y.powi(py))
                .sum()
        })
    }

    /// `c / sqrt(x^2 + y^2)`: bounded only after multiplication by the radius.
    pub fn inverse_radius(c: f64) -> Self {
        Self::from_fn(format!("{c}/r"), move |x, y| c / x.hypot(y))
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Value and derivatives up to second order of a field at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Jet2 {
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uxy: f64,
    pub uyy: f64,
}

impl Jet2 {
    pub fn gradient(&self) -> [f64; 2] {
        [self.ux, self.uy]
    }

    pub fn hessian(&self) -> [f64; 3] {
        [self.uxx, self.uxy, self.uyy]
    }

    pub fn scaled(&self, a: f64) -> Jet2 {
        Jet2 {
            u: a * self.u,
            ux: a * self.ux,
            uy: a * self.uy,
            uxx: a * self.uxx,
            uxy: a * self.uxy,
            uyy: a * self.uyy,
        }
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            u: self.u + o.u,
            ux: self.ux + o.ux,
            uy: self.uy + o.uy,
            uxx: self.uxx + o.uxx,
            uxy: self.uxy + o.uxy,
            uyy: self.uyy + o.uyy,
        }
    }
}

/// A field whose derivatives up to order two are available pointwise.
pub trait TwiceDifferentiable {
    fn jet(&self, x: f64, y: f64) -> Jet2;

    fn value(&self, x: f64, y: f64) -> f64 {
        self.jet(x, y).u
    }
}

/// Polynomial field in `x, y`, exactly differentiated.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    terms: Vec<(f64, i32, i32)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(f64, i32, i32)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(f64, i32, i32)] {
        &self.terms
    }

    pub fn linear_combination(a: f64, p: &Poly2, b: f64, q: &Poly2) -> Poly2 {
        let mut terms: Vec<_> = p.terms.iter().map(|&(c, i, j)| (a * c, i, j)).collect();
        terms.extend(q.terms.iter().map(|&(c, i, j)| (b * c, i, j)));
        Poly2 { terms }
    }
}

fn mono(c: f64, x: f64, p: i32) -> f64 {
    // c * p * x^(p-1) with the convention that the term vanishes for p = 0.
    if p == 0 {
        0.0
    } else {
        c * p as f64 * x.powi(p - 1)
    }
}

impl TwiceDifferentiable for Poly2 {
    fn jet(&self, x: f64, y: f64) -> Jet2 {
        let mut j = Jet2::default();
        for &(c, px, py) in &self.terms {
            let (xp, yp) = (x.powi(px), y.powi(py));
            j.u += c * xp * yp;
            j.ux += mono(c, x, px) * yp;
            j.uy += xp * mono(c, y, py);
            j.uxx += mono(mono(1.0, 1.0, px), x, px - 1) * c * yp;
            j.uxy += mono(c, x, px) * mono(1.0, y, py);
            j.uyy += xp * mono(mono(1.0, 1.0, py), y, py - 1) * c;
        }
        j
    }
}

/// Closed-form field given by a jet-valued closure.
#[derive(Clone)]
pub struct AnalyticField {
    jet: Arc<JetFn2>,
    label: String,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("AnalyticField").field(&self.label).finish()
    }
}

impl AnalyticField {
    pub fn new(
        label: impl Into<String>,
        jet: impl Fn(f64, f64) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        Self {
            jet: Arc::new(jet),
            label: label.into(),
        }
    }

    /// `cosh(pi y) cos(pi x)`: harmonic, with vanishing normal derivative on `y = 0`.
    pub fn harmonic_cosh_cos() -> Self {
        Self::new("cosh(pi y) cos(pi x)", |x, y| {
            let (s, c) = (PI * x).sin_cos();
            let (ch, sh) = ((PI * y).cosh(), (PI * y).sinh());
            let p2 = PI * PI;
            Jet2 {
                u: ch * c,
                ux: -PI * ch * s,
                uy: PI * sh * c,
                uxx: -p2 * ch * c,
                uxy: -p2 * sh * s,
                uyy: p2 * ch * c,
            }
        })
    }

    /// Lifts a one-variable function to the field `(x, y) -> phi(x)`.
    pub fn from_trace(phi: &Smooth1d) -> Self {
        let phi = phi.clone();
        Self::new(format!("{}(x)", phi.label()), move |x, _| {
            let [v, d1, d2] = phi.jet(x);
            Jet2 {
                u: v,
                ux: d1,
                uxx: d2,
                ..Jet2::default()
            }
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl TwiceDifferentiable for AnalyticField {
    fn jet(&self, x: f64, y: f64) -> Jet2 {
        (self.jet)(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_jet_matches_hand_derivatives() {
        // 1 + 2x + 3x^2 at x = 2: 17, 14, 6
        let p = Smooth1d::polynomial(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.jet(2.0), [17.0, 14.0, 6.0]);
    }

    #[test]
    fn poly2_jet_matches_hand_derivatives() {
        // u = x^2 y + 3 y^3
        let u = Poly2::new(vec![(1.0, 2, 1), (3.0, 0, 3)]);
        let j = u.jet(2.0, 0.5);
        assert_eq!(j.u, 4.0 * 0.5 + 3.0 * 0.125);
        assert_eq!(j.ux, 2.0 * 2.0 * 0.5);
        assert_eq!(j.uy, 4.0 + 9.0 * 0.25);
        assert_eq!(j.uxx, 2.0 * 0.5);
        assert_eq!(j.uxy, 4.0);
        assert_eq!(j.uyy, 18.0 * 0.5);
    }

    #[test]
    fn cusp_second_derivative_is_holder_power() {
        let f = Smooth1d::holder_cusps(vec![0.3], 0.5);
        let d = 0.04;
        assert!((f.d2(0.3 + d) - d.sqrt()).abs() < 1e-14);
        assert_eq!(f.d2(0.3), 0.0);
        // first derivative consistent with the value by central differences
        let h = 1e-5;
        let fd = (f.value(0.5 + h) - f.value(0.5 - h)) / (2.0 * h);
        assert!((fd - f.d1(0.5)).abs() < 1e-8);
    }

    #[test]
    fn harmonic_field_is_harmonic() {
        let u = AnalyticField::harmonic_cosh_cos();
        for &(x, y) in &[(0.1, 0.02), (0.7, 0.3)] {
            let j = u.jet(x, y);
            assert!((j.uxx + j.uyy).abs() < 1e-12);
        }
        assert!(u.jet(0.4, 0.0).uy.abs() < 1e-15);
    }
}
