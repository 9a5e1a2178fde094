//! Operator coefficients of `L u = A u_xx + B u_xy + C u_yy + D u_x + E u_y`
//! and the oblique coefficient `G` of `u_y + G u_x = 0` on `y = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Field2d, Smooth1d, TwiceDifferentiable};
use crate::norms::{self, FieldSample, Sampled1d};

#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub a: Field2d,
    pub b: Field2d,
    pub c: Field2d,
    pub d: Field2d,
    pub e: Field2d,
    /// Defined on `[-1, 2]`; presets extend constantly outside `[0, 1]`.
    pub g: Smooth1d,
    pub lambda: f64,
    pub big_lambda: f64,
    pub gamma: f64,
}

impl CoefficientSet {
    /// `A = C = 1`, `B = D = E = 0`, `G = 0`, `lambda = Lambda = 1`.
    pub fn laplace() -> Self {
        Self::constant(1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0)
    }

    pub fn constant(a: f64, b: f64, c: f64, d: f64, e: f64, lambda: f64, big_lambda: f64) -> Self {
        Self {
            a: Field2d::constant(a),
            b: Field2d::constant(b),
            c: Field2d::constant(c),
            d: Field2d::constant(d),
            e: Field2d::constant(e),
            g: Smooth1d::zero(),
            lambda,
            big_lambda,
            gamma: 0.5,
        }
    }

    /// Smooth variable coefficients with a mild mixed term and first-order
    /// terms; elliptic with `lambda = 1/2`, bounded by `Lambda = 4`.
    pub fn variable() -> Self {
        Self {
            a: Field2d::polynomial(vec![(1.0, 0, 0), (0.25, 1, 0), (0.1, 1, 1)]),
            b: Field2d::polynomial(vec![(0.2, 0, 0), (-0.1, 1, 0)]),
            c: Field2d::polynomial(vec![(1.0, 0, 0), (0.2, 0, 1), (0.1, 2, 0)]),
            d: Field2d::polynomial(vec![(0.3, 0, 0), (0.2, 0, 1)]),
            e: Field2d::polynomial(vec![(-0.2, 1, 0)]),
            g: Smooth1d::zero(),
            lambda: 0.5,
            big_lambda: 4.0,
            gamma: 0.5,
        }
    }

    /// Laplacian plus `D = c / r`: only `r |D|` is bounded.
    pub fn inverse_radius_drift(c: f64) -> Self {
        let mut s = Self::laplace();
        s.d = Field2d::inverse_radius(c);
        s
    }

    pub fn with_g(mut self, g: Smooth1d) -> Self {
        self.g = g;
        self
    }

    pub fn with_bounds(mut self, lambda: f64, big_lambda: f64) -> Self {
        self.lambda = lambda;
        self.big_lambda = big_lambda;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// `(A, B, C, D, E)` at a point.
    #[inline]
    pub fn at(&self, x: f64, y: f64) -> [f64; 5] {
        [
            self.a.eval(x, y),
            self.b.eval(x, y),
            self.c.eval(x, y),
            self.d.eval(x, y),
            self.e.eval(x, y),
        ]
    }

    pub fn labels(&self) -> [String; 6] {
        [
            self.a.label().to_string(),
            self.b.label().to_string(),
            self.c.label().to_string(),
            self.d.label().to_string(),
            self.e.label().to_string(),
            self.g.label().to_string(),
        ]
    }
}

/// Smallest eigenvalue of `[[a, b/2], [b/2, c]]` and a unit eigenvector.
pub fn min_eigen(a: f64, b: f64, c: f64) -> (f64, [f64; 2]) {
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(0.5 * b);
    let mu = mean - rad;
    // (a - mu) v1 + (b/2) v2 = 0
    let v = if b.abs() > 1e-300 {
        [0.5 * b, mu - a]
    } else if a <= c {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let n = v[0].hypot(v[1]);
    (mu, [v[0] / n, v[1] / n])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityReport {
    pub min_quotient: f64,
    pub witness: [f64; 2],
    pub direction: [f64; 2],
    pub lambda: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Minimal Rayleigh quotient of the principal part over an `(n+1)^2` sample
/// grid of `[0, 1]^2`. The quotient is minimized over directions in closed form.
pub fn validate_ellipticity(c: &CoefficientSet, n: usize) -> Result<EllipticityReport> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "ellipticity sampling needs >= 16 per axis (got {n})"
        )));
    }
    let mut rep = EllipticityReport {
        min_quotient: f64::INFINITY,
        witness: [0.0; 2],
        direction: [1.0, 0.0],
        lambda: c.lambda,
        samples: (n + 1) * (n + 1),
        pass: true,
    };
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            let (mu, v) = min_eigen(c.a.eval(x, y), c.b.eval(x, y), c.c.eval(x, y));
            if !(mu >= rep.min_quotient) {
                rep.min_quotient = mu;
                rep.witness = [x, y];
                rep.direction = v;
            }
        }
    }
    if !(rep.min_quotient >= c.lambda * (1.0 - 1e-9)) {
        return Err(Error::EllipticityViolation {
            x: rep.witness[0],
            y: rep.witness[1],
            xi: rep.direction,
            quotient: rep.min_quotient,
            lambda: c.lambda,
        });
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// sampled `C^gamma` norms of `A, B, C, D, E`
    pub field_norms: [f64; 5],
    /// sampled `C^{2,gamma}` norm of `G` on `[0, 1]`
    pub g_norm: f64,
    /// `sup r(|D| + |E|)`, the weaker first-order bound
    pub r_weighted_first_order: f64,
    pub min_c: f64,
    pub big_lambda: f64,
    pub pass: bool,
    pub pass_r_weighted: bool,
}

/// Sampled Hölder bounds of the coefficients against `Lambda`.
pub fn validate_bounds(c: &CoefficientSet, n: usize) -> BoundsReport {
    let h = 1.0 / n as f64;
    let fields = [&c.a, &c.b, &c.c, &c.d, &c.e];
    let mut field_norms = [0.0; 5];
    for (k, fld) in fields.iter().enumerate() {
        let samples: Vec<FieldSample> = grid_points(n)
            .map(|(x, y)| FieldSample {
                x,
                y,
                u: fld.eval(x, y),
                grad: None,
                hess: None,
            })
            .collect();
        field_norms[k] =
            norms::holder_norm_field(&samples, 0, c.gamma, 0.0, (0.0, 1.0), h / 2.0).value;
    }
    let g_norm =
        norms::holder_norm_1d(&Sampled1d::from_smooth(&c.g, 4 * n, 0.0, 1.0), 2, c.gamma).value;
    let mut rw = 0.0f64;
    let mut min_c = f64::INFINITY;
    for (x, y) in grid_points(n) {
        let r = x.hypot(y);
        if r > 0.0 {
            rw = rw.max(r * (c.d.eval(x, y).abs() + c.e.eval(x, y).abs()));
        }
        min_c = min_c.min(c.c.eval(x, y));
    }
    let lam = c.big_lambda * (1.0 + 1e-9);
    let pass = field_norms.iter().all(|v| *v <= lam) && g_norm <= lam;
    BoundsReport {
        field_norms,
        g_norm,
        r_weighted_first_order: rw,
        min_c,
        big_lambda: c.big_lambda,
        pass,
        pass_r_weighted: rw <= lam && field_norms[..3].iter().all(|v| *v <= lam) && g_norm <= lam,
    }
}

fn grid_points(n: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..=n).flat_map(move |j| (0..=n).map(move |i| (i as f64 / n as f64, j as f64 / n as f64)))
}

/// `L u` at `(x, y)` in `[0, 1]^2`.
pub fn apply_operator(
    c: &CoefficientSet,
    u: &dyn TwiceDifferentiable,
    x: f64,
    y: f64,
) -> Result<f64> {
    if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
        return Err(Error::OutOfDomain { x, y });
    }
    Ok(apply_at(c, u, x, y))
}

/// `L u` without the domain check (used by the transforms and barrier code
/// where points may lie in the reflected or extended plane).
pub(crate) fn apply_at(c: &CoefficientSet, u: &dyn TwiceDifferentiable, x: f64, y: f64) -> f64 {
    let j = u.jet(x, y);
    let [a, b, cc, d, e] = c.at(x, y);
    a * j.uxx + b * j.uxy + cc * j.uyy + d * j.ux + e * j.uy
}

/// Serializable coefficient description: a number, a polynomial term list
/// `[[c, px, py], ...]`, or the `c / r` preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Constant(f64),
    Poly { poly: Vec<(f64, i32, i32)> },
    InverseRadius { inverse_radius: f64 },
}

impl FieldSpec {
    pub fn build(&self) -> Field2d {
        match self {
            FieldSpec::Constant(v) => Field2d::constant(*v),
            FieldSpec::Poly { poly } => Field2d::polynomial(poly.clone()),
            FieldSpec::InverseRadius { inverse_radius } => Field2d::inverse_radius(*inverse_radius),
        }
    }
}

/// `G` description: a number or polynomial coefficients `[g0, g1, ...]` in `x`.
/// Polynomials are used as given on `[0, 1]` and continued by their end
/// values outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GSpec {
    Constant(f64),
    Poly { poly: Vec<f64> },
}

impl GSpec {
    pub fn build(&self) -> Smooth1d {
        match self {
            GSpec::Constant(v) => Smooth1d::constant(*v),
            GSpec::Poly { poly } => {
                let p = Smooth1d::polynomial(poly.clone());
                let (lo, hi) = (p.value(0.0), p.value(1.0));
                Smooth1d::from_jet(p.label().to_string(), move |x| {
                    if x < 0.0 {
                        [lo, 0.0, 0.0]
                    } else if x > 1.0 {
                        [hi, 0.0, 0.0]
                    } else {
                        p.jet(x)
                    }
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientPreset {
    Laplace,
    Variable,
}

/// JSON fragment `{"preset": ..}` or `{"A": .., "B": .., ..., "lambda": .., "Lambda": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<CoefficientPreset>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<FieldSpec>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<FieldSpec>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<FieldSpec>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<FieldSpec>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<FieldSpec>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<GSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub big_lambda: Option<f64>,
}

impl CoefficientSpec {
    pub fn laplace() -> Self {
        Self {
            preset: Some(CoefficientPreset::Laplace),
            a: None,
            b: None,
            c: None,
            d: None,
            e: None,
            g: None,
            lambda: None,
            big_lambda: None,
        }
    }

    /// Starts from the preset (Laplace when absent) and overrides the given fields.
    pub fn build(&self, gamma: f64) -> Result<CoefficientSet> {
        let mut s = match self.preset.unwrap_or(CoefficientPreset::Laplace) {
            CoefficientPreset::Laplace => CoefficientSet::laplace(),
            CoefficientPreset::Variable => CoefficientSet::variable(),
        };
        let slots = [
            (&self.a, &mut s.a),
            (&self.b, &mut s.b),
            (&self.c, &mut s.c),
            (&self.d, &mut s.d),
            (&self.e, &mut s.e),
        ];
        for (spec, slot) in slots {
            if let Some(f) = spec {
                *slot = f.build();
            }
        }
        if let Some(g) = &self.g {
            s.g = g.build();
        }
        if let Some(l) = self.lambda {
            s.lambda = l;
        }
        if let Some(l) = self.big_lambda {
            s.big_lambda = l;
        }
        if !(s.lambda > 0.0 && s.big_lambda >= s.lambda) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < lambda <= Lambda (got {}, {})",
                s.lambda, s.big_lambda
            )));
        }
        Ok(s.with_gamma(gamma))
    }
}
