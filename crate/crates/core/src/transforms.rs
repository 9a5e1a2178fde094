//! Coordinate changes `(x, y) -> (s, z)` and the push-forward of the operator.
//!
//! * P1 flattens the oblique direction: `s` is the foot on `y = 0` of the
//!   trajectory `dx/dy = G(x)` through `(x, y)`, `z = y`.
//! * P2 straightens the left corner: `s = x`, `z = (f1/f)(x) y` with
//!   `f1 = chi Pi_bar x + (1 - chi) f`.
//! * P3 reflects the right corner onto the left: `(s, z) = (1 - x, y)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coefficients::{min_eigen, CoefficientSet};
use crate::error::{Error, Result};
use crate::func::{Field2d, Poly2, Smooth1d, TwiceDifferentiable};
use crate::geometry::BoundaryProfile;

/// Value, Jacobian `[[s_x, s_y], [z_x, z_y]]` and second derivatives
/// `[[s_xx, s_xy, s_yy], [z_xx, z_xy, z_yy]]` of a map at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapDerivs {
    pub value: [f64; 2],
    pub jac: [[f64; 2]; 2],
    pub hess: [[f64; 3]; 2],
}

impl MapDerivs {
    pub fn det(&self) -> f64 {
        self.jac[0][0] * self.jac[1][1] - self.jac[0][1] * self.jac[1][0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapTag {
    Identity,
    P1,
    P2,
    P3,
    Composite(Vec<MapTag>),
}

impl fmt::Display for MapTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapTag::Identity => write!(f, "identity"),
            MapTag::P1 => write!(f, "p1"),
            MapTag::P2 => write!(f, "p2"),
            MapTag::P3 => write!(f, "p3"),
            MapTag::Composite(v) => {
                let parts: Vec<String> = v.iter().map(|t| t.to_string()).collect();
                write!(f, "{}", parts.join("+"))
            }
        }
    }
}

pub trait PlaneMap: Send + Sync + fmt::Debug {
    fn forward(&self, p: [f64; 2]) -> [f64; 2];
    fn inverse(&self, q: [f64; 2]) -> [f64; 2];
    fn forward_derivs(&self, p: [f64; 2]) -> MapDerivs;
    /// `[[x_s, x_z], [y_s, y_z]]` at `q = (s, z)`.
    fn inverse_jacobian(&self, q: [f64; 2]) -> [[f64; 2]; 2];
    fn tag(&self) -> MapTag;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl PlaneMap for Identity {
    fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        p
    }
    fn inverse(&self, q: [f64; 2]) -> [f64; 2] {
        q
    }
    fn forward_derivs(&self, p: [f64; 2]) -> MapDerivs {
        MapDerivs {
            value: p,
            jac: [[1.0, 0.0], [0.0, 1.0]],
            hess: [[0.0; 3]; 2],
        }
    }
    fn inverse_jacobian(&self, _: [f64; 2]) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [0.0, 1.0]]
    }
    fn tag(&self) -> MapTag {
        MapTag::Identity
    }
}

/// Trajectory map of `dx/dy = G(x)`, integrated with classical RK4.
#[derive(Debug, Clone)]
pub struct P1Flatten {
    g: Smooth1d,
    f_max: f64,
}

impl P1Flatten {
    fn steps(&self, z: f64) -> usize {
        80usize.max((64.0 * z.abs() / self.f_max).ceil() as usize)
    }

    /// `x(z)` from `x(0) = s`, with `X_s` and `X_ss` from the variational equations.
    fn trajectory(&self, s: f64, z: f64) -> [f64; 3] {
        let n = self.steps(z);
        let h = z / n as f64;
        let rhs = |w: [f64; 3]| {
            let [g, g1, g2] = self.g.jet(w[0]);
            [g, g1 * w[1], g2 * w[1] * w[1] + g1 * w[2]]
        };
        let mut w = [s, 1.0, 0.0];
        for _ in 0..n {
            let k1 = rhs(w);
            let k2 = rhs(add(w, k1, 0.5 * h));
            let k3 = rhs(add(w, k2, 0.5 * h));
            let k4 = rhs(add(w, k3, h));
            for c in 0..3 {
                w[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        w
    }

    /// Foot point `s` of the trajectory through `(x, y)`.
    fn foot(&self, x: f64, y: f64) -> f64 {
        let n = self.steps(y);
        let h = -y / n as f64;
        let g = |x: f64| self.g.value(x);
        let mut w = x;
        for _ in 0..n {
            let k1 = g(w);
            let k2 = g(w + 0.5 * h * k1);
            let k3 = g(w + 0.5 * h * k2);
            let k4 = g(w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        w
    }
}

fn add(w: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [w[0] + h * k[0], w[1] + h * k[1], w[2] + h * k[2]]
}

impl PlaneMap for P1Flatten {
    fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        if p[1] == 0.0 {
            return p;
        }
        [self.foot(p[0], p[1]), p[1]]
    }

    fn inverse(&self, q: [f64; 2]) -> [f64; 2] {
        if q[1] == 0.0 {
            return q;
        }
        [self.trajectory(q[0], q[1])[0], q[1]]
    }

    fn forward_derivs(&self, p: [f64; 2]) -> MapDerivs {
        let [x, y] = p;
        let s = self.forward(p)[0];
        let [_, xs, xss] = if y == 0.0 {
            [x, 1.0, 0.0]
        } else {
            self.trajectory(s, y)
        };
        let [g, g1, _] = self.g.jet(x);
        let s_x = 1.0 / xs;
        let s_y = -g / xs;
        let s_xx = -xss / (xs * xs * xs);
        let t = (g1 * xs + xss * s_y) / (xs * xs);
        MapDerivs {
            value: [s, y],
            jac: [[s_x, s_y], [0.0, 1.0]],
            hess: [[s_xx, -t, g * t], [0.0; 3]],
        }
    }

    fn inverse_jacobian(&self, q: [f64; 2]) -> [[f64; 2]; 2] {
        let [x, xs, _] = self.trajectory(q[0], q[1]);
        [[xs, self.g.value(x)], [0.0, 1.0]]
    }

    fn tag(&self) -> MapTag {
        MapTag::P1
    }
}

/// Builds P1 for the oblique coefficient `g`, checking that the boundary
/// reparametrization `x -> s(x, f(x))` is strictly increasing.
pub fn p1_flatten(g: &Smooth1d, profile: &BoundaryProfile) -> Result<P1Flatten> {
    let f_max = profile.max_height();
    let map = P1Flatten {
        g: g.clone(),
        f_max,
    };
    let n = 1024;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let s = map.forward([x, profile.eval(x)])[0];
        if !(s > prev) {
            return Err(Error::NonInvertible(format!(
                "boundary parameter s(x) = x - int_0^f(x) G is not increasing at x = {x} (s = {s}, previous {prev})"
            )));
        }
        prev = s;
    }
    Ok(map)
}

/// Quintic smoothstep cutoff: 1 on `[0, 3/4]`, 0 on `[13/16, 1]`.
pub fn cutoff(x: f64) -> [f64; 3] {
    const A: f64 = 0.75;
    const B: f64 = 13.0 / 16.0;
    if x <= A {
        return [1.0, 0.0, 0.0];
    }
    if x >= B {
        return [0.0, 0.0, 0.0];
    }
    let w = B - A;
    let t = (x - A) / w;
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let s1 = 30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
    let s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w);
    [1.0 - s, -s1, -s2]
}

/// `z = R(x) y` with `R = f1 / f`.
#[derive(Clone)]
pub struct P2Straighten {
    profile: BoundaryProfile,
    pi_bar: f64,
    x_eps: f64,
}

impl fmt::Debug for P2Straighten {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("P2Straighten")
            .field("pi_bar", &self.pi_bar)
            .finish()
    }
}

impl P2Straighten {
    /// `f1, f1', f1''`.
    pub fn f1(&self, x: f64) -> [f64; 3] {
        let [c, c1, c2] = cutoff(x);
        let [f, fp, fpp] = self.profile.jet(x);
        let lin = self.pi_bar * x - f;
        [
            c * self.pi_bar * x + (1.0 - c) * f,
            c1 * lin + c * self.pi_bar + (1.0 - c) * fp,
            c2 * lin + 2.0 * c1 * (self.pi_bar - fp) + (1.0 - c) * fpp,
        ]
    }

    /// `R, R', R''`; exactly `[1, 0, 0]` once the cutoff vanishes.
    pub fn ratio(&self, x: f64) -> [f64; 3] {
        if cutoff(x)[0] == 0.0 && x > 0.75 {
            return [1.0, 0.0, 0.0];
        }
        let x = x.max(self.x_eps);
        let [g, g1, g2] = self.f1(x);
        let [f, fp, fpp] = self.profile.jet(x);
        let r = g / f;
        let r1 = (g1 * f - g * fp) / (f * f);
        let r2 = (g2 * f - g * fpp) / (f * f) - 2.0 * (g1 * fp * f - g * fp * fp) / (f * f * f);
        [r, r1, r2]
    }
}

impl PlaneMap for P2Straighten {
    fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0], self.ratio(p[0])[0] * p[1]]
    }

    fn inverse(&self, q: [f64; 2]) -> [f64; 2] {
        [q[0], q[1] / self.ratio(q[0])[0]]
    }

    fn forward_derivs(&self, p: [f64; 2]) -> MapDerivs {
        let [x, y] = p;
        let [r, r1, r2] = self.ratio(x);
        MapDerivs {
            value: [x, r * y],
            jac: [[1.0, 0.0], [r1 * y, r]],
            hess: [[0.0; 3], [r2 * y, r1, 0.0]],
        }
    }

    fn inverse_jacobian(&self, q: [f64; 2]) -> [[f64; 2]; 2] {
        let [r, r1, _] = self.ratio(q[0]);
        [[1.0, 0.0], [-q[1] * r1 / (r * r), 1.0 / r]]
    }

    fn tag(&self) -> MapTag {
        MapTag::P2
    }
}

/// Builds P2 for `profile`, checking `1 <= f1/f <= 1 + C_f` on samples.
pub fn p2_straighten(profile: &BoundaryProfile) -> Result<P2Straighten> {
    let map = P2Straighten {
        profile: profile.clone(),
        pi_bar: profile.pi_bar,
        x_eps: 1e-6,
    };
    let n = 4096;
    for i in 1..n {
        let x = i as f64 / n as f64;
        let r = map.ratio(x)[0];
        if !(r >= 1.0 - 1e-9 && r <= 1.0 + profile.c_f + 1e-9) {
            return Err(Error::DegenerateRatio {
                x,
                ratio: r,
                c_f: profile.c_f,
            });
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct P3Reflect;

impl PlaneMap for P3Reflect {
    fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        [1.0 - p[0], p[1]]
    }
    fn inverse(&self, q: [f64; 2]) -> [f64; 2] {
        [1.0 - q[0], q[1]]
    }
    fn forward_derivs(&self, p: [f64; 2]) -> MapDerivs {
        MapDerivs {
            value: self.forward(p),
            jac: [[-1.0, 0.0], [0.0, 1.0]],
            hess: [[0.0; 3]; 2],
        }
    }
    fn inverse_jacobian(&self, _: [f64; 2]) -> [[f64; 2]; 2] {
        [[-1.0, 0.0], [0.0, 1.0]]
    }
    fn tag(&self) -> MapTag {
        MapTag::P3
    }
}

pub fn p3_reflect() -> P3Reflect {
    P3Reflect
}

/// `maps[last] o ... o maps[0]`.
#[derive(Debug, Clone)]
pub struct Composite {
    pub maps: Vec<Arc<dyn PlaneMap>>,
}

impl Composite {
    pub fn new(maps: Vec<Arc<dyn PlaneMap>>) -> Self {
        Self { maps }
    }
}

/// Second-order chain rule for `w = g(v)`, `v = f(p)`.
pub fn compose_derivs(inner: &MapDerivs, outer: &MapDerivs) -> MapDerivs {
    let (fj, fh) = (inner.jac, inner.hess);
    let (gj, gh) = (outer.jac, outer.hess);
    let mut jac = [[0.0; 2]; 2];
    let mut hess = [[0.0; 3]; 2];
    // hessian index (a, b) -> slot
    let slot = |a: usize, b: usize| a + b;
    for k in 0..2 {
        for a in 0..2 {
            jac[k][a] = gj[k][0] * fj[0][a] + gj[k][1] * fj[1][a];
        }
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            let mut v = 0.0;
            for l in 0..2 {
                v += gj[k][l] * fh[l][slot(a, b)];
                for m in 0..2 {
                    v += gh[k][slot(l, m)] * fj[l][a] * fj[m][b];
                }
            }
            hess[k][slot(a, b)] = v;
        }
    }
    MapDerivs {
        value: outer.value,
        jac,
        hess,
    }
}

impl PlaneMap for Composite {
    fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        self.maps.iter().fold(p, |q, m| m.forward(q))
    }

    fn inverse(&self, q: [f64; 2]) -> [f64; 2] {
        self.maps.iter().rev().fold(q, |p, m| m.inverse(p))
    }

    fn forward_derivs(&self, p: [f64; 2]) -> MapDerivs {
        let mut acc = Identity.forward_derivs(p);
        for m in &self.maps {
            let d = m.forward_derivs(acc.value);
            acc = compose_derivs(&acc, &d);
        }
        acc
    }

    fn inverse_jacobian(&self, q: [f64; 2]) -> [[f64; 2]; 2] {
        // D(f^-1 o g^-1)(q) = Df^-1(g^-1 q) Dg^-1(q)
        let mut acc = [[1.0, 0.0], [0.0, 1.0]];
        let mut pt = q;
        for m in self.maps.iter().rev() {
            let j = m.inverse_jacobian(pt);
            acc = matmul(j, acc);
            pt = m.inverse(pt);
        }
        acc
    }

    fn tag(&self) -> MapTag {
        MapTag::Composite(self.maps.iter().map(|m| m.tag()).collect())
    }
}

pub fn matmul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Jacobian of the forward map at `p`, for checks against [`PlaneMap::inverse_jacobian`].
pub fn forward_jacobian(m: &dyn PlaneMap, p: [f64; 2]) -> [[f64; 2]; 2] {
    m.forward_derivs(p).jac
}

/// Image of the graph `y = f(x)` under `m`, as a graph `z = F(s)`.
pub fn image_profile(m: Arc<dyn PlaneMap>, profile: &BoundaryProfile) -> Result<BoundaryProfile> {
    let n = 512;
    let table: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (m.forward([x, profile.eval(x)])[0], x)
        })
        .collect();
    let increasing = table.windows(2).all(|w| w[1].0 > w[0].0);
    let decreasing = table.windows(2).all(|w| w[1].0 < w[0].0);
    if !(increasing || decreasing) {
        return Err(Error::NonInvertible(format!(
            "image of the upper boundary under {} is not a graph",
            m.tag()
        )));
    }
    let mut table = table;
    if decreasing {
        table.reverse();
    }
    let prof = profile.clone();
    let mm = m.clone();
    // jets of s(x) and z(x) along the graph
    let along = move |x: f64| {
        let [f, fp, fpp] = prof.jet(x);
        let d = mm.forward_derivs([x, f]);
        let mut out = [[0.0; 3]; 2];
        for k in 0..2 {
            let [h_xx, h_xy, h_yy] = d.hess[k];
            out[k] = [
                d.value[k],
                d.jac[k][0] + d.jac[k][1] * fp,
                h_xx + 2.0 * h_xy * fp + h_yy * fp * fp + d.jac[k][1] * fpp,
            ];
        }
        out
    };
    let jet = move |s: f64| {
        let k = table.partition_point(|e| e.0 < s).clamp(1, table.len() - 1);
        let (a, b) = (table[k - 1], table[k]);
        let mut x = a.1 + (s - a.0) / (b.0 - a.0) * (b.1 - a.1);
        for _ in 0..30 {
            let [sv, zv] = along(x);
            let dx = (sv[0] - s) / sv[1];
            x = (x - dx).clamp(0.0, 1.0);
            if dx.abs() < 1e-15 {
                let (s1, s2) = (sv[1], sv[2]);
                let (z1, z2) = (zv[1], zv[2]);
                return [zv[0], z1 / s1, (z2 * s1 - z1 * s2) / (s1 * s1 * s1)];
            }
        }
        let [sv, zv] = along(x);
        [
            zv[0],
            zv[1] / sv[1],
            (zv[2] * sv[1] - zv[1] * sv[2]) / sv[1].powi(3),
        ]
    };
    let label = format!("{}[{}]", m.tag(), profile.label());
    BoundaryProfile::from_smooth(
        label,
        profile.amplitude,
        profile.gamma,
        Smooth1d::from_jet("image", jet),
    )
}

/// Coefficients of the operator and oblique condition in `(s, z)`.
#[derive(Debug, Clone)]
pub struct TransformedProblem {
    pub coefficients: CoefficientSet,
    pub profile: Option<BoundaryProfile>,
    pub source_profile: Option<BoundaryProfile>,
    pub map: Arc<dyn PlaneMap>,
    pub original: CoefficientSet,
    pub tag: MapTag,
}

/// `(A1, B1, C1, D1, E1)` at the original point `p`.
pub fn pushed_at(c: &CoefficientSet, m: &dyn PlaneMap, p: [f64; 2]) -> [f64; 5] {
    let [a, b, cc, d, e] = c.at(p[0], p[1]);
    let dv = m.forward_derivs(p);
    let [[sx, sy], [zx, zy]] = dv.jac;
    let [[sxx, sxy, syy], [zxx, zxy, zyy]] = dv.hess;
    [
        a * sx * sx + b * sx * sy + cc * sy * sy,
        2.0 * a * sx * zx + b * (sx * zy + sy * zx) + 2.0 * cc * sy * zy,
        a * zx * zx + b * zx * zy + cc * zy * zy,
        a * sxx + b * sxy + cc * syy + d * sx + e * sy,
        a * zxx + b * zxy + cc * zyy + d * zx + e * zy,
    ]
}

/// Relative gap between `L (U o m)` by sixth-order differences (step `h`) and
/// `L1 U` from the pushed coefficients, at `p`.
pub fn chain_rule_residual(
    c: &CoefficientSet,
    m: &dyn PlaneMap,
    u: &Poly2,
    p: [f64; 2],
    h: f64,
) -> f64 {
    const D1: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -0.75,
        0.0,
        0.75,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    const D2: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        1.5,
        -49.0 / 18.0,
        1.5,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    let f = |x: f64, y: f64| {
        let q = m.forward([x, y]);
        u.value(q[0], q[1])
    };
    let off = |k: usize| (k as f64 - 3.0) * h;
    let (mut ux, mut uy, mut uxx, mut uyy, mut uxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for a in 0..7 {
        let (fx, fy) = (f(p[0] + off(a), p[1]), f(p[0], p[1] + off(a)));
        ux += D1[a] * fx;
        uxx += D2[a] * fx;
        uy += D1[a] * fy;
        uyy += D2[a] * fy;
        if a != 3 {
            for b in (0..7).filter(|&b| b != 3) {
                uxy += D1[a] * D1[b] * f(p[0] + off(a), p[1] + off(b));
            }
        }
    }
    let [a, b, cc, d, e] = c.at(p[0], p[1]);
    let lhs = (a * uxx + b * uxy + cc * uyy) / (h * h) + (d * ux + e * uy) / h;
    let [a1, b1, c1, d1, e1] = pushed_at(c, m, p);
    let q = m.forward(p);
    let j = u.jet(q[0], q[1]);
    let rhs = a1 * j.uxx + b1 * j.uxy + c1 * j.uyy + d1 * j.ux + e1 * j.uy;
    (lhs - rhs).abs() / rhs.abs().max(1.0)
}

/// Push-forward of `L` and of `u_y + G u_x` through `m`. The lower boundary
/// must stay on `z = 0`; the new oblique coefficient is
/// `G1 = (s_y + G s_x) / (z_y + G z_x)` there.
pub fn push_operator(
    c: &CoefficientSet,
    m: Arc<dyn PlaneMap>,
    profile: Option<&BoundaryProfile>,
) -> Result<TransformedProblem> {
    let image = profile.map(|p| image_profile(m.clone(), p)).transpose()?;
    let field = |k: usize| {
        let (c, m) = (c.clone(), m.clone());
        Field2d::from_fn(format!("{}_{k}", m.tag()), move |s, z| {
            let p = m.inverse([s, z]);
            pushed_at(&c, m.as_ref(), p)[k]
        })
    };
    let (g, mg) = (c.g.clone(), m.clone());
    let g1 = Smooth1d::from_values(format!("G1[{}]", m.tag()), 1e-4, move |s| {
        let p = mg.inverse([s, 0.0]);
        let d = mg.forward_derivs(p);
        let gv = g.value(p[0]);
        let [[sx, sy], [zx, zy]] = d.jac;
        (sy + gv * sx) / (zy + gv * zx)
    });
    let coefficients = CoefficientSet {
        a: field(0),
        b: field(1),
        c: field(2),
        d: field(3),
        e: field(4),
        g: g1,
        lambda: c.lambda / 2.0,
        big_lambda: c.big_lambda,
        gamma: c.gamma,
    };
    Ok(TransformedProblem {
        coefficients,
        profile: image,
        source_profile: profile.cloned(),
        tag: m.tag(),
        map: m,
        original: c.clone(),
    })
}

/// Sample points of the original domain: a uniform column grid plus a
/// geometric cluster towards the left corner.
pub fn domain_samples(profile: &BoundaryProfile, nx: usize, ny: usize) -> Vec<[f64; 2]> {
    let mut xs: Vec<f64> = (1..nx).map(|i| i as f64 / nx as f64).collect();
    xs.extend((1..=24).map(|k| 2f64.powi(-k) / nx as f64 * 4.0));
    xs.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(xs.len() * (ny + 1));
    for x in xs {
        let f = profile.eval(x);
        for j in 0..=ny {
            out.push([x, j as f64 / ny as f64 * f]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformEllipticity {
    pub min_quotient: f64,
    pub witness: [f64; 2],
    pub required: f64,
    pub min_abs_det: f64,
    pub pass: bool,
}

impl TransformedProblem {
    /// Ellipticity of `(A1, B1, C1)` over the image of the original domain,
    /// against `lambda / 2`, and the smallest Jacobian determinant.
    pub fn ellipticity(&self, nx: usize, ny: usize) -> Result<TransformEllipticity> {
        let prof = self.source_profile.as_ref().ok_or_else(|| {
            Error::InvalidArgument("transformed problem carries no source profile".into())
        })?;
        let mut out = TransformEllipticity {
            min_quotient: f64::INFINITY,
            witness: [0.0; 2],
            required: self.original.lambda / 2.0,
            min_abs_det: f64::INFINITY,
            pass: true,
        };
        for p in domain_samples(prof, nx, ny) {
            let [a, b, c, _, _] = pushed_at(&self.original, self.map.as_ref(), p);
            let (mu, _) = min_eigen(a, b, c);
            if mu < out.min_quotient {
                out.min_quotient = mu;
                out.witness = self.map.forward(p);
            }
            out.min_abs_det = out.min_abs_det.min(self.map.forward_derivs(p).det().abs());
        }
        out.pass = out.min_quotient >= out.required * (1.0 - 1e-9);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RWeightedReport {
    pub sup_r_d1: f64,
    pub sup_r_e1: f64,
    pub argmax_d1: [f64; 2],
    pub argmax_e1: [f64; 2],
    /// `C_bar (1 + C_f)^2`
    pub bound: f64,
    pub c_f: f64,
    pub pass: bool,
}

/// `sup r |D1|` and `sup r |E1|` over the image of the domain, `r = |(s, z)|`.
pub fn check_rweighted_bounds(t: &TransformedProblem, c_bar: f64) -> Result<RWeightedReport> {
    let prof = t.source_profile.as_ref().ok_or_else(|| {
        Error::InvalidArgument("transformed problem carries no source profile".into())
    })?;
    let c_f = t
        .profile
        .as_ref()
        .map(|p| p.c_f)
        .unwrap_or(prof.c_f)
        .max(prof.c_f);
    let mut rep = RWeightedReport {
        sup_r_d1: 0.0,
        sup_r_e1: 0.0,
        argmax_d1: [0.0; 2],
        argmax_e1: [0.0; 2],
        bound: c_bar * (1.0 + c_f).powi(2),
        c_f,
        pass: true,
    };
    for p in domain_samples(prof, 512, 16) {
        let q = t.map.forward(p);
        let r = q[0].hypot(q[1]);
        let [_, _, _, d1, e1] = pushed_at(&t.original, t.map.as_ref(), p);
        if r * d1.abs() > rep.sup_r_d1 {
            rep.sup_r_d1 = r * d1.abs();
            rep.argmax_d1 = q;
        }
        if r * e1.abs() > rep.sup_r_e1 {
            rep.sup_r_e1 = r * e1.abs();
            rep.argmax_e1 = q;
        }
    }
    rep.pass = rep.sup_r_d1.is_finite()
        && rep.sup_r_e1.is_finite()
        && rep.sup_r_d1.max(rep.sup_r_e1) <= rep.bound;
    Ok(rep)
}

/// `|z_x|` sup over the domain for P2, against `C_bar (1 + C_f)^2 Pi_bar`.
pub fn p2_slope_bound(m: &P2Straighten, profile: &BoundaryProfile) -> f64 {
    domain_samples(profile, 512, 8)
        .into_iter()
        .map(|p| m.forward_derivs(p).jac[1][0].abs())
        .fold(0.0, f64::max)
}
