//! The limit state on the collapsed segment `[0, 1] x {0}` and its distance
//! to computed solutions.
//!
//! Setting `f = 0` in the boundary relations leaves a triangular system for
//! `(u, u_x, u_y, u_xx, u_xy, u_yy)` at each `x`:
//!
//! ```text
//! u* = phi,  u*_x = phi',  u*_xx = phi'',
//! u*_y = -G phi',  u*_xy = -G phi'' - G' phi',
//! u*_yy = -(A u*_xx + B u*_xy + D u*_x + E u*_y) / C      (coefficients at (x, 0))
//! ```

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::func::Smooth1d;
use crate::norms::{holder_norm_1d, Sampled1d};
use crate::solver::{BVPSpec, DiscreteSolution, LowerBoundary};
use crate::spline::CubicSpline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticState {
    pub x: Vec<f64>,
    pub ustar: Vec<f64>,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub uxx: Vec<f64>,
    pub uxy: Vec<f64>,
    pub uyy: Vec<f64>,
    pub gamma: f64,
    /// `|phi|_{C^{2,gamma}}` on 1024 samples
    pub phi_norm: f64,
    /// labels of `A..E`, `G` and `phi`
    pub provenance: Vec<String>,
}

/// Closed-form state at one abscissa.
pub fn asymptotic_node(
    c: &CoefficientSet,
    g: &Smooth1d,
    phi: &Smooth1d,
    x: f64,
) -> Result<[f64; 6]> {
    let [p, p1, p2] = phi.jet(x);
    let [gv, g1, _] = g.jet(x);
    let [a, b, cc, d, e] = c.at(x, 0.0);
    if cc.abs() < 1e-12 {
        return Err(Error::DegenerateC { x, value: cc });
    }
    let uy = -gv * p1;
    let uxy = -gv * p2 - g1 * p1;
    let uyy = -(a * p2 + b * uxy + d * p1 + e * uy) / cc;
    Ok([p, p1, uy, p2, uxy, uyy])
}

/// Solves the limit system on `grid`, with `G` as the oblique coefficient.
pub fn solve_asymptotic(
    c: &CoefficientSet,
    g: &Smooth1d,
    phi: &Smooth1d,
    grid: &[f64],
) -> Result<AsymptoticState> {
    let n = grid.len();
    let mut s = AsymptoticState {
        x: grid.to_vec(),
        ustar: Vec::with_capacity(n),
        ux: Vec::with_capacity(n),
        uy: Vec::with_capacity(n),
        uxx: Vec::with_capacity(n),
        uxy: Vec::with_capacity(n),
        uyy: Vec::with_capacity(n),
        gamma: c.gamma,
        phi_norm: holder_norm_1d(&Sampled1d::from_smooth(phi, 1024, 0.0, 1.0), 2, c.gamma).value,
        provenance: c.labels()[..5]
            .iter()
            .cloned()
            .chain([g.label().to_string(), phi.label().to_string()])
            .collect(),
    };
    for &x in grid {
        let v = asymptotic_node(c, g, phi, x)?;
        s.ustar.push(v[0]);
        s.ux.push(v[1]);
        s.uy.push(v[2]);
        s.uxx.push(v[3]);
        s.uxy.push(v[4]);
        s.uyy.push(v[5]);
    }
    Ok(s)
}

impl AsymptoticState {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn node(&self, i: usize) -> [f64; 6] {
        [
            self.ustar[i],
            self.ux[i],
            self.uy[i],
            self.uxx[i],
            self.uxy[i],
            self.uyy[i],
        ]
    }

    /// Worst residuals of `l0*`, `L0*` and `L*` at the nodes.
    pub fn identity_residuals(&self, c: &CoefficientSet, g: &Smooth1d) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for i in 0..self.len() {
            let x = self.x[i];
            let [_, ux, uy, uxx, uxy, uyy] = self.node(i);
            let [gv, g1, _] = g.jet(x);
            let [a, b, cc, d, e] = c.at(x, 0.0);
            out[0] = out[0].max((uy + gv * ux).abs());
            out[1] = out[1].max((uxy + gv * uxx + g1 * ux).abs());
            out[2] = out[2].max((a * uxx + b * uxy + cc * uyy + d * ux + e * uy).abs());
        }
        out
    }

    /// CSV with columns `x, ustar, ux, uy, uxx, uxy, uyy`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,ustar,ux,uy,uxx,uxy,uyy")?;
        for i in 0..self.len() {
            let v = self.node(i);
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                self.x[i], v[0], v[1], v[2], v[3], v[4], v[5]
            )?;
        }
        Ok(())
    }

    /// The state on the columns of `x`, resampled by natural cubic splines
    /// when the abscissae differ. The flag reports a resample.
    fn on_columns(&self, x: &[f64]) -> Result<(Vec<[f64; 6]>, bool)> {
        let same =
            self.x.len() == x.len() && self.x.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-14);
        if same {
            return Ok(((0..self.len()).map(|i| self.node(i)).collect(), false));
        }
        let (lo, hi) = (self.x[0], self.x[self.len() - 1]);
        if self.len() < 4 || x.iter().any(|&t| t < lo - 1e-12 || t > hi + 1e-12) {
            return Err(Error::GridMismatch(format!(
                "asymptotic grid [{lo}, {hi}] with {} nodes cannot cover the solution columns",
                self.len()
            )));
        }
        let arrays = [
            &self.ustar,
            &self.ux,
            &self.uy,
            &self.uxx,
            &self.uxy,
            &self.uyy,
        ];
        let splines: Vec<CubicSpline> = arrays
            .iter()
            .map(|a| CubicSpline::natural(self.x.clone(), a.to_vec()))
            .collect::<Result<_>>()?;
        let vals = x
            .iter()
            .map(|&t| {
                let mut v = [0.0; 6];
                for (k, s) in splines.iter().enumerate() {
                    v[k] = s.jet(t)[0];
                }
                v
            })
            .collect();
        Ok((vals, true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// `sup |grad^i u(x, y) - grad^i u*(x, 0)|` for `i = 0, 1, 2`
    pub sup: [f64; 3],
    pub argmax: [[f64; 2]; 3],
    /// `sup / (sigma^gamma |phi|_{C^{2,gamma}})`
    pub normalized: [f64; 3],
    pub sigma: f64,
    pub resampled: bool,
}

/// Distance between a computed solution and the limit state, over all nodes
/// (derivatives over the columns that carry them).
pub fn deviation(u: &DiscreteSolution, a: &AsymptoticState) -> Result<DeviationReport> {
    let g = u.grid();
    let xs: Vec<f64> = (0..=g.nx).map(|i| g.x(i)).collect();
    let (cols, resampled) = a.on_columns(&xs)?;
    let mut rep = DeviationReport {
        sup: [0.0; 3],
        argmax: [[0.0; 2]; 3],
        normalized: [0.0; 3],
        sigma: u.sigma,
        resampled,
    };
    let mut take = |k: usize, v: f64, p: (f64, f64)| {
        if v > rep.sup[k] {
            rep.sup[k] = v;
            rep.argmax[k] = [p.0, p.1];
        }
    };
    for i in 0..=g.nx {
        let s = cols[i];
        for j in 0..=g.ny {
            let p = g.point(i, j);
            take(0, (u.value(i, j) - s[0]).abs(), p);
            if let Some(d) = u.jet(i, j) {
                take(1, (d.ux - s[1]).abs().max((d.uy - s[2]).abs()), p);
                let e2 = (d.uxx - s[3])
                    .abs()
                    .max((d.uxy - s[4]).abs())
                    .max((d.uyy - s[5]).abs());
                take(2, e2, p);
            }
        }
    }
    let scale = u.sigma.powf(a.gamma) * a.phi_norm;
    for k in 0..3 {
        rep.normalized[k] = rep.sup[k] / scale;
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeListReport {
    /// `sup |u - phi|` on the upper boundary
    pub value: f64,
    /// `sup |u_x + f' u_y - phi'|` on the upper boundary
    pub lf: f64,
    /// `sup |u_y + G u_x - psi|` on the flat boundary
    pub l0: Option<f64>,
    /// `sup |u_xx + 2 f' u_xy + f'^2 u_yy + f'' u_y - phi''|` on the upper boundary
    pub big_lf: f64,
    /// `sup |L u - F|` at interior nodes
    pub big_l: f64,
    /// `sup |u_xy + G u_xx + G' u_x - psi'|` on the flat boundary
    pub big_l0: Option<f64>,
}

impl DerivativeListReport {
    pub fn max(&self) -> f64 {
        [
            self.value,
            self.lf,
            self.l0.unwrap_or(0.0),
            self.big_lf,
            self.big_l,
            self.big_l0.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Residuals of the six boundary and interior relations on a computed
/// solution. The flat-boundary relations are skipped for a Dirichlet bottom.
pub fn derivative_list_residuals(u: &DiscreteSolution, spec: &BVPSpec) -> DerivativeListReport {
    let g = u.grid();
    let c = &spec.coefficients;
    let psi = match &spec.lower {
        LowerBoundary::Oblique { psi } => Some(psi),
        LowerBoundary::Dirichlet { .. } => None,
    };
    let mut r = DerivativeListReport {
        value: 0.0,
        lf: 0.0,
        l0: psi.map(|_| 0.0),
        big_lf: 0.0,
        big_l: 0.0,
        big_l0: psi.map(|_| 0.0),
    };
    for i in 0..=g.nx {
        let x = g.x(i);
        let [_, fp, fpp] = g.f[i];
        let [p, p1, p2] = spec.phi.jet(x);
        r.value = r.value.max((u.value(i, g.ny) - p).abs());
        let Some(top) = u.jet(i, g.ny) else { continue };
        r.lf = r.lf.max((top.ux + fp * top.uy - p1).abs());
        r.big_lf = r
            .big_lf
            .max((top.uxx + 2.0 * fp * top.uxy + fp * fp * top.uyy + fpp * top.uy - p2).abs());
        if let Some(psi) = psi {
            let b = u
                .jet(i, 0)
                .expect("bottom jet exists off the corner columns");
            let [gv, g1, _] = c.g.jet(x);
            let [s0, s1, _] = psi.jet(x);
            r.l0 = r.l0.map(|v| v.max((b.uy + gv * b.ux - s0).abs()));
            r.big_l0 = r
                .big_l0
                .map(|v| v.max((b.uxy + gv * b.uxx + g1 * b.ux - s1).abs()));
        }
        for j in 1..g.ny {
            let (x, y) = g.point(i, j);
            let d = u.jet(i, j).expect("interior jet");
            let [a, b, cc, dd, e] = c.at(x, y);
            let lu = a * d.uxx + b * d.uxy + cc * d.uyy + dd * d.ux + e * d.uy;
            r.big_l = r.big_l.max((lu - spec.source.eval(x, y)).abs());
        }
    }
    r
}
