use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{BVPSpec, FittedGrid, SolveMethod};
use crate::func::{Jet2, TwiceDifferentiable};
use crate::norms::{self, fd_d1, fd_d2, FieldSample, HolderReport, Sampled1d};

/// Grid function on a fitted grid with physical derivative accessors.
///
/// Mapped derivatives `U_xi, U_eta, U_xixi, U_xieta, U_etaeta` use second
/// order differences (one-sided at `eta = 0, 1`) and are converted with
///
/// ```text
/// u_x  = U_xi + eta_x U_eta                   eta_x  = -eta f'/f
/// u_y  = eta_y U_eta                          eta_y  = 1/f
/// u_xx = U_xixi + 2 eta_x U_xieta + eta_x^2 U_etaeta + eta_xx U_eta
/// u_xy = eta_y U_xieta + eta_x eta_y U_etaeta + eta_xy U_eta
/// u_yy = eta_y^2 U_etaeta
/// ```
///
/// The corner columns carry no derivatives.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    grid: FittedGrid,
    values: Vec<f64>,
    mapped: Vec<Option<[f64; 5]>>,
    pub residual: f64,
    pub method: SolveMethod,
    pub iterations: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHeader {
    pub nx: usize,
    pub ny: usize,
    pub sigma: f64,
    pub residual: f64,
    pub method: SolveMethod,
    pub iterations: usize,
    pub min: f64,
    pub max: f64,
}

impl DiscreteSolution {
    /// Wraps node values (stored `j` fastest, see [`FittedGrid::node`]).
    pub fn from_values(grid: FittedGrid, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            grid.len(),
            "value array does not match the grid"
        );
        let mapped = mapped_derivatives(&grid, &values);
        Self {
            grid,
            values,
            mapped,
            residual: 0.0,
            method: SolveMethod::Direct,
            iterations: 0,
            sigma: f64::NAN,
        }
    }

    /// Samples a field at the physical nodes.
    pub fn from_field(grid: FittedGrid, u: &dyn TwiceDifferentiable) -> Self {
        let mut values = vec![0.0; grid.len()];
        for i in 0..=grid.nx {
            for j in 0..=grid.ny {
                let (x, y) = grid.point(i, j);
                values[grid.node(i, j)] = u.value(x, y);
            }
        }
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &FittedGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node(i, j)]
    }

    /// `(U_xi, U_eta, U_xixi, U_xieta, U_etaeta)` at a node off the corner columns.
    pub fn mapped_derivatives(&self, i: usize, j: usize) -> Option<[f64; 5]> {
        self.mapped[self.grid.node(i, j)]
    }

    /// Physical value and derivatives at node `(i, j)`.
    pub fn jet(&self, i: usize, j: usize) -> Option<Jet2> {
        let [u1, u2, u11, u12, u22] = self.mapped_derivatives(i, j)?;
        let [f, fp, fpp] = self.grid.f[i];
        let eta = self.grid.eta(j);
        let ex = -eta * fp / f;
        let ey = 1.0 / f;
        let exx = -eta * (fpp / f - 2.0 * fp * fp / (f * f));
        let exy = -fp / (f * f);
        Some(Jet2 {
            u: self.value(i, j),
            ux: u1 + ex * u2,
            uy: ey * u2,
            uxx: u11 + 2.0 * ex * u12 + ex * ex * u22 + exx * u2,
            uxy: ey * u12 + ex * ey * u22 + exy * u2,
            uyy: ey * ey * u22,
        })
    }

    pub fn u_x(&self, i: usize, j: usize) -> Option<f64> {
        self.jet(i, j).map(|d| d.ux)
    }

    pub fn u_y(&self, i: usize, j: usize) -> Option<f64> {
        self.jet(i, j).map(|d| d.uy)
    }

    pub fn u_xx(&self, i: usize, j: usize) -> Option<f64> {
        self.jet(i, j).map(|d| d.uxx)
    }

    pub fn u_xy(&self, i: usize, j: usize) -> Option<f64> {
        self.jet(i, j).map(|d| d.uxy)
    }

    pub fn u_yy(&self, i: usize, j: usize) -> Option<f64> {
        self.jet(i, j).map(|d| d.uyy)
    }

    /// All nodes as norm samples.
    pub fn samples(&self) -> Vec<FieldSample> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(g.len());
        for i in 0..=g.nx {
            for j in 0..=g.ny {
                let (x, y) = g.point(i, j);
                let d = self.jet(i, j);
                out.push(FieldSample {
                    x,
                    y,
                    u: self.value(i, j),
                    grad: d.map(|d| d.gradient()),
                    hess: d.map(|d| d.hessian()),
                });
            }
        }
        out
    }

    /// Pointwise difference `self - other` on the same grid.
    pub fn minus(&self, other: &DiscreteSolution) -> DiscreteSolution {
        assert_eq!(self.grid, other.grid, "grids differ");
        let v = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        DiscreteSolution::from_values(self.grid.clone(), v)
    }

    pub fn header(&self) -> SolutionHeader {
        SolutionHeader {
            nx: self.grid.nx,
            ny: self.grid.ny,
            sigma: self.sigma,
            residual: self.residual,
            method: self.method,
            iterations: self.iterations,
            min: self.values.iter().copied().fold(f64::INFINITY, f64::min),
            max: self
                .values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// CSV dump with columns `i, j, x, y, u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i,j,x,y,u")?;
        let g = &self.grid;
        for i in 0..=g.nx {
            for j in 0..=g.ny {
                let (x, y) = g.point(i, j);
                writeln!(w, "{i},{j},{x:e},{y:e},{:e}", self.value(i, j))?;
            }
        }
        Ok(())
    }
}

fn mapped_derivatives(g: &FittedGrid, values: &[f64]) -> Vec<Option<[f64; 5]>> {
    let (nx, ny) = (g.nx, g.ny);
    let (hx, he) = (g.hx(), g.heta());
    let mut out = vec![None; g.len()];
    let col = |i: usize| &values[g.node(i, 0)..=g.node(i, ny)];
    for i in 1..nx {
        let (l, c, r) = (col(i - 1), col(i), col(i + 1));
        let u1: Vec<f64> = (0..=ny).map(|j| (r[j] - l[j]) / (2.0 * hx)).collect();
        let u11: Vec<f64> = (0..=ny)
            .map(|j| (r[j] - 2.0 * c[j] + l[j]) / (hx * hx))
            .collect();
        let u2 = fd_d1(c, he);
        let u22 = fd_d2(c, he);
        let u12 = fd_d1(&u1, he);
        for j in 0..=ny {
            out[g.node(i, j)] = Some([u1[j], u2[j], u11[j], u12[j], u22[j]]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchauderReport {
    /// `C^{2,gamma}` norm of `u` over `x <= 2/3`
    pub norm_left: HolderReport,
    pub norm_global: HolderReport,
    pub norm_phi: HolderReport,
    pub ratio_left: f64,
    pub ratio_global: f64,
}

/// Samples of `phi` used for its `C^{2,gamma}` norm.
pub const PHI_NORM_SAMPLES: usize = 1024;

/// Empirical Schauder constant `|u|_{C^{2,gamma}} / |phi|_{C^{2,gamma}}`.
pub fn local_schauder_check(u: &DiscreteSolution, spec: &BVPSpec) -> SchauderReport {
    let gamma = spec.coefficients.gamma;
    let s = u.samples();
    let h = u.grid().hx();
    let norm_left = norms::holder_norm_field(&s, 2, gamma, 0.0, (0.0, 2.0 / 3.0), h);
    let norm_global = norms::holder_norm_field(&s, 2, gamma, 0.0, (0.0, 1.0), h);
    let norm_phi = norms::holder_norm_1d(
        &Sampled1d::from_smooth(&spec.phi, PHI_NORM_SAMPLES, 0.0, 1.0),
        2,
        gamma,
    );
    let p = norm_phi.value;
    SchauderReport {
        ratio_left: norm_left.value / p,
        ratio_global: norm_global.value / p,
        norm_left,
        norm_global,
        norm_phi,
    }
}
