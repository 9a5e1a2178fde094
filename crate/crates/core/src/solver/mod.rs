//! Finite differences for the mixed problem
//!
//! ```text
//! L u = F in Omega,   u = phi on y = f(x),   u_y + G u_x = psi on y = 0
//! ```
//!
//! on the mapped rectangle `xi = x`, `eta = y / f(x)`.

mod grid;
pub mod linalg;
mod solution;

use serde::{Deserialize, Serialize};

pub use grid::FittedGrid;
pub use solution::{local_schauder_check, DiscreteSolution, SchauderReport, SolutionHeader};

use crate::coefficients::{apply_at, validate_ellipticity, CoefficientSet};
use crate::error::{Error, Result};
use crate::func::{AnalyticField, Field2d, Smooth1d, TwiceDifferentiable};
use crate::geometry::BoundaryProfile;
use linalg::{bicgstab, norm2, BandLu, Csr};

/// Condition on the flat boundary `y = 0`.
#[derive(Debug, Clone)]
pub enum LowerBoundary {
    /// `u_y + G u_x = psi` with `G` taken from the coefficient set
    Oblique { psi: Smooth1d },
    /// `u = g`; only used as a negative control
    Dirichlet { g: Smooth1d },
}

#[derive(Debug, Clone)]
pub struct BVPSpec {
    pub coefficients: CoefficientSet,
    pub profile: BoundaryProfile,
    pub phi: Smooth1d,
    pub lower: LowerBoundary,
    pub source: Field2d,
}

impl BVPSpec {
    /// Homogeneous problem: `F = 0`, `psi = 0`.
    pub fn new(coefficients: CoefficientSet, profile: BoundaryProfile, phi: Smooth1d) -> Self {
        Self {
            coefficients,
            profile,
            phi,
            lower: LowerBoundary::Oblique {
                psi: Smooth1d::zero(),
            },
            source: Field2d::zero(),
        }
    }

    pub fn with_psi(mut self, psi: Smooth1d) -> Self {
        self.lower = LowerBoundary::Oblique { psi };
        self
    }

    pub fn with_lower_dirichlet(mut self, g: Smooth1d) -> Self {
        self.lower = LowerBoundary::Dirichlet { g };
        self
    }

    pub fn with_source(mut self, source: Field2d) -> Self {
        self.source = source;
        self
    }

    /// Data for which `u` is the exact solution: `phi(x) = u(x, f(x))`,
    /// `psi = u_y + G u_x` on `y = 0`, and `F = L u`.
    pub fn manufactured(
        coefficients: CoefficientSet,
        profile: BoundaryProfile,
        u: &AnalyticField,
    ) -> Self {
        let (uu, prof) = (u.clone(), profile.clone());
        let phi = Smooth1d::from_jet(format!("trace of {}", u.label()), move |x| {
            let [f, fp, fpp] = prof.jet(x);
            let j = uu.jet(x, f);
            [
                j.u,
                j.ux + fp * j.uy,
                j.uxx + 2.0 * fp * j.uxy + fp * fp * j.uyy + fpp * j.uy,
            ]
        });
        let (uu, g) = (u.clone(), coefficients.g.clone());
        let psi = Smooth1d::from_values(format!("oblique data of {}", u.label()), 1e-4, move |x| {
            let j = uu.jet(x, 0.0);
            j.uy + g.value(x) * j.ux
        });
        let (uu, cc) = (u.clone(), coefficients.clone());
        let source = Field2d::from_fn(format!("L {}", u.label()), move |x, y| {
            apply_at(&cc, &uu, x, y)
        });
        Self {
            coefficients,
            profile,
            phi,
            lower: LowerBoundary::Oblique { psi },
            source,
        }
    }
}

/// Assembled scheme in unknown ordering.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub grid: FittedGrid,
    pub matrix: Csr,
    pub rhs: Vec<f64>,
    pub sigma: f64,
}

/// Assembles the nine-point scheme. The mixed derivative uses the 4-corner
/// average; interior rows are scaled by `h_eta^2`, oblique rows by `h_eta`.
pub fn discretize(spec: &BVPSpec, grid: &FittedGrid) -> Result<LinearSystem> {
    let c = &spec.coefficients;
    validate_ellipticity(c, 16)?;
    let (nx, ny) = (grid.nx, grid.ny);
    for i in 1..nx {
        let inv_f = 1.0 / grid.f[i][0];
        if !(inv_f.abs() <= 1e14) {
            return Err(Error::SingularCoefficient {
                x: grid.x(i),
                inv_f,
            });
        }
    }
    let (hx, he) = (grid.hx(), grid.heta());
    let n = grid.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = vec![0.0; n];
    let (phi0, phi1) = (spec.phi.value(0.0), spec.phi.value(1.0));
    for i in 0..=nx {
        let x = grid.x(i);
        let [f, fp, fpp] = grid.f[i];
        for j in 0..=ny {
            let row = grid.index(i, j);
            let id = |ii: usize, jj: usize| grid.index(ii, jj);
            if grid.is_corner_column(i) {
                rows[row].push((row, 1.0));
                rhs[row] = if i == 0 { phi0 } else { phi1 };
            } else if j == ny {
                rows[row].push((row, 1.0));
                rhs[row] = spec.phi.value(x);
            } else if j == 0 {
                match &spec.lower {
                    LowerBoundary::Dirichlet { g } => {
                        rows[row].push((row, 1.0));
                        rhs[row] = g.value(x);
                    }
                    LowerBoundary::Oblique { psi } => {
                        // (-3U0 + 4U1 - U2)/(2 h_eta) + f G (U_{i+1} - U_{i-1})/(2 hx) = f psi, times h_eta
                        let t = f * c.g.value(x) * he / (2.0 * hx);
                        rows[row].extend([
                            (id(i, 0), -1.5),
                            (id(i, 1), 2.0),
                            (id(i, 2), -0.5),
                            (id(i + 1, 0), t),
                            (id(i - 1, 0), -t),
                        ]);
                        rhs[row] = he * f * psi.value(x);
                    }
                }
            } else {
                let eta = grid.eta(j);
                let y = eta * f;
                let [ca, cb, ccc, cd, ce] = c.at(x, y);
                let a = ca * f * f;
                let b = -2.0 * ca * eta * fp * f + cb * f;
                let cc = ca * eta * eta * fp * fp - cb * eta * fp + ccc;
                let d = cd * f * f;
                let e =
                    -ca * eta * (fpp * f - 2.0 * fp * fp) - cb * fp - cd * eta * fp * f + ce * f;
                let s = he * he;
                let ax = s * a / (hx * hx);
                let dx = s * d / (2.0 * hx);
                let ce_ = cc;
                let ee = s * e / (2.0 * he);
                let bq = s * b / (4.0 * hx * he);
                rows[row].extend([
                    (id(i, j), -2.0 * ax - 2.0 * ce_),
                    (id(i + 1, j), ax + dx),
                    (id(i - 1, j), ax - dx),
                    (id(i, j + 1), ce_ + ee),
                    (id(i, j - 1), ce_ - ee),
                    (id(i + 1, j + 1), bq),
                    (id(i - 1, j - 1), bq),
                    (id(i + 1, j - 1), -bq),
                    (id(i - 1, j + 1), -bq),
                ]);
                rhs[row] = s * f * f * spec.source.eval(x, y);
            }
        }
    }
    Ok(LinearSystem {
        grid: grid.clone(),
        matrix: Csr::from_rows(rows),
        rhs,
        sigma: spec.profile.sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Auto,
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// target `|r| <= tol |b|`
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::Auto,
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

/// Banded elimination when `bandwidth * size <= 2e8`, otherwise BiCGSTAB with ILU(0).
pub fn solve(sys: &LinearSystem) -> Result<DiscreteSolution> {
    solve_with(sys, &SolveOptions::default())
}

pub fn solve_with(sys: &LinearSystem, opts: &SolveOptions) -> Result<DiscreteSolution> {
    let a = &sys.matrix;
    let b = &sys.rhs;
    let bnorm = norm2(b);
    let method = match opts.method {
        SolveMethod::Auto => {
            let (kl, ku) = a.bandwidths();
            if ((kl + ku + 1) * a.n) as f64 <= 2e8 {
                SolveMethod::Direct
            } else {
                SolveMethod::Iterative
            }
        }
        m => m,
    };
    let (x, iterations) = match method {
        SolveMethod::Direct => {
            let lu = BandLu::factor(a)?;
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            let mut steps = 0;
            // iterative refinement
            loop {
                let mut r = a.residual(&x, b);
                if norm2(&r) <= opts.tol * bnorm || steps == 3 {
                    break;
                }
                lu.solve_in_place(&mut r);
                for (xi, ri) in x.iter_mut().zip(&r) {
                    *xi += ri;
                }
                steps += 1;
            }
            (x, steps)
        }
        _ => bicgstab(a, b, &vec![0.0; a.n], opts.tol, opts.max_iter)?,
    };
    let res = norm2(&a.residual(&x, b));
    let rel = if bnorm > 0.0 { res / bnorm } else { res };
    if !(rel <= opts.tol) {
        return Err(Error::NoConvergence {
            iterations,
            residual: rel,
        });
    }
    let g = &sys.grid;
    let mut values = vec![0.0; g.len()];
    for i in 0..=g.nx {
        for j in 0..=g.ny {
            values[g.node(i, j)] = x[g.index(i, j)];
        }
    }
    let mut sol = DiscreteSolution::from_values(g.clone(), values);
    sol.residual = rel;
    sol.method = method;
    sol.iterations = iterations;
    sol.sigma = sys.sigma;
    Ok(sol)
}

/// `discretize` followed by `solve`.
pub fn solve_bvp(spec: &BVPSpec, nx: usize, ny: usize) -> Result<DiscreteSolution> {
    let grid = FittedGrid::new(&spec.profile, nx, ny)?;
    solve(&discretize(spec, &grid)?)
}
