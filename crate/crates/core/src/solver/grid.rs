use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundaryProfile;

/// Boundary-fitted grid: nodes `(x_i, eta_j)` with `x_i = i/nx`,
/// `eta_j = j/ny`, physical image `(x_i, eta_j f(x_i))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedGrid {
    pub nx: usize,
    pub ny: usize,
    /// `f, f', f''` at each column
    pub f: Vec<[f64; 3]>,
    /// unknown ordering: `j` fastest when `ny <= nx`
    pub j_fastest: bool,
}

impl FittedGrid {
    pub fn new(profile: &BoundaryProfile, nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid needs nx, ny >= 8 (got {nx} x {ny})"
            )));
        }
        let f = (0..=nx)
            .map(|i| profile.jet(i as f64 / nx as f64))
            .collect();
        Ok(Self {
            nx,
            ny,
            f,
            j_fastest: ny <= nx,
        })
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    #[inline]
    pub fn heta(&self) -> f64 {
        1.0 / self.ny as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.nx as f64
    }

    #[inline]
    pub fn eta(&self, j: usize) -> f64 {
        j as f64 / self.ny as f64
    }

    /// Physical coordinates of node `(i, j)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x(i), self.eta(j) * self.f[i][0])
    }

    pub fn len(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of node `(i, j)` among the unknowns.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.j_fastest {
            i * (self.ny + 1) + j
        } else {
            j * (self.nx + 1) + i
        }
    }

    /// Storage position of `(i, j)` in node arrays (always `j` fastest).
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }

    /// Columns `i = 0` and `i = nx` collapse onto the pinch corners.
    #[inline]
    pub fn is_corner_column(&self, i: usize) -> bool {
        i == 0 || i == self.nx
    }
}
