//! Numerical laboratory for Schauder estimates of mixed Dirichlet/oblique
//! elliptic problems on thin crescent domains.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotic;
pub mod barrier;
pub mod coefficients;
pub mod error;
pub mod func;
pub mod geometry;
pub mod norms;
pub mod solver;
pub mod spline;
pub mod transforms;

pub use coefficients::{apply_operator, validate_ellipticity, CoefficientSet, CoefficientSpec};
pub use error::{Error, Result};
pub use func::{AnalyticField, Field2d, Jet2, Poly2, Smooth1d, TwiceDifferentiable};
pub use geometry::{
    make_profile, validate_smallness, BoundaryProfile, CrescentDomain, ProfileDescriptor,
    ProfileKind,
};
pub use norms::{holder_norm_1d, weighted_norm_1d, HolderReport, Sampled1d};
pub use solver::{
    discretize, solve, solve_bvp, BVPSpec, DiscreteSolution, FittedGrid, LowerBoundary,
};
