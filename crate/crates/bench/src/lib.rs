//! Shared fixtures for the benchmarks.

use thinlab_core::{
    make_profile, BVPSpec, BoundaryProfile, CoefficientSet, ProfileDescriptor, Smooth1d,
};

pub fn sine(sigma: f64) -> BoundaryProfile {
    make_profile(&ProfileDescriptor::sine(sigma)).expect("sine profile")
}

/// Laplace problem with `phi = cos(pi x)`, the shrink-study workload.
pub fn shrink_problem(sigma: f64) -> BVPSpec {
    BVPSpec::new(
        CoefficientSet::laplace(),
        sine(sigma),
        Smooth1d::cosine(1.0, 1.0),
    )
}

/// Variable coefficients with a nonzero oblique coefficient.
pub fn variable_problem(sigma: f64) -> BVPSpec {
    let c = CoefficientSet::variable().with_g(Smooth1d::polynomial(vec![0.2, -0.3, 0.1]));
    BVPSpec::new(c, sine(sigma), Smooth1d::cosine(1.0, 1.0))
}
