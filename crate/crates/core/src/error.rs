use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("profile is not positive at interior sample x = {x} (f = {value})")]
    NonPositiveProfile { x: f64, value: f64 },

    #[error("profile does not vanish at endpoint x = {x} (f = {value})")]
    EndpointViolation { x: f64, value: f64 },

    #[error("invalid profile descriptor: {0}")]
    InvalidDescriptor(String),

    #[error(
        "ellipticity violated at ({x}, {y}) along xi = ({}, {}): quotient {quotient} < lambda {lambda}",
        xi[0],
        xi[1]
    )]
    EllipticityViolation {
        x: f64,
        y: f64,
        xi: [f64; 2],
        quotient: f64,
        lambda: f64,
    },

    #[error("point ({x}, {y}) lies outside the coefficient domain")]
    OutOfDomain { x: f64, y: f64 },

    #[error("map is not invertible: {0}")]
    NonInvertible(String),

    #[error("straightening ratio f1/f = {ratio} at x = {x} leaves [1, 1 + C_f] (C_f = {c_f})")]
    DegenerateRatio { x: f64, ratio: f64, c_f: f64 },

    #[error("mapped coefficient blows up at column x = {x} (1/f = {inv_f})")]
    SingularCoefficient { x: f64, inv_f: f64 },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("L p_x0 = {value} at ({x}, {y}) leaves [-10 Lambda, -lambda] = [{lo}, {hi}]")]
    RangeViolation {
        x: f64,
        y: f64,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("point ({x}, {y}) at angle {theta} is outside the wedge |theta| <= {half_angle}")]
    OutOfWedge {
        x: f64,
        y: f64,
        theta: f64,
        half_angle: f64,
    },

    #[error("coefficient C({x}, 0) = {value} is degenerate")]
    DegenerateC { x: f64, value: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
