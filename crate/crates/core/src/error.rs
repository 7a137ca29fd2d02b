use alloc::string::String;

use num_complex::Complex64;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KmrError {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("transport stalled at parameter {at} (step {step:e}); reroute the path")]
    Transport { at: f64, step: f64 },
    #[error("path passes within {distance:e} of a pole of z at u = {pole}; route via waypoints")]
    NearPole { pole: Complex64, distance: f64 },
    #[error("path passes within {distance:e} of the end {end} (exclusion radius {radius:e})")]
    NearEnd {
        end: &'static str,
        distance: f64,
        radius: f64,
    },
    #[error("evaluation at a Scherk end (u = {0})")]
    SingularPoint(Complex64),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("strip S({h}, {a}) is infeasible: a^2 + h^2 = {} must exceed 1/4", h * h + a * a)]
    Infeasible { h: f64, a: f64 },
    #[error(
        "no convergence after {iterations} iterations: best (theta, alpha) = ({theta}, {alpha}), residual {residual:e}"
    )]
    NoConvergence {
        theta: f64,
        alpha: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("x3 = {value} outside the open slab |x3| < {limit}")]
    Range { value: f64, limit: f64 },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, KmrError>;
