use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// [`Error::DataViolation`] and [`Error::InvariantViolation`] mean a proven
/// inequality failed numerically, which points at a bug rather than bad
/// input. Everything else is a rejected input or regime.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole: |1 ± c·z| = {denominator:e} at z = {z}")]
    Pole { z: Complex64, denominator: f64 },

    #[error("parameter order violated: need 0 < d < c < 1, got c = {c:e}, d = {d:e}")]
    ParameterOrder { c: f64, d: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {z} is outside the domain {domain}")]
    OutOfDomain { z: Complex64, domain: &'static str },

    #[error("c or d underflows in f64 (log c = {log_c}, log d = {log_d}); surface arithmetic is unavailable")]
    Underflow { log_c: f64, log_d: f64 },

    #[error("sampling starved: accepted {accepted} of {attempts} draws")]
    SamplingStarvation { accepted: usize, attempts: usize },

    #[error("corona data violated: max(|F1|,|F2|) = {value} < {bound} at (z1, z2) = ({z1}, {z2})")]
    DataViolation {
        value: f64,
        bound: f64,
        z1: Complex64,
        z2: Complex64,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("quadrature did not converge at {nodes} nodes: last values {previous} and {last}")]
    NonConvergence {
        nodes: usize,
        previous: Complex64,
        last: Complex64,
    },

    #[error("continuation needed more than {max_steps} steps near {z}")]
    StepUnderflow { max_steps: usize, z: Complex64 },

    #[error("path leaves {domain} or comes within the hole margin at {z}")]
    PathOutsideDomain { z: Complex64, domain: &'static str },

    #[error("rank deficient: {what} has rank {rank}, need {needed}")]
    RankDeficient {
        what: &'static str,
        rank: usize,
        needed: usize,
    },
}
