use thiserror::Error;

use crate::dsl::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis must be a unit vector, got norm {norm}")]
    NonUnitAxis { norm: f64 },

    #[error("quaternion must have unit norm, got norm {norm}")]
    NonUnitQuaternion { norm: f64 },

    #[error("matrix is not orthogonal (max |QQᵀ - I| = {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("point {point:?} is closer than {step:e} to the domain boundary")]
    StencilOutOfDomain { point: Vec<f64>, step: f64 },

    #[error("chart matrix is singular at {point:?}")]
    SingularChart { point: Vec<f64> },

    #[error("degenerate chart: normalization constant {0:e} is below 1e-12")]
    DegenerateChart(f64),

    #[error("density is not finite at {point:?}")]
    NonFiniteDensity { point: Vec<f64> },

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("chart `{chart}` cannot be used for group {group}")]
    IncompatibleChart { chart: String, group: String },

    #[error("target {target} is outside [F(a), F(b)] = [{lo}, {hi}]")]
    BracketViolation { target: f64, lo: f64, hi: f64 },

    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("finite group is empty")]
    EmptyGroup,

    #[error("element set is not a group: {0}")]
    NotAGroup(String),

    #[error("tensor with {entries} entries exceeds the cap of {cap}")]
    TensorTooLarge { entries: usize, cap: usize },

    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("quadrature under-resolved: {value} is {distance:e} away from the nearest integer")]
    UnderResolved { value: f64, distance: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// True for errors that come from numerical evaluation rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularChart { .. }
                | Error::DegenerateChart(_)
                | Error::NonFiniteDensity { .. }
                | Error::NoConvergence(_)
                | Error::UnderResolved { .. }
                | Error::NotOrthogonal { .. }
        )
    }
}
