use thiserror::Error;

use crate::network::Violation;
use crate::trainer::LassoSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input dimension {0} is constant over the training data")]
    ConstantDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("at least {needed} samples are required, got {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("full connection needs {required} neurons, above the cap of {cap}")]
    ResourceBound { required: u128, cap: u128 },

    #[error("invalid network: {}", format_violations(.0))]
    InvalidNetwork(Vec<Violation>),

    #[error("dimension {dim} yields only {distinct} distinct offsets (q = {q})")]
    DegenerateQuantiles { dim: usize, distinct: usize, q: usize },

    #[error("could not place intermediate node {node} after {attempts} consecutive rejected draws")]
    GenerationStall { node: usize, attempts: usize },

    #[error(
        "ADMM did not converge in {} iterations (primal {:.3e}, dual {:.3e})",
        .0.iterations, .0.primal_residual, .0.dual_residual
    )]
    NonConvergence(Box<LassoSolution>),

    #[error("model complexity {complexity} saturates the {samples} available samples")]
    Saturated { complexity: f64, samples: usize },

    #[error("no candidate in the regularisation grid produced a usable fit")]
    NoValidLambda,

    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("regressor dimension {spec} does not match model input dimension {model}")]
    SpecMismatch { spec: usize, model: usize },

    #[error("simulation diverged at step {step}: |y| = {value:e} exceeds the guard")]
    NumericOverflow { step: usize, value: f64 },

    #[error("reference signal has zero variance")]
    ZeroVariance,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: column {column} is missing")]
    MissingColumn { line: usize, column: usize },

    #[error("unsupported model document version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
