//! Efficient hinging hyperplanes networks: a piecewise-linear model built from
//! univariate hinges combined by `min` nodes, trained by alternating Lasso
//! weight fits with local structure search, plus NARX system-identification
//! helpers.

// Range checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod bitset;
pub mod data;
pub mod error;
pub mod linalg;
pub mod network;
pub mod sysid;
pub mod trainer;

pub use data::Dataset;
pub use error::{Error, Result};
pub use network::{EhhNetwork, IntermediateNode, Normalizer, SourceNode};
pub use trainer::{train, TrainConfig, TrainState};
