//! Training: random initial structure, Lasso weights with GCV-selected
//! penalty, and single-column structure moves, alternated until the cost
//! settles.

mod config;
pub mod gcv;
mod generate;
mod lambda;
mod lasso;
mod quantile;
mod state;
mod structure;
mod train;

pub use config::{AdmmSettings, NeighbourhoodMode, TrainConfig};
pub use gcv::{gcv, gcv_from_parts, GcvScore};
pub use generate::{generate_initial, generate_structure};
pub use lambda::{lambda_for, select_lambda, GridPoint, LambdaSelection};
pub use lasso::{lasso_admm, LassoProblem, LassoSolution};
pub use quantile::quantile_offsets;
pub use state::{CycleRecord, TrainState};
pub use structure::{structure_step_column, structure_step_element, StepReport};
pub use train::{cost, train, train_with_observer, Trainer};
