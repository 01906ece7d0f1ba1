//! NARX modelling on input/output records: regressors, one-step prediction,
//! free-run simulation and the metrics used to score them.

mod csv_io;
mod metrics;
mod narendra_li;
mod narx;

pub use csv_io::{load_csv, read_csv, write_csv, write_csv_to, CsvColumns};
pub use metrics::{rmse, vaf, Metrics, Rmse};
pub use narendra_li::{
    narendra_li_generate, narendra_li_generate_with, narendra_li_response, narendra_li_test_input, NarendraLiOptions,
};
pub use narx::{
    build_regressors, evaluate_free_run, predict_one_step, simulate_free_run, IoData, NarxModel, NarxSpec, SimResult,
    DEFAULT_OVERFLOW_GUARD,
};
