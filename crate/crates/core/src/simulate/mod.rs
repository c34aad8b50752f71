//! Monte Carlo study of size and power under correlated Gaussian scores.

mod alternative;
mod method;
mod model;
mod report;
mod runner;

pub use alternative::{sparse_mean, sparse_mean_into, AlternativeSpec, SignRule};
pub use method::{Evaluator, Method, Replicate, TABLE_INTERVALS};
pub use model::{
    correlation_matrix, mvn_scores, pvalues_from_scores, two_sided_p, CorrelationModel, MvnSampler,
};
pub use report::{CellFailure, Estimate, Metric, PowerReport, ResultRow, CSV_HEADER};
pub use runner::{
    default_alphas, default_betas, default_models, empirical_quantile, estimate_cell,
    estimate_raw_power, estimate_size, estimate_size_adjusted_power, grid_run, replication_rng,
    stage_statistics, uniform_null_statistics, CellEstimates, SimulationConfig, Stage,
    DEFAULT_SEED,
};
