//! Monte Carlo layer for continuous-time models: the Cox model and the
//! conditional-CDF model on a time grid, default sampling, projection and
//! martingale tests, and hedging backtests.
//!
//! Every path draws from its own ChaCha8 stream (seed, stream = path index),
//! and per-path results are reduced in path order, so outputs are identical
//! for any rayon thread count.

mod config;
mod default;
mod paths;
mod projection;
mod replication;
mod stats;

pub use config::{Intensity, McConfig, YDriver};
pub use default::{sample_default, DefaultRule, DefaultSample};
pub use paths::{simulate_base_paths, simulate_path, solve_cdf_path, solve_natural_sde, BasePath, CdfPath, PathBundle, PathFlags};
pub use projection::{
    natural_experiment, projection_condition_test, CdfMartingaleRow, NaturalExperiment, ProjectionReport, ProjectionRow,
    STANDARD_ERRORS,
};
pub use replication::{replication_backtest, Claim, ReplicationConfig, ReplicationLevel, ReplicationReport};
pub use stats::{ks_two_sample, martingale_drift_test, mean_and_se, DriftBlock, DriftTestReport, KsResult, KS_CRITICAL_1PCT};
