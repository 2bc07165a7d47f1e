//! Experiment harness: turbo loop, BER sweeps, EXIT charts, correlation
//! trajectories and their CSV files.

pub mod config;
pub mod exit;
mod parallel;
pub mod report;
pub mod rho;
pub mod seeds;
pub mod selftest;
pub mod sweep;
pub mod turbo;

pub use config::{EqualizerKind, ExperimentConfig, FilterLengths, Variant};
pub use exit::{
    decoder_exit_curve, equalizer_exit_curve, generate_apriori_for_exit, j_function, j_inverse,
    measure_mi, run_exit_chart, ExitChart, ExitCurve, ExitPoint, ExitRole,
};
pub use parallel::with_threads;
pub use rho::{rho_reference, RhoReference};
pub use selftest::{run_selftest, SelftestCase};
pub use sweep::{run_ber_sweep, run_point, run_rho_trajectory, BerPoint, PointTally};
pub use turbo::{run_turbo_block, BlockResult, IterationStats, Transmission, TurboRunner};
