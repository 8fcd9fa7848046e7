//! Monte Carlo engine for single-copy repeated weak measurements.

mod ensemble;
mod histogram;
mod stream;
mod trajectory;

pub use ensemble::{
    default_histogram, empirical_vs_analytic, pearson_chi_square, run_ensemble, terminal_frequencies, EnsembleConfig,
    EnsembleStats, TerminalFrequencies, DEFAULT_BINS, DEFAULT_HISTOGRAM_WIDTHS,
};
pub use histogram::{total_variation, Histogram};
pub use stream::{master_key, trajectory_stream, TrajectoryRng};
pub use trajectory::{
    run_trajectory, TrajectoryOptions, TrajectoryRecord, DEFAULT_CONVERGENCE_TOL,
};
