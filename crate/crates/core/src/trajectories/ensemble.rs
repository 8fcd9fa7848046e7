use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::histogram::{total_variation, Histogram};
use super::stream::trajectory_stream;
use super::trajectory::{run_trajectory, TrajectoryOptions, TrajectoryRecord};
use crate::analytics::{AverageDistribution, BinnedMasses};
use crate::error::{Error, Result};
use crate::qm::{DensityMatrix, PureState, Spectrum, WeakMeasurement};

pub const DEFAULT_BINS: usize = 101;
/// Histogram half-width beyond the extreme eigenvalues, in units of
/// `Δ_p/√(2M)`.
pub const DEFAULT_HISTOGRAM_WIDTHS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub trajectories: u64,
    pub options: TrajectoryOptions,
    pub master_seed: u64,
    pub bins: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(trajectories: u64, options: TrajectoryOptions, master_seed: u64) -> Self {
        Self {
            trajectories,
            options,
            master_seed,
            bins: DEFAULT_BINS,
            threads: None,
        }
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = bins;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// Default `y_M` histogram: uniform bins over
/// `[min s − 4Δ_p/√(2M), max s + 4Δ_p/√(2M)]`.
pub fn default_histogram(spectrum: &Spectrum, delta_p: f64, m: u64, bins: usize) -> Result<Histogram> {
    let pad = DEFAULT_HISTOGRAM_WIDTHS * delta_p / (2.0 * m as f64).sqrt();
    Histogram::uniform(spectrum.min() - pad, spectrum.max() + pad, bins)
}

/// Aggregate of an ensemble run. Records are kept in trajectory-index
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub trajectories: u64,
    pub histogram: Histogram,
    /// Terminal eigenvalue counts, per sorted eigenvalue index.
    pub terminal_counts: Vec<u64>,
    pub unconverged: u64,
    /// Average of `|ψ⟩⟨ψ|` over final states.
    pub mean_density: DensityMatrix,
    /// TV distance of the `y_M` histogram to the analytic law. Only
    /// defined for fixed-`M` runs.
    pub total_variation: Option<f64>,
    pub born_weights: Vec<f64>,
    pub records: Vec<TrajectoryRecord>,
}

impl EnsembleStats {
    /// Grand mean of `y_M`.
    pub fn mean_running_average(&self) -> f64 {
        self.records.iter().map(|r| r.running_average).sum::<f64>() / self.records.len() as f64
    }

    /// Mean of the first outcome of each trajectory. These are i.i.d.
    /// single weak measurements on the initial state.
    pub fn mean_first_outcome(&self) -> f64 {
        self.records.iter().map(|r| r.first_outcome).sum::<f64>() / self.records.len() as f64
    }

    /// Fraction of trajectories that had reached the convergence threshold
    /// by step `m`.
    pub fn converged_fraction_by(&self, m: u64) -> f64 {
        let hits = self
            .records
            .iter()
            .filter(|r| r.converged_at.is_some_and(|k| k <= m))
            .count();
        hits as f64 / self.records.len() as f64
    }

    pub fn converged_fraction(&self) -> f64 {
        1.0 - self.unconverged as f64 / self.trajectories as f64
    }

    /// Mean steps taken.
    pub fn mean_steps(&self) -> f64 {
        self.records.iter().map(|r| r.steps_taken as f64).sum::<f64>() / self.records.len() as f64
    }

    /// Sample mean and standard error of `ρ_ij` over final states.
    pub fn entry_mean_and_stderr(&self, i: usize, j: usize) -> (f64, f64) {
        let xs: Vec<f64> = self
            .records
            .iter()
            .map(|r| {
                let a = r.final_state.amplitudes();
                (a[i] * a[j].conj()).norm()
            })
            .collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (mean, (var / n).sqrt())
    }
}

/// Runs `config.trajectories` independent trajectories. The result is
/// bit-identical for any thread count: each trajectory owns its stream and
/// the reduction runs in index order.
pub fn run_ensemble(
    measurement: &WeakMeasurement,
    initial: &PureState,
    config: &EnsembleConfig,
) -> Result<EnsembleStats> {
    if config.trajectories < 1 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    config.options.validate()?;
    let mut histogram = default_histogram(
        measurement.spectrum(),
        measurement.delta_p(),
        config.options.max_steps,
        config.bins,
    )?;

    let work = || {
        (0..config.trajectories)
            .into_par_iter()
            .map(|k| {
                let mut rng = trajectory_stream(config.master_seed, k);
                run_trajectory(measurement, initial, &config.options, k, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    };
    let records = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let dim = initial.dim();
    let mut terminal_counts = vec![0u64; dim];
    let mut unconverged = 0;
    for r in &records {
        histogram.add(r.running_average);
        match r.terminal_index {
            Some(i) => terminal_counts[i] += 1,
            None => unconverged += 1,
        }
    }
    let finals: Vec<DensityMatrix> = records
        .iter()
        .map(|r| DensityMatrix::from_pure(&r.final_state))
        .collect();
    let mean_density = DensityMatrix::average(&finals).expect("at least one trajectory");

    let total_variation = if config.options.early_stop {
        None
    } else {
        let analytic = AverageDistribution::new(
            measurement.spectrum(),
            initial,
            measurement.apparatus(),
            config.options.max_steps,
            None,
        )?;
        Some(total_variation(&histogram, &analytic.bin_masses(histogram.edges()))?)
    };

    Ok(EnsembleStats {
        trajectories: config.trajectories,
        histogram,
        terminal_counts,
        unconverged,
        mean_density,
        total_variation,
        born_weights: initial.probabilities(),
        records,
    })
}

/// TV distance between the ensemble's `y_M` histogram and reference bin
/// masses computed on the same edges.
pub fn empirical_vs_analytic(stats: &EnsembleStats, analytic: &BinnedMasses) -> Result<f64> {
    total_variation(&stats.histogram, analytic)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalFrequencies {
    /// `(eigenvalue index, frequency)`.
    pub frequencies: Vec<(usize, f64)>,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Terminal-eigenstate frequencies with a Pearson chi-square test against
/// the Born weights of the initial state.
pub fn terminal_frequencies(stats: &EnsembleStats) -> Result<TerminalFrequencies> {
    if stats.unconverged > 0 {
        return Err(Error::Unconverged {
            count: stats.unconverged as usize,
        });
    }
    let n = stats.trajectories as f64;
    let frequencies = stats
        .terminal_counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (i, c as f64 / n))
        .collect();
    let (chi_square, degrees_of_freedom, p_value) =
        pearson_chi_square(&stats.terminal_counts, &stats.born_weights);
    Ok(TerminalFrequencies {
        frequencies,
        chi_square,
        degrees_of_freedom,
        p_value,
    })
}

/// Pearson goodness-of-fit of `counts` against probabilities `weights`.
/// Returns `(χ², degrees of freedom, p-value)`; categories with zero
/// expected count are dropped unless observed.
pub fn pearson_chi_square(counts: &[u64], weights: &[f64]) -> (f64, usize, f64) {
    let n = counts.iter().sum::<u64>() as f64;
    let mut chi_square = 0.0;
    let mut categories = 0usize;
    for (&observed, &w) in counts.iter().zip(weights) {
        let expected = w * n;
        if expected > 0.0 {
            chi_square += (observed as f64 - expected).powi(2) / expected;
            categories += 1;
        } else if observed > 0 {
            chi_square = f64::INFINITY;
        }
    }
    let dof = categories.saturating_sub(1);
    let p_value = if chi_square.is_infinite() {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).expect("positive dof");
        dist.sf(chi_square)
    };
    (chi_square, dof, p_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qm::ApparatusConfig;

    fn reference() -> (WeakMeasurement, PureState) {
        (
            WeakMeasurement::new(
                Spectrum::new(vec![1.0, -1.0]).unwrap(),
                ApparatusConfig::new(10.0).unwrap(),
            ),
            PureState::from_probabilities(&[0.2, 0.8]).unwrap(),
        )
    }

    #[test]
    fn single_trajectory_ensemble_matches_run_trajectory() {
        let (m, s) = reference();
        let opts = TrajectoryOptions::until_converged(10_000, 1e-6);
        let stats = run_ensemble(&m, &s, &EnsembleConfig::new(1, opts, 77)).unwrap();
        let mut rng = trajectory_stream(77, 0);
        let rec = run_trajectory(&m, &s, &opts, 0, &mut rng).unwrap();
        assert_eq!(stats.records[0], rec);
        assert_eq!(stats.mean_density, DensityMatrix::from_pure(&rec.final_state));
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let (m, s) = reference();
        let cfg = EnsembleConfig::new(64, TrajectoryOptions::fixed_steps(200), 5);
        let serial = run_ensemble(&m, &s, &cfg.clone().with_threads(1)).unwrap();
        let parallel = run_ensemble(&m, &s, &cfg.with_threads(4)).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn eigenstate_ensemble_frequencies() {
        let (m, _) = reference();
        let e = PureState::eigenstate(2, 1);
        let cfg = EnsembleConfig::new(100, TrajectoryOptions::until_converged(10, 1e-6), 1);
        let stats = run_ensemble(&m, &e, &cfg).unwrap();
        let tf = terminal_frequencies(&stats).unwrap();
        assert_eq!(tf.frequencies, vec![(0, 0.0), (1, 1.0)]);
        assert_eq!(tf.chi_square, 0.0);
    }

    #[test]
    fn unconverged_trajectories_block_frequencies() {
        let (m, s) = reference();
        let cfg = EnsembleConfig::new(10, TrajectoryOptions::until_converged(2, 1e-6), 1);
        let stats = run_ensemble(&m, &s, &cfg).unwrap();
        assert_eq!(stats.unconverged, 10);
        assert_eq!(
            terminal_frequencies(&stats),
            Err(Error::Unconverged { count: 10 })
        );
    }

    #[test]
    fn born_rule_termination_frequencies() {
        let (m, s) = reference();
        let r = 2000;
        let cfg = EnsembleConfig::new(r, TrajectoryOptions::until_converged(100_000, 1e-6), 2024);
        let stats = run_ensemble(&m, &s, &cfg).unwrap();
        let tf = terminal_frequencies(&stats).unwrap();
        // sorted index 1 is s = +1
        let f = tf.frequencies[1].1;
        assert!((f - 0.8).abs() < 3.0 * (0.16f64 / r as f64).sqrt(), "freq {f}");
        assert!(tf.p_value > 0.001);

        let sym = PureState::from_probabilities(&[0.5, 0.5]).unwrap();
        let stats = run_ensemble(&m, &sym, &cfg).unwrap();
        let f = terminal_frequencies(&stats).unwrap().frequencies[0].1;
        assert!((f - 0.5).abs() < 3.0 * (0.25f64 / r as f64).sqrt(), "freq {f}");
    }

    #[test]
    fn ensemble_invariants() {
        let (m, s) = reference();
        let cfg = EnsembleConfig::new(500, TrajectoryOptions::until_converged(20_000, 1e-6), 8);
        let stats = run_ensemble(&m, &s, &cfg).unwrap();
        assert_eq!(stats.terminal_counts.iter().sum::<u64>() + stats.unconverged, 500);
        assert_eq!(stats.histogram.total(), 500);
        assert!(stats.mean_density.validate().is_ok());

        let fractions: Vec<f64> = [1, 10, 100, 1000, 10_000, 20_000]
            .iter()
            .map(|&k| stats.converged_fraction_by(k))
            .collect();
        assert!(fractions.windows(2).all(|w| w[1] >= w[0]));

        let mut rng = trajectory_stream(99, 0);
        for r in stats.records.iter().filter(|r| r.converged()) {
            assert!(r.terminal_fidelity >= 1.0 - 1e-6);
            // one more step moves the Born weights by less than 10·tol
            let p = m.sample_outcome(&r.final_state, &mut rng);
            let next = m.collapse(&r.final_state, p);
            let shift = next
                .probabilities()
                .iter()
                .zip(r.final_state.probabilities())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(shift < 10.0 * 1e-6, "shift {shift}");
        }

        // first outcomes are independent single-step draws
        let sigma = (50.64f64 / 500.0).sqrt();
        assert!((stats.mean_first_outcome() - 0.6).abs() < 3.0 * sigma);
    }
}
