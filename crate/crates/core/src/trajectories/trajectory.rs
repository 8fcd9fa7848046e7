use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qm::{OutcomeSequence, PureState, WeakMeasurement};

/// Convergence threshold on `1 − max_i |α_i|²`.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryOptions {
    pub max_steps: u64,
    pub convergence_tol: f64,
    /// Stop as soon as the state is within `convergence_tol` of an
    /// eigenstate. Off for fixed-`M` statistics.
    pub early_stop: bool,
    /// Keep every outcome, not just the sufficient statistics.
    pub retain_outcomes: bool,
}

impl TrajectoryOptions {
    /// Run until convergence or `max_steps`.
    pub fn until_converged(max_steps: u64, convergence_tol: f64) -> Self {
        Self {
            max_steps,
            convergence_tol,
            early_stop: true,
            retain_outcomes: false,
        }
    }

    /// Exactly `m` steps, whatever the state does.
    pub fn fixed_steps(m: u64) -> Self {
        Self {
            max_steps: m,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            early_stop: false,
            retain_outcomes: false,
        }
    }

    pub fn with_tolerance(mut self, convergence_tol: f64) -> Self {
        self.convergence_tol = convergence_tol;
        self
    }

    pub fn retaining_outcomes(mut self) -> Self {
        self.retain_outcomes = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::InvalidArgument("max_steps must be >= 1".into()));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "convergence_tol must lie in (0, 1), got {}",
                self.convergence_tol
            )));
        }
        Ok(())
    }
}

/// One single-copy realization of repeated weak measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed_id: u64,
    pub steps_taken: u64,
    /// `y_M = T/M`.
    pub running_average: f64,
    pub final_state: PureState,
    /// Set iff `terminal_fidelity ≥ 1 − convergence_tol`.
    pub terminal_index: Option<usize>,
    /// `max_i |α_i|²` of the final state.
    pub terminal_fidelity: f64,
    /// `(M, T)`.
    pub count: u64,
    pub sum: f64,
    pub first_outcome: f64,
    /// First step at which the convergence threshold was reached.
    pub converged_at: Option<u64>,
    pub outcomes: Option<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn converged(&self) -> bool {
        self.terminal_index.is_some()
    }
}

/// Runs the measure / collapse / reset loop on a single copy.
///
/// The current state is always rebuilt from the initial state and the
/// sufficient statistics, so no rounding accumulates along the walk.
pub fn run_trajectory<R: Rng + ?Sized>(
    measurement: &WeakMeasurement,
    initial: &PureState,
    options: &TrajectoryOptions,
    seed_id: u64,
    rng: &mut R,
) -> Result<TrajectoryRecord> {
    options.validate()?;
    if initial.dim() != measurement.spectrum().dim() {
        return Err(Error::DimensionMismatch {
            expected: measurement.spectrum().dim(),
            found: initial.dim(),
        });
    }
    let threshold = 1.0 - options.convergence_tol;
    let mut seq = if options.retain_outcomes {
        OutcomeSequence::new()
    } else {
        OutcomeSequence::stats_only()
    };
    let mut current = initial.clone();
    let mut first_outcome = f64::NAN;
    let mut converged_at = None;

    for step in 1..=options.max_steps {
        let p = measurement.sample_outcome(&current, rng);
        if step == 1 {
            first_outcome = p;
        }
        seq.push(p);
        current = measurement.state_after_stats(initial, seq.count(), seq.sum());
        if converged_at.is_none() && current.max_probability().1 >= threshold {
            converged_at = Some(step);
            if options.early_stop {
                break;
            }
        }
    }

    let (index, fidelity) = current.max_probability();
    Ok(TrajectoryRecord {
        seed_id,
        steps_taken: seq.count(),
        running_average: seq.mean().unwrap_or(f64::NAN),
        final_state: current,
        terminal_index: (fidelity >= threshold).then_some(index),
        terminal_fidelity: fidelity,
        count: seq.count(),
        sum: seq.sum(),
        first_outcome,
        converged_at,
        outcomes: seq.outcomes().map(<[f64]>::to_vec),
    })
}
