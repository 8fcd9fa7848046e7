//! Experiment configuration.
//!
//! A config file is TOML with the keys below; every key can also be given as
//! a command-line flag, and flags win.
//!
//! ```toml
//! spectrum = [1.0, -1.0]            # distinct eigenvalues, any order
//! probabilities = [0.8, 0.2]        # |alpha_i|^2, zero phases ...
//! # amplitudes = [[0.894427190999916, 0.0], [0.447213595499958, 0.0]]  # ... or [re, im] pairs
//! delta_p = 10.0
//! steps = 1000                      # fixed M (no early stopping)
//! # max_steps = 100000              # cap for runs that stop at convergence
//! trajectories = 10000
//! master_seed = 42                  # falls back to $SEED, then 0
//! convergence_tol = 1e-6
//! bins = 101
//! threads = 4
//! format = "csv"                    # or "json"
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::format::{json_num, json_nums};
use super::CliError;
use crate::qm::{ApparatusConfig, PureState, Spectrum, WeakMeasurement};
use crate::trajectories::{TrajectoryOptions, DEFAULT_BINS, DEFAULT_CONVERGENCE_TOL};

/// Input amplitudes must be normalized to this tolerance; they are then
/// rescaled to unit norm exactly.
pub const INPUT_NORM_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_STEPS: u64 = 100_000;
pub const DEFAULT_TRAJECTORIES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Raw, possibly partial configuration as read from a file or flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spectrum: Option<Vec<f64>>,
    pub amplitudes: Option<Vec<[f64; 2]>>,
    pub probabilities: Option<Vec<f64>>,
    pub delta_p: Option<f64>,
    pub steps: Option<u64>,
    pub max_steps: Option<u64>,
    pub trajectories: Option<u64>,
    pub master_seed: Option<u64>,
    pub convergence_tol: Option<f64>,
    pub bins: Option<usize>,
    pub threads: Option<usize>,
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Fills every unset field of `self` from `base`.
    pub fn or(self, base: ExperimentConfig) -> Self {
        Self {
            spectrum: self.spectrum.or(base.spectrum),
            amplitudes: self.amplitudes.or(base.amplitudes),
            probabilities: self.probabilities.or(base.probabilities),
            delta_p: self.delta_p.or(base.delta_p),
            steps: self.steps.or(base.steps),
            max_steps: self.max_steps.or(base.max_steps),
            trajectories: self.trajectories.or(base.trajectories),
            master_seed: self.master_seed.or(base.master_seed),
            convergence_tol: self.convergence_tol.or(base.convergence_tol),
            bins: self.bins.or(base.bins),
            threads: self.threads.or(base.threads),
            format: self.format.or(base.format),
        }
    }

    pub fn spectrum(&self) -> Result<Spectrum, CliError> {
        self.sorted_spectrum().map(|(s, _)| s)
    }

    fn sorted_spectrum(&self) -> Result<(Spectrum, Vec<usize>), CliError> {
        let raw = self
            .spectrum
            .clone()
            .ok_or_else(|| CliError::Validation("missing `spectrum`".into()))?;
        Spectrum::with_permutation(raw).map_err(CliError::from)
    }

    /// Sorted spectrum and the matching state, in sorted order.
    pub fn system(&self) -> Result<(Spectrum, PureState), CliError> {
        let (spectrum, order) = self.sorted_spectrum()?;
        let amps: Vec<Complex64> = match (&self.amplitudes, &self.probabilities) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "give either `amplitudes` or `probabilities`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Validation(
                    "missing state: set `amplitudes` or `probabilities`".into(),
                ))
            }
            (Some(a), None) => a.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
            (None, Some(p)) => {
                if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                    return Err(CliError::Validation(format!(
                        "probabilities must be finite and >= 0, got {bad}"
                    )));
                }
                p.iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect()
            }
        };
        if amps.len() != spectrum.dim() {
            return Err(CliError::Validation(format!(
                "state has {} amplitudes but the spectrum has {} eigenvalues",
                amps.len(),
                spectrum.dim()
            )));
        }
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(CliError::Validation("amplitudes must be finite".into()));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > INPUT_NORM_TOL {
            return Err(CliError::Validation(format!(
                "state is not normalized: sum of |amplitude|^2 = {norm_sq} \
                 (must equal 1 within {INPUT_NORM_TOL:e})"
            )));
        }
        let sorted: Vec<Complex64> = order.iter().map(|&k| amps[k]).collect();
        let state = PureState::normalized(sorted).map_err(CliError::from)?;
        Ok((spectrum, state))
    }

    pub fn apparatus(&self) -> Result<ApparatusConfig, CliError> {
        let dp = self
            .delta_p
            .ok_or_else(|| CliError::Validation("missing `delta_p`".into()))?;
        ApparatusConfig::new(dp).map_err(CliError::from)
    }

    pub fn measurement(&self) -> Result<(WeakMeasurement, PureState), CliError> {
        let (spectrum, state) = self.system()?;
        Ok((WeakMeasurement::new(spectrum, self.apparatus()?), state))
    }

    /// Fixed `M` when `steps` is set, otherwise run-to-convergence with a
    /// `max_steps` cap.
    pub fn trajectory_options(&self) -> Result<TrajectoryOptions, CliError> {
        let tol = self.convergence_tol.unwrap_or(DEFAULT_CONVERGENCE_TOL);
        let opts = match self.steps {
            Some(m) => TrajectoryOptions::fixed_steps(m).with_tolerance(tol),
            None => TrajectoryOptions::until_converged(self.max_steps.unwrap_or(DEFAULT_MAX_STEPS), tol),
        };
        opts.validate().map_err(CliError::from)?;
        Ok(opts)
    }

    pub fn required_steps(&self) -> Result<u64, CliError> {
        match self.steps {
            Some(0) => Err(CliError::Validation("`steps` must be >= 1".into())),
            Some(m) => Ok(m),
            None => Err(CliError::Validation("missing `steps` (the number of repetitions M)".into())),
        }
    }

    pub fn seed(&self) -> u64 {
        self.master_seed.unwrap_or(0)
    }

    pub fn trajectories(&self) -> Result<u64, CliError> {
        match self.trajectories.unwrap_or(DEFAULT_TRAJECTORIES) {
            0 => Err(CliError::Validation("`trajectories` must be >= 1".into())),
            r => Ok(r),
        }
    }

    pub fn bins(&self) -> Result<usize, CliError> {
        match self.bins.unwrap_or(DEFAULT_BINS) {
            0 => Err(CliError::Validation("`bins` must be >= 1".into())),
            b => Ok(b),
        }
    }

    /// The configuration as JSON, with the state shown in sorted eigenvalue
    /// order and defaults filled in where they were used.
    pub fn resolved_json(&self) -> Value {
        let mut v = json!({});
        if let Ok((spectrum, state)) = self.system() {
            v["spectrum"] = json_nums(spectrum.eigenvalues());
            v["amplitudes"] = Value::Array(
                state
                    .amplitudes()
                    .iter()
                    .map(|a| Value::Array(vec![json_num(a.re), json_num(a.im)]))
                    .collect(),
            );
        }
        if let Some(dp) = self.delta_p {
            v["delta_p"] = json_num(dp);
        }
        match self.steps {
            Some(m) => v["steps"] = json!(m),
            None => v["max_steps"] = json!(self.max_steps.unwrap_or(DEFAULT_MAX_STEPS)),
        }
        v["trajectories"] = json!(self.trajectories.unwrap_or(DEFAULT_TRAJECTORIES));
        v["master_seed"] = json!(self.seed());
        v["convergence_tol"] = json_num(self.convergence_tol.unwrap_or(DEFAULT_CONVERGENCE_TOL));
        v["bins"] = json!(self.bins.unwrap_or(DEFAULT_BINS));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_and_sorts_state_with_spectrum() {
        let cfg = ExperimentConfig::from_toml_str(
            "spectrum = [1.0, -1.0]\nprobabilities = [0.8, 0.2]\ndelta_p = 10.0\nsteps = 5\n",
        )
        .unwrap();
        let (spec, state) = cfg.system().unwrap();
        assert_eq!(spec.eigenvalues(), &[-1.0, 1.0]);
        assert!((state.probabilities()[1] - 0.8).abs() < 1e-15);
        assert_eq!(cfg.required_steps().unwrap(), 5);
        assert!(!cfg.trajectory_options().unwrap().early_stop);
    }

    #[test]
    fn complex_amplitudes() {
        let cfg = ExperimentConfig::from_toml_str(
            "spectrum = [0.0, 1.0]\namplitudes = [[0.6, 0.0], [0.0, 0.8]]\n",
        )
        .unwrap();
        let (_, state) = cfg.system().unwrap();
        assert_eq!(state.amplitudes()[1], Complex64::new(0.0, 0.8));
    }

    #[test]
    fn validation_messages() {
        let empty = ExperimentConfig::default();
        assert!(matches!(empty.system(), Err(CliError::Validation(m)) if m.contains("spectrum")));

        let degenerate = ExperimentConfig {
            spectrum: Some(vec![1.0, 1.0]),
            probabilities: Some(vec![0.5, 0.5]),
            ..Default::default()
        };
        let msg = degenerate.system().unwrap_err().to_string();
        assert!(msg.contains("non-degenerate"), "{msg}");

        let unnormalized = ExperimentConfig {
            spectrum: Some(vec![1.0, -1.0]),
            probabilities: Some(vec![0.5, 0.6]),
            ..Default::default()
        };
        assert!(unnormalized.system().unwrap_err().to_string().contains("normalized"));

        let both = ExperimentConfig {
            spectrum: Some(vec![1.0, -1.0]),
            probabilities: Some(vec![0.5, 0.5]),
            amplitudes: Some(vec![[1.0, 0.0], [0.0, 0.0]]),
            ..Default::default()
        };
        assert!(both.system().is_err());

        assert!(ExperimentConfig::from_toml_str("nonsense = 3").is_err());
        assert!(ExperimentConfig { delta_p: Some(-1.0), ..Default::default() }.apparatus().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ExperimentConfig {
            delta_p: Some(1.0),
            bins: Some(11),
            ..Default::default()
        };
        let flags = ExperimentConfig {
            delta_p: Some(2.0),
            ..Default::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.delta_p, Some(2.0));
        assert_eq!(merged.bins, Some(11));
    }
}
