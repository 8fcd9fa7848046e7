//! Subcommand bodies. Each returns the text to print on stdout.

use std::path::Path;

use serde_json::{json, Value};

use super::config::{ExperimentConfig, OutputFormat};
use super::format::{csv, json_num, json_nums, num, pretty_json};
use super::CliError;
use crate::analytics::{self, AverageDistribution};
use crate::numerics::{geomspace, linspace};
use crate::qm::WeakMeasurement;
use crate::trajectories::{
    run_ensemble, run_trajectory, trajectory_stream, EnsembleConfig, EnsembleStats,
};

/// Quadrature nodes for the POVM completeness check.
pub const DEFAULT_POVM_POINTS: usize = 4096;
/// Default `f` values for the saturation table.
pub const DEFAULT_SATURATION_GRID: [f64; 13] =
    [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 5.0];

fn format_of(cfg: &ExperimentConfig, default: OutputFormat) -> OutputFormat {
    cfg.format.unwrap_or(default)
}

/// One trajectory on stream 0 of the master seed.
///
/// CSV columns: `steps,running_average,terminal_index,terminal_eigenvalue,
/// terminal_fidelity,final_probabilities` (the last joined with `;`).
pub fn trajectory(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let (meas, state) = cfg.measurement()?;
    let opts = cfg.trajectory_options()?;
    let mut rng = trajectory_stream(cfg.seed(), 0);
    let rec = run_trajectory(&meas, &state, &opts, 0, &mut rng)?;
    let probs = rec.final_state.probabilities();
    let eig = rec.terminal_index.map(|i| meas.spectrum().eigenvalues()[i]);
    Ok(match format_of(cfg, OutputFormat::Json) {
        OutputFormat::Json => pretty_json(&json!({
            "config": cfg.resolved_json(),
            "steps": rec.steps_taken,
            "running_average": json_num(rec.running_average),
            "sum": json_num(rec.sum),
            "converged": rec.converged(),
            "converged_at": rec.converged_at,
            "terminal_index": rec.terminal_index,
            "terminal_eigenvalue": eig.map(json_num),
            "terminal_fidelity": json_num(rec.terminal_fidelity),
            "final_probabilities": json_nums(&probs),
        })),
        OutputFormat::Csv => csv(
            &[
                "steps",
                "running_average",
                "terminal_index",
                "terminal_eigenvalue",
                "terminal_fidelity",
                "final_probabilities",
            ],
            [vec![
                rec.steps_taken.to_string(),
                num(rec.running_average),
                rec.terminal_index.map(|i| i.to_string()).unwrap_or_default(),
                eig.map(num).unwrap_or_default(),
                num(rec.terminal_fidelity),
                probs.iter().map(|&p| num(p)).collect::<Vec<_>>().join(";"),
            ]],
        ),
    })
}

pub fn run_configured_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleStats, CliError> {
    let (meas, state) = cfg.measurement()?;
    let mut ens = EnsembleConfig::new(cfg.trajectories()?, cfg.trajectory_options()?, cfg.seed())
        .with_bins(cfg.bins()?);
    if let Some(t) = cfg.threads.filter(|&t| t > 0) {
        ens = ens.with_threads(t);
    }
    Ok(run_ensemble(&meas, &state, &ens)?)
}

/// Histogram CSV of `y_M`: `bin_lower,bin_upper,count,empirical_mass,
/// analytic_mass`. The analytic column is empty unless `M` is fixed.
pub fn ensemble_csv(cfg: &ExperimentConfig, stats: &EnsembleStats) -> Result<String, CliError> {
    let analytic = analytic_masses(cfg, stats)?;
    let h = &stats.histogram;
    let masses = h.masses();
    let rows = (0..h.bins()).map(|k| {
        vec![
            num(h.edges()[k]),
            num(h.edges()[k + 1]),
            h.counts()[k].to_string(),
            num(masses[k]),
            analytic.as_ref().map(|a| num(a[k])).unwrap_or_default(),
        ]
    });
    Ok(csv(
        &["bin_lower", "bin_upper", "count", "empirical_mass", "analytic_mass"],
        rows.collect::<Vec<_>>(),
    ))
}

fn analytic_masses(cfg: &ExperimentConfig, stats: &EnsembleStats) -> Result<Option<Vec<f64>>, CliError> {
    let Some(m) = cfg.steps else { return Ok(None) };
    let (meas, state) = cfg.measurement()?;
    let law = AverageDistribution::new(meas.spectrum(), &state, meas.apparatus(), m, None)?;
    Ok(Some(law.bin_masses(stats.histogram.edges()).masses))
}

pub fn ensemble_summary(cfg: &ExperimentConfig, stats: &EnsembleStats) -> Result<Value, CliError> {
    let (meas, state) = cfg.measurement()?;
    let rho = &stats.mean_density;
    let d = rho.dim();
    let matrix = |f: fn(num_complex::Complex64) -> f64| {
        Value::Array(
            (0..d)
                .map(|i| json_nums(&(0..d).map(|j| f(rho.get(i, j))).collect::<Vec<_>>()))
                .collect(),
        )
    };
    let mut v = json!({
        "config": cfg.resolved_json(),
        "trajectories": stats.trajectories,
        "mean_running_average": json_num(stats.mean_running_average()),
        "ensemble_mean": json_num(analytics::ensemble_mean(meas.spectrum(), &state)),
        "mean_first_outcome": json_num(stats.mean_first_outcome()),
        "mean_steps": json_num(stats.mean_steps()),
        "terminal_counts": stats.terminal_counts,
        "unconverged": stats.unconverged,
        "total_variation": stats.total_variation.map(json_num),
        "mean_density_re": matrix(|z| z.re),
        "mean_density_im": matrix(|z| z.im),
        "histogram": {
            "edges": json_nums(stats.histogram.edges()),
            "counts": stats.histogram.counts(),
            "below": stats.histogram.below(),
            "above": stats.histogram.above(),
        },
    });
    if let Some(m) = cfg.steps {
        let expected = analytics::expected_reduced_density_after(meas.spectrum(), &state, meas.apparatus(), m);
        v["expected_density_re"] = Value::Array(
            (0..d)
                .map(|i| json_nums(&(0..d).map(|j| expected.get(i, j).re).collect::<Vec<_>>()))
                .collect(),
        );
    }
    Ok(v)
}

/// Runs the ensemble. Prints the histogram CSV (or the JSON summary with
/// `format = json`); `summary` additionally writes the JSON summary there.
pub fn ensemble(cfg: &ExperimentConfig, summary: Option<&Path>) -> Result<String, CliError> {
    let stats = run_configured_ensemble(cfg)?;
    let summary_json = ensemble_summary(cfg, &stats)?;
    if let Some(path) = summary {
        std::fs::write(path, pretty_json(&summary_json))?;
    }
    match format_of(cfg, OutputFormat::Csv) {
        OutputFormat::Csv => ensemble_csv(cfg, &stats),
        OutputFormat::Json => Ok(pretty_json(&summary_json)),
    }
}

/// Analytic density of `y_M`: CSV `y,density`.
pub fn ydist(cfg: &ExperimentConfig, points: Option<usize>) -> Result<String, CliError> {
    let (meas, state) = cfg.measurement()?;
    let m = cfg.required_steps()?;
    let grid = match points {
        Some(n) if n < 2 => return Err(CliError::Validation("need at least 2 grid points".into())),
        Some(n) => {
            let pad = analytics::DEFAULT_GRID_WIDTHS * meas.apparatus().statistical_error(m);
            Some(linspace(
                meas.spectrum().min() - pad,
                meas.spectrum().max() + pad,
                n,
            ))
        }
        None => None,
    };
    let law = AverageDistribution::new(meas.spectrum(), &state, meas.apparatus(), m, grid)?;
    Ok(match format_of(cfg, OutputFormat::Csv) {
        OutputFormat::Csv => csv(
            &["y", "density"],
            law.grid()
                .iter()
                .zip(law.densities())
                .map(|(&y, &p)| vec![num(y), num(p)])
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Json => pretty_json(&json!({
            "config": cfg.resolved_json(),
            "M": m,
            "component_std": json_num(law.component_std()),
            "y": json_nums(law.grid()),
            "density": json_nums(law.densities()),
        })),
    })
}

/// Disturbance curve on a geometric `ε` grid: CSV `epsilon,disturbance`,
/// closed by a row with `epsilon = 0` holding the `ε → 0` limit.
pub fn disturbance(
    cfg: &ExperimentConfig,
    eps_min: f64,
    eps_max: f64,
    points: usize,
) -> Result<String, CliError> {
    if !(eps_min > 0.0 && eps_max >= eps_min && points >= 1) {
        return Err(CliError::Validation(format!(
            "need 0 < eps-min <= eps-max and points >= 1 (got {eps_min}, {eps_max}, {points})"
        )));
    }
    let (spectrum, state) = cfg.system()?;
    let eps = if points == 1 { vec![eps_min] } else { geomspace(eps_min, eps_max, points) };
    let curve = analytics::disturbance_curve(&spectrum, &state, &eps)?;
    let limit = analytics::disturbance_limit(&state);
    Ok(match format_of(cfg, OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut rows: Vec<Vec<String>> = curve
                .iter()
                .map(|p| vec![num(p.epsilon), num(p.disturbance)])
                .collect();
            rows.push(vec![num(0.0), num(limit)]);
            csv(&["epsilon", "disturbance"], rows)
        }
        OutputFormat::Json => pretty_json(&json!({
            "config": cfg.resolved_json(),
            "epsilon": json_nums(&eps),
            "disturbance": json_nums(&curve.iter().map(|p| p.disturbance).collect::<Vec<_>>()),
            "limit": json_num(limit),
        })),
    })
}

/// Saturation ratio table: CSV `f,saturation_ratio`.
pub fn saturation(fs: &[f64], format: OutputFormat) -> Result<String, CliError> {
    let values = fs
        .iter()
        .map(|&f| analytics::saturation_ratio(f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match format {
        OutputFormat::Csv => csv(
            &["f", "saturation_ratio"],
            fs.iter()
                .zip(&values)
                .map(|(&f, &r)| vec![num(f), num(r)])
                .collect::<Vec<_>>(),
        ),
        OutputFormat::Json => pretty_json(&json!({
            "f": json_nums(fs),
            "saturation_ratio": json_nums(&values),
        })),
    })
}

/// POVM completeness residual: CSV `points,lower,upper,residual`.
pub fn povm_check(cfg: &ExperimentConfig, points: usize) -> Result<String, CliError> {
    if points < 2 {
        return Err(CliError::Validation("need at least 2 quadrature points".into()));
    }
    // only the spectrum matters here; no state is required
    let spectrum = cfg.spectrum()?;
    let meas = WeakMeasurement::new(spectrum, cfg.apparatus()?);
    let residual = meas.povm_completeness_residual(points);
    let pad = 10.0 * meas.delta_p();
    let (lo, hi) = (meas.spectrum().min() - pad, meas.spectrum().max() + pad);
    Ok(match format_of(cfg, OutputFormat::Csv) {
        OutputFormat::Csv => csv(
            &["points", "lower", "upper", "residual"],
            [vec![points.to_string(), num(lo), num(hi), num(residual)]],
        ),
        OutputFormat::Json => pretty_json(&json!({
            "config": cfg.resolved_json(),
            "points": points,
            "lower": json_num(lo),
            "upper": json_num(hi),
            "residual": json_num(residual),
        })),
    })
}

/// Weak repetitions needed to match `strong_repetitions` strong ones:
/// CSV `delta_p,delta_s,strong_repetitions,weak_repetitions`. `ΔS` defaults
/// to the spread of the configured state.
pub fn resources(
    cfg: &ExperimentConfig,
    delta_s: Option<f64>,
    strong_repetitions: f64,
) -> Result<String, CliError> {
    let delta_p = cfg
        .delta_p
        .ok_or_else(|| CliError::Validation("missing `delta_p`".into()))?;
    let delta_s = match delta_s {
        Some(v) => v,
        None => {
            let (spectrum, state) = cfg.system()?;
            analytics::observable_variance(&spectrum, &state).sqrt()
        }
    };
    let mw = analytics::required_weak_repetitions(delta_p, delta_s, strong_repetitions)?;
    Ok(match format_of(cfg, OutputFormat::Csv) {
        OutputFormat::Csv => csv(
            &["delta_p", "delta_s", "strong_repetitions", "weak_repetitions"],
            [vec![num(delta_p), num(delta_s), num(strong_repetitions), num(mw)]],
        ),
        OutputFormat::Json => pretty_json(&json!({
            "delta_p": json_num(delta_p),
            "delta_s": json_num(delta_s),
            "strong_repetitions": json_num(strong_repetitions),
            "weak_repetitions": json_num(mw),
        })),
    })
}
