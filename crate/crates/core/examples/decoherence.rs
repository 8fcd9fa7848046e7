//! Coherences of the ensemble-averaged state decay as
//! `exp(−M (s_i − s_j)²/(4Δ_p²))` while the populations stay put.

use weakmeas::analytics::expected_reduced_density_after;
use weakmeas::trajectories::{run_ensemble, EnsembleConfig, TrajectoryOptions};
use weakmeas::{ApparatusConfig, PureState, Spectrum, WeakMeasurement};

/// `(M, simulated |ρ_12|, standard error, analytic |ρ_12|)`.
pub fn run_example() -> weakmeas::Result<Vec<(u64, f64, f64, f64)>> {
    let spectrum = Spectrum::new(vec![-1.0, 1.0])?;
    let state = PureState::from_probabilities(&[0.2, 0.8])?;
    let app = ApparatusConfig::new(10.0)?;
    let meas = WeakMeasurement::new(spectrum.clone(), app);

    let mut rows = Vec::new();
    for m in [1, 10, 50, 100, 200] {
        let config = EnsembleConfig::new(3000, TrajectoryOptions::fixed_steps(m), 11);
        let stats = run_ensemble(&meas, &state, &config)?;
        let (_, se) = stats.entry_mean_and_stderr(0, 1);
        let simulated = stats.mean_density.get(0, 1).norm();
        let analytic = expected_reduced_density_after(&spectrum, &state, &app, m).get(0, 1).norm();
        rows.push((m, simulated, se, analytic));
    }
    Ok(rows)
}

fn main() -> weakmeas::Result<()> {
    println!("{:>5} {:>12} {:>10} {:>12}", "M", "|rho_12|", "s.e.", "analytic");
    for (m, sim, se, exact) in run_example()? {
        println!("{m:>5} {sim:>12.5} {se:>10.5} {exact:>12.5}");
    }
    Ok(())
}
