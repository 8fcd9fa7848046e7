//! The distribution of the trajectory average `y_M` stays a mixture of
//! peaks at the eigenvalues, weighted by the Born probabilities, however
//! large `M` gets. Compares a simulated ensemble with the analytic law.

use weakmeas::analytics::AverageDistribution;
use weakmeas::trajectories::{run_ensemble, EnsembleConfig, TrajectoryOptions};
use weakmeas::{ApparatusConfig, PureState, Spectrum, WeakMeasurement};

pub struct Comparison {
    pub m: u64,
    pub total_variation: f64,
    pub upper_lobe: f64,
    pub analytic_upper_lobe: f64,
    pub grand_mean: f64,
}

pub fn run_example() -> weakmeas::Result<Vec<Comparison>> {
    let spectrum = Spectrum::new(vec![-1.0, 1.0])?;
    let state = PureState::from_probabilities(&[0.2, 0.8])?;
    let app = ApparatusConfig::new(10.0)?;
    let meas = WeakMeasurement::new(spectrum.clone(), app);

    let mut out = Vec::new();
    for m in [10, 100, 1000] {
        let config = EnsembleConfig::new(4000, TrajectoryOptions::fixed_steps(m), 7).with_bins(41);
        let stats = run_ensemble(&meas, &state, &config)?;
        let law = AverageDistribution::new(&spectrum, &state, &app, m, None)?;
        let h = &stats.histogram;
        out.push(Comparison {
            m,
            total_variation: stats.total_variation.unwrap_or(f64::NAN),
            upper_lobe: h.mass_near(0.0, f64::INFINITY) + h.above() as f64 / h.total() as f64,
            analytic_upper_lobe: law.mass_between(0.0, f64::INFINITY),
            grand_mean: stats.mean_running_average(),
        });
    }
    Ok(out)
}

fn main() -> weakmeas::Result<()> {
    println!("{:>6} {:>8} {:>12} {:>12} {:>10}", "M", "TV", "P(y>0)", "analytic", "mean y_M");
    for c in run_example()? {
        println!(
            "{:>6} {:>8.4} {:>12.4} {:>12.4} {:>10.4}",
            c.m, c.total_variation, c.upper_lobe, c.analytic_upper_lobe, c.grand_mean
        );
    }
    Ok(())
}
