//! Repeating weak measurements on one copy drives it to an eigenstate, and
//! the terminal eigenstate is picked with the Born probabilities.

use weakmeas::trajectories::{run_ensemble, terminal_frequencies, EnsembleConfig, TrajectoryOptions};
use weakmeas::{ApparatusConfig, PureState, Spectrum, WeakMeasurement};

pub struct Termination {
    pub born: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub p_value: f64,
    pub mean_steps: f64,
}

pub fn run_example() -> weakmeas::Result<Termination> {
    let spectrum = Spectrum::new(vec![-1.0, 0.0, 2.0])?;
    let state = PureState::from_probabilities(&[0.5, 0.3, 0.2])?;
    let meas = WeakMeasurement::new(spectrum, ApparatusConfig::new(5.0)?);
    let config = EnsembleConfig::new(3000, TrajectoryOptions::until_converged(100_000, 1e-6), 3);
    let stats = run_ensemble(&meas, &state, &config)?;
    let t = terminal_frequencies(&stats)?;
    Ok(Termination {
        born: state.probabilities(),
        frequencies: t.frequencies.iter().map(|&(_, f)| f).collect(),
        p_value: t.p_value,
        mean_steps: stats.mean_steps(),
    })
}

fn main() -> weakmeas::Result<()> {
    let t = run_example()?;
    for (i, (b, f)) in t.born.iter().zip(&t.frequencies).enumerate() {
        println!("eigenstate {i}: born {b:.3}  terminal {f:.4}");
    }
    println!("chi-square p = {:.3}, mean steps to converge = {:.0}", t.p_value, t.mean_steps);
    Ok(())
}
