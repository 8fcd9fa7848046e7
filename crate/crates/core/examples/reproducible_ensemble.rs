//! Ensemble output depends only on the master seed, never on the number of
//! worker threads.

use weakmeas::trajectories::{run_ensemble, EnsembleConfig, TrajectoryOptions};
use weakmeas::{ApparatusConfig, PureState, Spectrum, WeakMeasurement};

/// Returns whether 1-thread and 4-thread runs agree bit for bit, and
/// whether a different seed changes the result.
pub fn run_example() -> weakmeas::Result<(bool, bool)> {
    let spectrum = Spectrum::new(vec![-1.0, 1.0])?;
    let state = PureState::from_probabilities(&[0.5, 0.5])?;
    let meas = WeakMeasurement::new(spectrum, ApparatusConfig::new(3.0)?);
    let config = |seed, threads| {
        EnsembleConfig::new(400, TrajectoryOptions::fixed_steps(250), seed).with_threads(threads)
    };
    let serial = run_ensemble(&meas, &state, &config(99, 1))?;
    let parallel = run_ensemble(&meas, &state, &config(99, 4))?;
    let other = run_ensemble(&meas, &state, &config(100, 4))?;
    Ok((serial == parallel, serial != other))
}

fn main() -> weakmeas::Result<()> {
    let (same, differs) = run_example()?;
    println!("1 thread vs 4 threads identical: {same}");
    println!("different seed gives a different ensemble: {differs}");
    Ok(())
}
