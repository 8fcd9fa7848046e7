//! One single-copy trajectory, printed step by step: the Born weights
//! random-walk until one of them reaches 1.

use weakmeas::trajectories::trajectory_stream;
use weakmeas::{ApparatusConfig, OutcomeSequence, PureState, Spectrum, WeakMeasurement};

/// `(step, outcome, |α_+1|²)` until the state is within `1e-6` of an
/// eigenstate.
pub fn run_example() -> weakmeas::Result<Vec<(u64, f64, f64)>> {
    let spectrum = Spectrum::new(vec![-1.0, 1.0])?;
    let initial = PureState::from_probabilities(&[0.5, 0.5])?;
    let meas = WeakMeasurement::new(spectrum, ApparatusConfig::new(4.0)?);
    let mut rng = trajectory_stream(2024, 0);
    let mut outcomes = OutcomeSequence::stats_only();
    let mut state = initial.clone();
    let mut rows = Vec::new();
    while state.max_probability().1 < 1.0 - 1e-6 {
        let p = meas.sample_outcome(&state, &mut rng);
        outcomes.push(p);
        state = meas.state_after_stats(&initial, outcomes.count(), outcomes.sum());
        rows.push((outcomes.count(), p, state.probabilities()[1]));
    }
    Ok(rows)
}

fn main() -> weakmeas::Result<()> {
    for (k, p, w) in run_example()? {
        println!("{k:>4}  p = {p:>8.3}  |alpha_+1|^2 = {w:.6}");
    }
    Ok(())
}
