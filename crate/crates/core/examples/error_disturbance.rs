//! Trade-off between the statistical error `ε = Δ_p/√(2M)` and the
//! disturbance `1 − tr(ρ ρ_M)` of the ensemble-averaged state.

use weakmeas::analytics::{disturbance_curve, disturbance_limit, DisturbanceCurvePoint};
use weakmeas::numerics::geomspace;
use weakmeas::{PureState, Spectrum};

pub fn run_example() -> weakmeas::Result<(Vec<DisturbanceCurvePoint>, f64)> {
    let spectrum = Spectrum::new(vec![-1.0, 0.5, 2.0])?;
    let state = PureState::from_probabilities(&[0.25, 0.25, 0.5])?;
    let curve = disturbance_curve(&spectrum, &state, &geomspace(1e-2, 1e2, 9))?;
    Ok((curve, disturbance_limit(&state)))
}

fn main() -> weakmeas::Result<()> {
    let (curve, limit) = run_example()?;
    for point in &curve {
        println!("eps = {:>9.4}  D = {:.6}", point.epsilon, point.disturbance);
    }
    println!("strong limit      D = {limit:.6}");
    Ok(())
}
