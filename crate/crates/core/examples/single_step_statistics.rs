//! Single weak measurements on freshly prepared copies: the outcome mean is
//! the quantum expectation value, the variance is `Δ_p²/2 + ΔS²`.

use weakmeas::analytics::{ensemble_mean, outcome_variance};
use weakmeas::trajectories::trajectory_stream;
use weakmeas::{ApparatusConfig, PureState, Spectrum, WeakMeasurement};

pub struct Summary {
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn run_example() -> weakmeas::Result<Summary> {
    let spectrum = Spectrum::new(vec![-1.0, 1.0])?;
    let state = PureState::from_probabilities(&[0.2, 0.8])?;
    let app = ApparatusConfig::new(10.0)?;
    let meas = WeakMeasurement::new(spectrum.clone(), app);

    let n = 100_000;
    let mut rng = trajectory_stream(42, 0);
    let xs: Vec<f64> = (0..n).map(|_| meas.sample_outcome(&state, &mut rng)).collect();
    let sample_mean = xs.iter().sum::<f64>() / n as f64;
    let sample_variance = xs.iter().map(|x| (x - sample_mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Summary {
        sample_mean,
        sample_variance,
        mean: ensemble_mean(&spectrum, &state),
        variance: outcome_variance(&spectrum, &state, &app),
    })
}

fn main() -> weakmeas::Result<()> {
    let s = run_example()?;
    println!("mean      sample {:.5}  exact {:.5}", s.sample_mean, s.mean);
    println!("variance  sample {:.4}  exact {:.4}", s.sample_variance, s.variance);
    Ok(())
}
