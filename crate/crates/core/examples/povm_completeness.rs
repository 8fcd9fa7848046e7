//! The Gaussian measurement operators integrate to the identity, for weak
//! and strong pointers alike.

use weakmeas::{ApparatusConfig, Spectrum, WeakMeasurement};

pub fn run_example() -> weakmeas::Result<Vec<(f64, f64)>> {
    let spectrum = Spectrum::new(vec![-2.0, 0.5, 1.0, 3.0])?;
    [1e-2, 0.3, 1.0, 10.0, 100.0]
        .into_iter()
        .map(|delta_p| {
            let meas = WeakMeasurement::new(spectrum.clone(), ApparatusConfig::new(delta_p)?);
            Ok((delta_p, meas.povm_completeness_residual(4096)))
        })
        .collect()
}

fn main() -> weakmeas::Result<()> {
    for (delta_p, residual) in run_example()? {
        println!("delta_p = {delta_p:>7}  max |sum M_p^2 dp - I| = {residual:.2e}");
    }
    Ok(())
}
