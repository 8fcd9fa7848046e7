//! How fast the mean outcome saturates when outcomes are restricted to
//! `|p| <= f Δ_p`.
//!
//! ```text
//! cargo run --example saturation_table
//! ```

use weakmeas::analytics::saturation_ratio;

pub fn run_example() -> weakmeas::Result<Vec<(f64, f64)>> {
    [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0]
        .into_iter()
        .map(|f| Ok((f, saturation_ratio(f)?)))
        .collect()
}

fn main() -> weakmeas::Result<()> {
    println!("{:>6}  {:>10}", "f", "ratio");
    for (f, r) in run_example()? {
        println!("{f:>6.2}  {r:>10.6}");
    }
    Ok(())
}
