//! Exact single-step and multi-step weak-measurement mathematics.
//!
//! Everything here works in the eigenbasis of the measured observable, where
//! the measurement operators are diagonal.

mod apparatus;
mod density;
mod measurement;
mod sequence;
mod spectrum;
mod state;

pub use apparatus::ApparatusConfig;
pub use density::DensityMatrix;
pub use measurement::WeakMeasurement;
pub use sequence::OutcomeSequence;
pub use spectrum::Spectrum;
pub use state::PureState;
