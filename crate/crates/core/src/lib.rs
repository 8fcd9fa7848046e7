//! Repeated weak measurements on a single copy of a finite-dimensional
//! system.
//!
//! * [`qm`]: Gaussian-pointer weak measurements in the observable's
//!   eigenbasis (outcome densities, exact sampling, collapse, POVM elements,
//!   joint densities and multi-step states).
//! * [`analytics`]: closed-form ensemble predictions.
//! * [`trajectories`]: Monte Carlo trajectories and ensembles with
//!   reproducible parallel streams.
//! * [`cli`]: configuration, report formatting and the command-line
//!   subcommands.
//! * [`acceptance`]: the end-to-end checks run by `weakmeas selftest`.

pub mod acceptance;
pub mod analytics;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod qm;
pub mod trajectories;

pub use error::{Error, Result};
pub use qm::{ApparatusConfig, DensityMatrix, OutcomeSequence, PureState, Spectrum, WeakMeasurement};
