use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gaussian pointer state centred at zero with spread `delta_p`.
///
/// `delta_p >> 1` (relative to the eigenvalue spread) is the weak regime,
/// `delta_p << 1` reproduces projective measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparatusConfig {
    delta_p: f64,
}

impl ApparatusConfig {
    pub fn new(delta_p: f64) -> Result<Self> {
        if !(delta_p.is_finite() && delta_p > 0.0) {
            return Err(Error::InvalidPointerSpread(delta_p));
        }
        Ok(Self { delta_p })
    }

    pub fn delta_p(&self) -> f64 {
        self.delta_p
    }

    /// `N²` with `N² √(π Δ_p²) = 1`.
    pub fn norm_sq(&self) -> f64 {
        1.0 / (PI * self.delta_p * self.delta_p).sqrt()
    }

    /// `ln N²`.
    pub fn log_norm_sq(&self) -> f64 {
        -0.5 * (PI.ln() + 2.0 * self.delta_p.ln())
    }

    /// `N = (π Δ_p²)^{-1/4}`.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Standard deviation of a single outcome around an eigenvalue,
    /// `Δ_p / √2`.
    pub fn outcome_std(&self) -> f64 {
        self.delta_p / std::f64::consts::SQRT_2
    }

    /// Statistical error of the average of `m` outcomes, `Δ_p / √(2m)`.
    pub fn statistical_error(&self, m: u64) -> f64 {
        self.delta_p / (2.0 * m as f64).sqrt()
    }
}
