use serde::Serialize;

use crate::analytics::BinnedMasses;
use crate::error::{Error, Result};
use crate::numerics::linspace;

/// Uniform-bin histogram over `[lo, hi)` with explicit under/overflow
/// counters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    below: u64,
    above: u64,
}

impl Histogram {
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("bad histogram range [{lo}, {hi})")));
        }
        Ok(Self {
            edges: linspace(lo, hi, bins + 1),
            counts: vec![0; bins],
            below: 0,
            above: 0,
        })
    }

    pub fn add(&mut self, x: f64) {
        let lo = self.edges[0];
        let hi = self.edges[self.edges.len() - 1];
        if !(x >= lo) {
            self.below += 1;
            return;
        }
        if x >= hi {
            self.above += 1;
            return;
        }
        let bins = self.counts.len();
        let mut k = (((x - lo) / (hi - lo)) * bins as f64).floor() as usize;
        k = k.min(bins - 1);
        // settle rounding against the stored edges
        if x < self.edges[k] {
            k -= 1;
        } else if x >= self.edges[k + 1] {
            k += 1;
        }
        self.counts[k] += 1;
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn below(&self) -> u64 {
        self.below
    }

    pub fn above(&self) -> u64 {
        self.above
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    /// Per-bin fractions of the total count.
    pub fn masses(&self) -> Vec<f64> {
        let n = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Fraction of entries falling outside the edges.
    pub fn outside_mass(&self) -> f64 {
        (self.below + self.above) as f64 / self.total().max(1) as f64
    }

    /// Mass in `[lo, hi)` summed over whole bins whose centres lie inside.
    pub fn mass_near(&self, lo: f64, hi: f64) -> f64 {
        let masses = self.masses();
        self.edges
            .windows(2)
            .zip(masses)
            .filter(|(e, _)| {
                let c = 0.5 * (e[0] + e[1]);
                c >= lo && c < hi
            })
            .map(|(_, m)| m)
            .sum()
    }
}

/// Total-variation distance `½ Σ |empirical − reference|`, with the mass
/// outside the edges counted as one extra cell.
pub fn total_variation(hist: &Histogram, reference: &BinnedMasses) -> Result<f64> {
    if hist.edges() != reference.edges.as_slice() {
        return Err(Error::BinMismatch);
    }
    let inside: f64 = hist
        .masses()
        .iter()
        .zip(&reference.masses)
        .map(|(e, a)| (e - a).abs())
        .sum();
    let outside = (hist.outside_mass() - reference.outside()).abs();
    Ok(0.5 * (inside + outside))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning_and_overflow() {
        let mut h = Histogram::uniform(0.0, 1.0, 10).unwrap();
        for x in [0.0, 0.05, 0.1, 0.999, 1.0, -0.1, 0.35] {
            h.add(x);
        }
        assert_eq!(h.counts()[0], 2);
        assert_eq!(h.counts()[1], 1);
        assert_eq!(h.counts()[3], 1);
        assert_eq!(h.counts()[9], 1);
        assert_eq!((h.below(), h.above()), (1, 1));
        assert_eq!(h.total(), 7);
        assert!(Histogram::uniform(1.0, 0.0, 3).is_err());
        assert!(Histogram::uniform(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn tv_identical_disjoint_and_mismatch() {
        let mut h = Histogram::uniform(0.0, 4.0, 4).unwrap();
        for x in [0.5, 1.5, 1.6, 3.2] {
            h.add(x);
        }
        let same = BinnedMasses {
            edges: h.edges().to_vec(),
            masses: h.masses(),
        };
        assert!(total_variation(&h, &same).unwrap().abs() < 1e-15);

        let mut h2 = Histogram::uniform(0.0, 4.0, 4).unwrap();
        h2.add(0.5);
        let disjoint = BinnedMasses {
            edges: h2.edges().to_vec(),
            masses: vec![0.0, 0.0, 0.0, 1.0],
        };
        assert!((total_variation(&h2, &disjoint).unwrap() - 1.0).abs() < 1e-15);

        let other = BinnedMasses {
            edges: vec![0.0, 2.0, 4.0],
            masses: vec![0.5, 0.5],
        };
        assert_eq!(total_variation(&h, &other), Err(Error::BinMismatch));
    }
}
