use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Normalization tolerance on `Σ|α_i|²`.
pub const NORM_TOL: f64 = 1e-12;

/// Pure system state as amplitudes over the observable's eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Accepts amplitudes that are already normalized within `1e-12`.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_finite(&amplitudes)?;
        let norm_sq = norm_sq(&amplitudes);
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_finite(&amplitudes)?;
        let n = norm_sq(&amplitudes).sqrt();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a / n).collect(),
        })
    }

    /// Real nonnegative amplitudes `√p_i` for a probability vector.
    pub fn from_probabilities(probabilities: &[f64]) -> Result<Self> {
        if let Some(index) = probabilities.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::NonFiniteAmplitude { index });
        }
        Self::normalized(
            probabilities
                .iter()
                .map(|&p| Complex64::new(p.sqrt(), 0.0))
                .collect(),
        )
    }

    /// Basis state `|s_k⟩`.
    pub fn eigenstate(dim: usize, k: usize) -> Self {
        assert!(k < dim, "eigenstate index {k} out of range for dimension {dim}");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// Haar-random state: i.i.d. complex Gaussian amplitudes, normalized.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        use rand_distr::StandardNormal;
        loop {
            let amps: Vec<Complex64> = (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(s) = Self::normalized(amps) {
                return s;
            }
        }
    }

    /// Builds from already-normalized amplitudes without checking.
    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Born weights `|α_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.amplitudes)
    }

    /// Largest Born weight and its index. Ties resolve to the lowest index.
    pub fn max_probability(&self) -> (usize, f64) {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best })
    }

    /// Projective (strong) measurement: index `i` with probability `|α_i|²`.
    pub fn strong_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probabilities(), rng)
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &PureState) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

fn norm_sq(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

fn check_finite(amplitudes: &[Complex64]) -> Result<()> {
    if amplitudes.is_empty() {
        return Err(Error::EmptyState);
    }
    match amplitudes.iter().position(|a| !(a.re.is_finite() && a.im.is_finite())) {
        Some(index) => Err(Error::NonFiniteAmplitude { index }),
        None => Ok(()),
    }
}

/// Inverse-CDF draw from a discrete distribution whose weights sum to ~1.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_nonzero = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last_nonzero
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn construction_enforces_norm() {
        assert!(PureState::new(vec![c(1.0), c(1.0)]).is_err());
        let s = PureState::normalized(vec![c(1.0), c(1.0)]).unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-15);
        assert_eq!(PureState::normalized(vec![c(0.0), c(0.0)]), Err(Error::ZeroNorm));
        assert_eq!(PureState::new(vec![]), Err(Error::EmptyState));
        let s = PureState::from_probabilities(&[0.8, 0.2]).unwrap();
        assert!((s.probabilities()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn strong_sample_eigenstate_and_born_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = PureState::eigenstate(3, 2);
        assert!((0..1000).all(|_| e.strong_sample(&mut rng) == 2));

        let n = 100_000;
        let s = PureState::from_probabilities(&[0.8, 0.2]).unwrap();
        let hits = (0..n).filter(|_| s.strong_sample(&mut rng) == 0).count();
        let freq = hits as f64 / n as f64;
        let sigma = (0.8f64 * 0.2 / n as f64).sqrt();
        assert!((freq - 0.8).abs() < 3.0 * sigma, "freq {freq}");

        let sym = PureState::from_probabilities(&[0.5, 0.5]).unwrap();
        let hits = (0..n).filter(|_| sym.strong_sample(&mut rng) == 0).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 3.0 * (0.25f64 / n as f64).sqrt(), "freq {freq}");
    }

    #[test]
    fn max_probability_picks_largest() {
        let s = PureState::from_probabilities(&[0.1, 0.6, 0.3]).unwrap();
        assert_eq!(s.max_probability().0, 1);
    }
}
