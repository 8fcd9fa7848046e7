use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::state::sample_index;
use super::{ApparatusConfig, OutcomeSequence, PureState, Spectrum};
use crate::error::{Error, Result};
use crate::numerics::log_sum_exp;

/// A weak measurement of the observable with spectrum `spectrum` through a
/// Gaussian pointer of spread `Δ_p`.
///
/// Every state passed in must have the spectrum's dimension; mismatches
/// panic.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakMeasurement {
    spectrum: Spectrum,
    apparatus: ApparatusConfig,
}

impl WeakMeasurement {
    pub fn new(spectrum: Spectrum, apparatus: ApparatusConfig) -> Self {
        Self { spectrum, apparatus }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn apparatus(&self) -> &ApparatusConfig {
        &self.apparatus
    }

    pub fn delta_p(&self) -> f64 {
        self.apparatus.delta_p()
    }

    fn check_dim(&self, state: &PureState) {
        assert_eq!(
            state.dim(),
            self.spectrum.dim(),
            "state dimension does not match spectrum"
        );
    }

    /// `ln |N(p,{α})|²`.
    pub fn log_outcome_density(&self, state: &PureState, p: f64) -> f64 {
        self.check_dim(state);
        let d2 = self.delta_p() * self.delta_p();
        let terms: Vec<f64> = state
            .amplitudes()
            .iter()
            .zip(self.spectrum.eigenvalues())
            .map(|(a, &s)| a.norm_sqr().ln() - (p - s) * (p - s) / d2)
            .collect();
        self.apparatus.log_norm_sq() + log_sum_exp(&terms)
    }

    /// Probability density of outcome `p`:
    /// `N² Σ_i |α_i|² exp(−(p − s_i)²/Δ_p²)`.
    pub fn outcome_density(&self, state: &PureState, p: f64) -> f64 {
        self.log_outcome_density(state, p).exp()
    }

    /// Exact draw from the outcome density: pick eigenvalue `i` with
    /// probability `|α_i|²`, then add Gaussian noise of std `Δ_p/√2`.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, state: &PureState, rng: &mut R) -> f64 {
        self.check_dim(state);
        let i = sample_index(&state.probabilities(), rng);
        let z: f64 = rng.sample(StandardNormal);
        self.spectrum.eigenvalues()[i] + self.apparatus.outcome_std() * z
    }

    /// Post-measurement state for outcome `p`:
    /// `α_i ∝ α_i exp(−(p − s_i)²/(2Δ_p²))`.
    pub fn collapse(&self, state: &PureState, p: f64) -> PureState {
        self.check_dim(state);
        let two_d2 = 2.0 * self.delta_p() * self.delta_p();
        reweight(state, |i| {
            let s = self.spectrum.eigenvalues()[i];
            -(p - s) * (p - s) / two_d2
        })
    }

    /// Diagonal of `M_p = N Σ_i exp(−(p − s_i)²/(2Δ_p²)) |s_i⟩⟨s_i|`.
    pub fn povm_element(&self, p: f64) -> Vec<f64> {
        let n = self.apparatus.norm();
        let two_d2 = 2.0 * self.delta_p() * self.delta_p();
        self.spectrum
            .eigenvalues()
            .iter()
            .map(|&s| n * (-(p - s) * (p - s) / two_d2).exp())
            .collect()
    }

    /// Unnormalized `M_p |ψ⟩`.
    pub fn apply_povm(&self, state: &PureState, p: f64) -> Vec<Complex64> {
        self.check_dim(state);
        self.povm_element(p)
            .into_iter()
            .zip(state.amplitudes())
            .map(|(w, a)| a * w)
            .collect()
    }

    /// Largest entrywise deviation of `∫ M_p† M_p dp` from the identity,
    /// by the trapezoid rule on `points` nodes over
    /// `[min s − 10Δ_p, max s + 10Δ_p]`.
    pub fn povm_completeness_residual(&self, points: usize) -> f64 {
        let pad = 10.0 * self.delta_p();
        let (lo, hi) = (self.spectrum.min() - pad, self.spectrum.max() + pad);
        let d = self.spectrum.dim();
        let h = (hi - lo) / (points - 1) as f64;
        let mut acc = vec![0.0; d];
        for k in 0..points {
            let w = if k == 0 || k == points - 1 { 0.5 * h } else { h };
            for (a, m) in acc.iter_mut().zip(self.povm_element(lo + h * k as f64)) {
                *a += w * m * m;
            }
        }
        // M_p is diagonal, so off-diagonal entries of the integral vanish identically
        acc.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `ln P(p_1..p_M)`, computed from the sufficient statistics.
    pub fn log_joint_density(&self, state: &PureState, outcomes: &OutcomeSequence) -> Result<f64> {
        self.check_dim(state);
        if outcomes.is_empty() {
            return Err(Error::EmptySequence);
        }
        let m = outcomes.count() as f64;
        let t = outcomes.sum();
        let q = outcomes.sum_sq();
        let d2 = self.delta_p() * self.delta_p();
        let terms: Vec<f64> = state
            .amplitudes()
            .iter()
            .zip(self.spectrum.eigenvalues())
            .map(|(a, &s)| {
                // Σ_j (p_j − s)² = Σp² − 2sT + Ms², floored at 0 against cancellation
                let sq = (q - 2.0 * s * t + m * s * s).max(0.0);
                a.norm_sqr().ln() - sq / d2
            })
            .collect();
        Ok(m * self.apparatus.log_norm_sq() + log_sum_exp(&terms))
    }

    /// Joint density `(N²)^M Σ_i |α_i|² Π_j exp(−(p_j − s_i)²/Δ_p²)`.
    pub fn joint_density(&self, state: &PureState, outcomes: &OutcomeSequence) -> Result<f64> {
        self.log_joint_density(state, outcomes).map(f64::exp)
    }

    /// State after the whole sequence, from `(M, Σp)` alone.
    pub fn state_after_sequence(&self, state: &PureState, outcomes: &OutcomeSequence) -> PureState {
        self.state_after_stats(state, outcomes.count(), outcomes.sum())
    }

    /// `α_i ∝ α_i exp((2 s_i T − M s_i²)/(2Δ_p²))`. The `Σp²` part of the
    /// exponent is common to every component and drops out.
    pub fn state_after_stats(&self, state: &PureState, count: u64, sum: f64) -> PureState {
        self.check_dim(state);
        if count == 0 {
            return state.clone();
        }
        let m = count as f64;
        let two_d2 = 2.0 * self.delta_p() * self.delta_p();
        reweight(state, |i| {
            let s = self.spectrum.eigenvalues()[i];
            (2.0 * s * sum - m * s * s) / two_d2
        })
    }
}

/// Multiplies each amplitude by `exp(log_weight(i))` and renormalizes,
/// working in log space so that no factor under- or overflows. Phases are
/// untouched.
fn reweight<F: Fn(usize) -> f64>(state: &PureState, log_weight: F) -> PureState {
    let amps = state.amplitudes();
    let log_mag: Vec<f64> = amps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let r = a.norm();
            if r == 0.0 {
                f64::NEG_INFINITY
            } else {
                r.ln() + log_weight(i)
            }
        })
        .collect();
    let max = log_mag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<Complex64> = amps
        .iter()
        .zip(&log_mag)
        .map(|(a, &lm)| {
            if lm == f64::NEG_INFINITY {
                Complex64::new(0.0, 0.0)
            } else {
                (a / a.norm()) * (lm - max).exp()
            }
        })
        .collect();
    let norm = scaled.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    PureState::from_raw(scaled.into_iter().map(|a| a / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_uniform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn meas(spec: &[f64], delta_p: f64) -> WeakMeasurement {
        WeakMeasurement::new(
            Spectrum::new(spec.to_vec()).unwrap(),
            ApparatusConfig::new(delta_p).unwrap(),
        )
    }

    /// Reference qubit with s=+1 carrying weight 0.8. Sorted basis is (−1, +1).
    fn reference() -> (WeakMeasurement, PureState) {
        (meas(&[1.0, -1.0], 10.0), PureState::from_probabilities(&[0.2, 0.8]).unwrap())
    }

    /// Direct evaluation of `N² Σ|α_i|² exp(−(p−s_i)²/Δ²)` without logs.
    fn density_oracle(s: &[f64], probs: &[f64], dp: f64, p: f64) -> f64 {
        let n2 = 1.0 / (PI * dp * dp).sqrt();
        n2 * s
            .iter()
            .zip(probs)
            .map(|(si, w)| w * (-(p - si) * (p - si) / (dp * dp)).exp())
            .sum::<f64>()
    }

    #[test]
    fn outcome_density_known_values() {
        let m = meas(&[0.0, 1.0], 1.0);
        let e = PureState::eigenstate(2, 0);
        assert!((m.outcome_density(&e, 0.0) - 1.0 / PI.sqrt()).abs() < 1e-15);

        let (m, s) = reference();
        let expected = (-0.01f64).exp() / (100.0 * PI).sqrt();
        assert!((m.outcome_density(&s, 0.0) - expected).abs() < 1e-15);
        assert!((expected - 0.05585).abs() < 1e-5);
        for p in [-13.0, 0.3, 2.0, 25.0] {
            let oracle = density_oracle(&[-1.0, 1.0], &[0.2, 0.8], 10.0, p);
            assert!((m.outcome_density(&s, p) / oracle - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn outcome_density_symmetric_qubit() {
        let m = meas(&[-1.0, 1.0], 3.0);
        let s = PureState::from_probabilities(&[0.5, 0.5]).unwrap();
        for p in [0.1, 1.0, 4.5, 12.0] {
            assert!((m.outcome_density(&s, p) - m.outcome_density(&s, -p)).abs() < 1e-15);
        }
    }

    #[test]
    fn outcome_density_normalizes() {
        let (m, s) = reference();
        let dp = m.delta_p();
        let total = integrate_uniform(-1.0 - 10.0 * dp, 1.0 + 10.0 * dp, 4096, |p| {
            m.outcome_density(&s, p)
        });
        assert!((total - 1.0).abs() < 1e-8, "total {total}");
    }

    #[test]
    fn collapse_examples() {
        let m = meas(&[1.0, -1.0], 10.0);
        let e = PureState::eigenstate(2, 1);
        for p in [-40.0, 0.0, 3.7, 1e3] {
            assert_eq!(m.collapse(&e, p), e);
        }
        let sym = PureState::from_probabilities(&[0.5, 0.5]).unwrap();
        assert!(m.collapse(&sym, 0.0).distance(&sym) < 1e-15);

        let post = m.collapse(&sym, 5.0);
        let e02 = 0.2f64.exp();
        // index 1 is s = +1
        assert!((post.probabilities()[1] - e02 / (1.0 + e02)).abs() < 1e-14);
        assert!((post.probabilities()[1] - 0.5498).abs() < 1e-4);
    }

    #[test]
    fn collapse_matches_povm_application() {
        let m = meas(&[-0.7, 0.2, 1.9], 1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let s = PureState::random(3, &mut rng);
            let p: f64 = rng.random_range(-4.0..4.0);
            let via_povm = PureState::normalized(m.apply_povm(&s, p)).unwrap();
            assert!(m.collapse(&s, p).distance(&via_povm) < 1e-12);
            let expectation: f64 = m.apply_povm(&s, p).iter().map(|a| a.norm_sqr()).sum();
            assert!((expectation - m.outcome_density(&s, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn povm_peak_and_completeness() {
        let m = meas(&[0.0, 2.0], 1.0);
        assert!((m.povm_element(0.0)[0] - PI.powf(-0.25)).abs() < 1e-15);

        let m = meas(&[-1.0, 0.5, 1.0], 10.0);
        assert!(m.povm_completeness_residual(4096) < 1e-8);
        let dp = m.delta_p();
        let (lo, hi) = (-1.0 - 10.0 * dp, 1.0 + 10.0 * dp);
        for i in 0..3 {
            let v = integrate_uniform(lo, hi, 4096, |p| m.povm_element(p)[i].powi(2));
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn joint_density_reduces_and_factorizes() {
        let (m, s) = reference();
        assert_eq!(
            m.joint_density(&s, &OutcomeSequence::new()),
            Err(Error::EmptySequence)
        );
        let one = OutcomeSequence::from_outcomes(&[2.5]);
        let j = m.joint_density(&s, &one).unwrap();
        assert!((j / m.outcome_density(&s, 2.5) - 1.0).abs() < 1e-12);

        let (p1, p2) = (4.2, -7.9);
        let j12 = m.joint_density(&s, &OutcomeSequence::from_outcomes(&[p1, p2])).unwrap();
        let j21 = m.joint_density(&s, &OutcomeSequence::from_outcomes(&[p2, p1])).unwrap();
        assert!((j12 / j21 - 1.0).abs() < 1e-12);
        let chain = m.outcome_density(&s, p1) * m.outcome_density(&m.collapse(&s, p1), p2);
        assert!((j12 / chain - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_after_sequence_identity_and_oracle() {
        let m = meas(&[-1.0, 0.3, 2.0], 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = PureState::random(3, &mut rng);
        assert_eq!(m.state_after_sequence(&s, &OutcomeSequence::new()), s);

        let outcomes: Vec<f64> = (0..20).map(|_| m.sample_outcome(&s, &mut rng)).collect();
        let folded = outcomes.iter().fold(s.clone(), |acc, &p| m.collapse(&acc, p));
        let direct = m.state_after_sequence(&s, &OutcomeSequence::from_outcomes(&outcomes));
        assert!(direct.distance(&folded) < 1e-10);

        let mut shuffled = outcomes.clone();
        shuffled.reverse();
        shuffled.swap(0, 7);
        let again = m.state_after_sequence(&s, &OutcomeSequence::from_outcomes(&shuffled));
        assert_eq!(again, direct);
    }

    #[test]
    fn long_sequences_do_not_underflow() {
        let (m, s) = reference();
        let seq = OutcomeSequence::from_outcomes(&vec![1.0; 100_000]);
        let post = m.state_after_sequence(&s, &seq);
        assert!((post.norm_sq() - 1.0).abs() < 1e-12);
        assert!(post.probabilities()[1] > 1.0 - 1e-12);
        let lj = m.log_joint_density(&s, &seq).unwrap();
        assert!(lj.is_finite());
    }

    #[test]
    fn sampling_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let n = 100_000;
        let m = meas(&[1.0, -1.0], 10.0);

        let e = PureState::eigenstate(2, 1);
        let xs: Vec<f64> = (0..n).map(|_| m.sample_outcome(&e, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / 50.0 - 1.0).abs() < 0.02, "var {var}");

        let sym = PureState::from_probabilities(&[0.5, 0.5]).unwrap();
        let mean = (0..n).map(|_| m.sample_outcome(&sym, &mut rng)).sum::<f64>() / n as f64;
        let tol = 3.0 * (10.0 / 2f64.sqrt()) / (n as f64).sqrt();
        assert!(mean.abs() < tol, "mean {mean}");

        let (m, s) = reference();
        let mean = (0..n).map(|_| m.sample_outcome(&s, &mut rng)).sum::<f64>() / n as f64;
        let tol = 3.0 * (50.64f64 / n as f64).sqrt();
        assert!((mean - 0.6).abs() < tol, "mean {mean}");
    }

    #[test]
    fn strong_regime_projects_in_one_step() {
        let m = meas(&[-1.0, 0.0, 2.0], 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = PureState::random(3, &mut rng);
            let p = m.sample_outcome(&s, &mut rng);
            let post = m.collapse(&s, p);
            let (k, w) = post.max_probability();
            assert!(w > 1.0 - 1e-6);
            assert!((p - m.spectrum().eigenvalues()[k]).abs() < 3.0 * m.delta_p());
        }
    }
}
