//! Closed-form ensemble predictions for weak and repeated weak
//! measurements.
//!
//! These are the reference values the Monte Carlo engine is tested against,
//! and they double as a calculator through the command line.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{erf, linspace, normal_cdf, trapezoid};
use crate::qm::{ApparatusConfig, DensityMatrix, PureState, Spectrum};

/// Grid points used by [`AverageDistribution::new`] when no grid is given.
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Half-width of the default grid, in units of `Δ_p/√(2M)` beyond the
/// extreme eigenvalues.
pub const DEFAULT_GRID_WIDTHS: f64 = 6.0;

/// `Σ_i |α_i|² s_i`, the mean outcome of a single weak measurement and the
/// mean of the trajectory average `y_M` for every `M`.
pub fn ensemble_mean(spectrum: &Spectrum, state: &PureState) -> f64 {
    state
        .probabilities()
        .iter()
        .zip(spectrum.eigenvalues())
        .map(|(w, s)| w * s)
        .sum()
}

/// `(ΔS)² = ⟨S²⟩ − ⟨S⟩²`.
pub fn observable_variance(spectrum: &Spectrum, state: &PureState) -> f64 {
    let mean = ensemble_mean(spectrum, state);
    state
        .probabilities()
        .iter()
        .zip(spectrum.eigenvalues())
        .map(|(w, s)| w * (s - mean) * (s - mean))
        .sum()
}

/// Variance of a single weak outcome, `Δ_p²/2 + (ΔS)²`.
pub fn outcome_variance(spectrum: &Spectrum, state: &PureState, app: &ApparatusConfig) -> f64 {
    0.5 * app.delta_p() * app.delta_p() + observable_variance(spectrum, state)
}

/// Number of weak repetitions matching the statistical error of
/// `strong_repetitions` strong ones: `M_w = (Δ_p/ΔS)² M_s / 2`.
pub fn required_weak_repetitions(delta_p: f64, delta_s: f64, strong_repetitions: f64) -> Result<f64> {
    if !(delta_p.is_finite() && delta_p > 0.0) {
        return Err(Error::InvalidPointerSpread(delta_p));
    }
    if delta_s == 0.0 {
        return Err(Error::ZeroSpread);
    }
    if !(delta_s.is_finite() && delta_s > 0.0) {
        return Err(Error::InvalidArgument(format!("delta_S must be > 0, got {delta_s}")));
    }
    if !(strong_repetitions >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "strong repetitions must be >= 1, got {strong_repetitions}"
        )));
    }
    let r = delta_p / delta_s;
    Ok(r * r * strong_repetitions / 2.0)
}

/// Fraction of the mean outcome recovered when outcomes are cut off at
/// `|p| ≤ f Δ_p`: `erf(f) − (2f/√π) e^{−f²}`.
pub fn saturation_ratio(f: f64) -> Result<f64> {
    if !(f >= 0.0) {
        return Err(Error::InvalidArgument(format!("f must be >= 0, got {f}")));
    }
    if f.is_infinite() {
        return Ok(1.0);
    }
    Ok(erf(f) - 2.0 * f / PI.sqrt() * (-f * f).exp())
}

/// Leading-order ensemble density matrix after one weak step, possibly
/// outside the positive cone when `Δ_p` is small.
#[derive(Debug, Clone)]
pub struct SingleStepDensity {
    pub matrix: DensityMatrix,
    pub min_eigenvalue: f64,
    pub warning: Option<String>,
}

/// `ρ − (1/4Δ_p²) Σ_ij (s_i − s_j)² α_i α_j* |s_i⟩⟨s_j|`, returned exactly as
/// written. A warning is attached when the result is not positive
/// semidefinite.
pub fn single_step_reduced_density(
    spectrum: &Spectrum,
    state: &PureState,
    app: &ApparatusConfig,
) -> SingleStepDensity {
    let s = spectrum.eigenvalues();
    let four_d2 = 4.0 * app.delta_p() * app.delta_p();
    let matrix = DensityMatrix::from_pure(state)
        .map_entries(|i, j, r| r * (1.0 - (s[i] - s[j]).powi(2) / four_d2));
    let min_eigenvalue = matrix.min_eigenvalue();
    let warning = (min_eigenvalue < -1e-10).then(|| {
        format!(
            "first-order single-step density matrix has eigenvalue {min_eigenvalue:e}; \
             delta_p = {} is too small for the expansion",
            app.delta_p()
        )
    });
    SingleStepDensity {
        matrix,
        min_eigenvalue,
        warning,
    }
}

/// Ensemble-averaged state after `m` repeated weak measurements:
/// `ρ_ij exp(−M (s_i − s_j)²/(4Δ_p²))`.
pub fn expected_reduced_density_after(
    spectrum: &Spectrum,
    state: &PureState,
    app: &ApparatusConfig,
    m: u64,
) -> DensityMatrix {
    let s = spectrum.eigenvalues();
    let rate = m as f64 / (4.0 * app.delta_p() * app.delta_p());
    DensityMatrix::from_pure(state).map_entries(|i, j, r| {
        if i == j {
            r
        } else {
            r * (-rate * (s[i] - s[j]).powi(2)).exp()
        }
    })
}

/// The `M → ∞` limit: `Σ_i |α_i|² |s_i⟩⟨s_i|`.
pub fn dephased_limit(state: &PureState) -> DensityMatrix {
    DensityMatrix::diagonal_from(&state.probabilities())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisturbanceCurvePoint {
    pub epsilon: f64,
    pub disturbance: f64,
}

/// `𝒟(ε) = Σ_ij |α_i|²|α_j|² (1 − exp(−(s_i − s_j)²/(8ε²)))`, where
/// `ε = Δ_p/√(2M)` is the statistical error of the trajectory average.
pub fn disturbance(spectrum: &Spectrum, state: &PureState, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    let w = state.probabilities();
    let s = spectrum.eigenvalues();
    let eight_e2 = 8.0 * epsilon * epsilon;
    let mut acc = 0.0;
    for i in 0..w.len() {
        for j in 0..w.len() {
            if i != j {
                acc += w[i] * w[j] * -(-(s[i] - s[j]).powi(2) / eight_e2).exp_m1();
            }
        }
    }
    Ok(acc)
}

/// `ε → 0` limit of the disturbance, `Σ_i |α_i|² (1 − |α_i|²)`.
pub fn disturbance_limit(state: &PureState) -> f64 {
    state.probabilities().iter().map(|w| w * (1.0 - w)).sum()
}

pub fn disturbance_curve(
    spectrum: &Spectrum,
    state: &PureState,
    epsilons: &[f64],
) -> Result<Vec<DisturbanceCurvePoint>> {
    epsilons
        .iter()
        .map(|&epsilon| {
            disturbance(spectrum, state, epsilon).map(|disturbance| DisturbanceCurvePoint {
                epsilon,
                disturbance,
            })
        })
        .collect()
}

/// Analytic law of the trajectory average `y_M`: a mixture of Gaussians
/// centred on the eigenvalues, with weights `|α_i|²` and common standard
/// deviation `Δ_p/√(2M)`, tabulated on a grid.
#[derive(Debug, Clone)]
pub struct AverageDistribution {
    m: u64,
    weights: Vec<f64>,
    centers: Vec<f64>,
    std: f64,
    grid: Vec<f64>,
    densities: Vec<f64>,
}

impl AverageDistribution {
    /// Tabulates on `grid`, or on the default grid when `None`.
    pub fn new(
        spectrum: &Spectrum,
        state: &PureState,
        app: &ApparatusConfig,
        m: u64,
        grid: Option<Vec<f64>>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("M must be >= 1".into()));
        }
        let std = app.statistical_error(m);
        let grid = grid.unwrap_or_else(|| {
            let pad = DEFAULT_GRID_WIDTHS * std;
            linspace(spectrum.min() - pad, spectrum.max() + pad, DEFAULT_GRID_POINTS)
        });
        let mut dist = Self {
            m,
            weights: state.probabilities(),
            centers: spectrum.eigenvalues().to_vec(),
            std,
            grid,
            densities: Vec::new(),
        };
        dist.densities = dist.grid.iter().map(|&y| dist.density_at(y)).collect();
        Ok(dist)
    }

    /// `√(M/(πΔ_p²)) Σ_i |α_i|² exp(−(y − s_i)² M/Δ_p²)`.
    pub fn density_at(&self, y: f64) -> f64 {
        let var2 = 2.0 * self.std * self.std;
        let c = 1.0 / (PI * var2).sqrt();
        self.weights
            .iter()
            .zip(&self.centers)
            .map(|(w, s)| w * c * (-(y - s) * (y - s) / var2).exp())
            .sum()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Standard deviation of each mixture component.
    pub fn component_std(&self) -> f64 {
        self.std
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// Trapezoid integral of the tabulated density.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.densities)
    }

    /// First moment from the tabulated density.
    pub fn grid_mean(&self) -> f64 {
        let f: Vec<f64> = self.grid.iter().zip(&self.densities).map(|(y, p)| y * p).collect();
        trapezoid(&self.grid, &f)
    }

    /// Second central moment from the tabulated density.
    pub fn grid_variance(&self) -> f64 {
        let mu = self.grid_mean();
        let f: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.densities)
            .map(|(y, p)| (y - mu) * (y - mu) * p)
            .collect();
        trapezoid(&self.grid, &f)
    }

    /// Closed-form variance `Δ_p²/(2M) + (ΔS)²`.
    pub fn variance(&self) -> f64 {
        let mu: f64 = self.weights.iter().zip(&self.centers).map(|(w, s)| w * s).sum();
        let spread: f64 = self
            .weights
            .iter()
            .zip(&self.centers)
            .map(|(w, s)| w * (s - mu) * (s - mu))
            .sum();
        self.std * self.std + spread
    }

    /// Exact probability of `lo ≤ y_M < hi`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.centers)
            .map(|(w, s)| w * (normal_cdf((hi - s) / self.std) - normal_cdf((lo - s) / self.std)))
            .sum()
    }

    /// Exact bin masses over `edges` (ascending, at least two).
    pub fn bin_masses(&self, edges: &[f64]) -> BinnedMasses {
        let masses = edges.windows(2).map(|e| self.mass_between(e[0], e[1])).collect();
        BinnedMasses {
            edges: edges.to_vec(),
            masses,
        }
    }
}

/// Reference probabilities per histogram bin. Mass outside the edges is
/// `1 − Σ masses`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMasses {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

impl BinnedMasses {
    pub fn outside(&self) -> f64 {
        (1.0 - self.masses.iter().sum::<f64>()).max(0.0)
    }
}

/// `1 − tr(ρ_a ρ_b)` for two density matrices.
pub fn overlap_defect(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    a.overlap_trace(b).map(|t| 1.0 - t)
}

/// `ε = Δ_p/√(2M)`.
pub fn statistical_error(delta_p: f64, m: u64) -> f64 {
    delta_p / (2.0 * m as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{geomspace, integrate_uniform};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit() -> Spectrum {
        Spectrum::new(vec![1.0, -1.0]).unwrap()
    }

    /// s = +1 (sorted index 1) carries 0.8.
    fn reference_state() -> PureState {
        PureState::from_probabilities(&[0.2, 0.8]).unwrap()
    }

    fn sym() -> PureState {
        PureState::from_probabilities(&[0.5, 0.5]).unwrap()
    }

    fn app(dp: f64) -> ApparatusConfig {
        ApparatusConfig::new(dp).unwrap()
    }

    #[test]
    fn means_and_variances() {
        let s = qubit();
        assert!((ensemble_mean(&s, &reference_state()) - 0.6).abs() < 1e-15);
        assert_eq!(ensemble_mean(&s, &PureState::eigenstate(2, 0)), -1.0);
        assert_eq!(ensemble_mean(&s, &sym()), 0.0);

        assert!((outcome_variance(&s, &sym(), &app(10.0)) - 51.0).abs() < 1e-12);
        assert_eq!(outcome_variance(&s, &PureState::eigenstate(2, 1), &app(10.0)), 50.0);
        assert!((outcome_variance(&s, &reference_state(), &app(10.0)) - 50.64).abs() < 1e-12);
    }

    #[test]
    fn outcome_variance_matches_quadrature() {
        use crate::qm::WeakMeasurement;
        let spec = Spectrum::new(vec![-1.0, 0.4, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let state = PureState::random(3, &mut rng);
        let a = app(3.0);
        let meas = WeakMeasurement::new(spec.clone(), a);
        let (lo, hi) = (-31.0, 32.0);
        let m1 = integrate_uniform(lo, hi, 8192, |p| p * meas.outcome_density(&state, p));
        let m2 = integrate_uniform(lo, hi, 8192, |p| p * p * meas.outcome_density(&state, p));
        assert!((m1 - ensemble_mean(&spec, &state)).abs() < 1e-10);
        assert!((m2 - m1 * m1 - outcome_variance(&spec, &state, &a)).abs() < 1e-9);
    }

    #[test]
    fn resource_scaling() {
        assert!((required_weak_repetitions(10.0, 1.0, 100.0).unwrap() - 5000.0).abs() < 1e-9);
        assert!((required_weak_repetitions(0.7, 0.7, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((required_weak_repetitions(100.0, 1.0, 1.0).unwrap() - 5000.0).abs() < 1e-9);
        assert_eq!(required_weak_repetitions(10.0, 0.0, 1.0), Err(Error::ZeroSpread));
        assert!(required_weak_repetitions(10.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn saturation_values() {
        assert_eq!(saturation_ratio(0.0).unwrap(), 0.0);
        assert!((saturation_ratio(0.5).unwrap() - 0.08).abs() < 0.005);
        assert!((saturation_ratio(1.0).unwrap() - 0.43).abs() < 0.005);
        // f = 2 gives 0.95399, not 0.94
        assert!((saturation_ratio(2.0).unwrap() - 0.953_988_294_5).abs() < 1e-9);
        assert!(saturation_ratio(-0.1).is_err());
        assert!(1.0 - saturation_ratio(8.0).unwrap() < 1e-12);
    }

    #[test]
    fn saturation_matches_truncated_mean_quadrature() {
        // ratio of ∫_{|p|<fΔ} p P(p) dp to the full mean, small-eigenvalue limit
        use crate::qm::WeakMeasurement;
        let dp = 1000.0;
        let meas = WeakMeasurement::new(qubit(), app(dp));
        let state = reference_state();
        for f in [0.5, 1.0, 2.0, 3.0] {
            let num = integrate_uniform(-f * dp, f * dp, 20001, |p| p * meas.outcome_density(&state, p));
            let ratio = num / 0.6;
            assert!((ratio - saturation_ratio(f).unwrap()).abs() < 1e-5, "f={f}: {ratio}");
        }
    }

    #[test]
    fn saturation_is_monotone() {
        let fs = linspace(0.0, 8.0, 801);
        let v: Vec<f64> = fs.iter().map(|&f| saturation_ratio(f).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn single_step_density() {
        let s = qubit();
        let e = PureState::eigenstate(2, 0);
        let out = single_step_reduced_density(&s, &e, &app(10.0));
        assert!(out.matrix.max_abs_diff(&DensityMatrix::from_pure(&e)) < 1e-15);
        assert!(out.warning.is_none());

        let out = single_step_reduced_density(&s, &sym(), &app(10.0));
        assert!((out.matrix.get(0, 1).re - 0.495).abs() < 1e-15);
        assert_eq!(out.matrix.diagonal(), DensityMatrix::from_pure(&sym()).diagonal());

        let out = single_step_reduced_density(&s, &sym(), &app(0.3));
        assert!(out.warning.is_some());
        assert!(out.min_eigenvalue < 0.0);
    }

    #[test]
    fn repeated_density() {
        let s = qubit();
        let a = app(10.0);
        let rho0 = DensityMatrix::from_pure(&sym());
        assert_eq!(expected_reduced_density_after(&s, &sym(), &a, 0), rho0);
        let r = expected_reduced_density_after(&s, &sym(), &a, 100);
        assert!((r.get(0, 1).re - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((r.get(0, 1).re - 0.1839).abs() < 1e-4);
        let r = expected_reduced_density_after(&s, &sym(), &a, 1_000_000);
        assert!(r.get(0, 1).norm() < 1e-12);
        assert!(r.max_abs_diff(&dephased_limit(&sym())) < 1e-12);
        r.validate().unwrap();
    }

    #[test]
    fn single_step_is_first_order_of_repeated() {
        let s = qubit();
        let st = reference_state();
        let diff = |dp: f64| {
            let a = app(dp);
            let first = single_step_reduced_density(&s, &st, &a).matrix;
            let exact = expected_reduced_density_after(&s, &st, &a, 1);
            (first.get(0, 1) - exact.get(0, 1)).norm()
        };
        let ratio = diff(10.0) / diff(100.0);
        assert!(ratio > 0.5e4 && ratio < 2e4, "ratio {ratio}");
    }

    #[test]
    fn disturbance_values() {
        let s = qubit();
        assert!(disturbance(&s, &sym(), 1e9).unwrap() < 1e-12);
        assert!((disturbance(&s, &sym(), 1e-6).unwrap() - 0.5).abs() < 1e-15);
        assert!((disturbance_limit(&sym()) - 0.5).abs() < 1e-15);
        assert!((disturbance_limit(&reference_state()) - 0.32).abs() < 1e-15);
        assert!(disturbance(&s, &sym(), 0.0).is_err());
        assert!(disturbance(&s, &sym(), -1.0).is_err());
    }

    #[test]
    fn disturbance_monotone_and_bounded() {
        let spec = Spectrum::new(vec![-1.0, 0.2, 0.9, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let st = PureState::random(4, &mut rng);
            let eps = geomspace(1e-4, 1e4, 200);
            let curve = disturbance_curve(&spec, &st, &eps).unwrap();
            let limit = disturbance_limit(&st);
            assert!(curve.windows(2).all(|w| w[1].disturbance <= w[0].disturbance));
            assert!(curve.iter().all(|p| p.disturbance <= limit + 1e-12 && p.disturbance >= 0.0));
        }
    }

    #[test]
    fn disturbance_equals_overlap_defect() {
        let spec = Spectrum::new(vec![-0.5, 0.0, 1.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = app(4.0);
        for m in [1u64, 7, 100, 5000] {
            let st = PureState::random(3, &mut rng);
            let rho = DensityMatrix::from_pure(&st);
            let rep = expected_reduced_density_after(&spec, &st, &a, m);
            let lhs = overlap_defect(&rho, &rep).unwrap();
            let rhs = disturbance(&spec, &st, statistical_error(4.0, m)).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn average_distribution_m1_is_outcome_density() {
        use crate::qm::WeakMeasurement;
        let meas = WeakMeasurement::new(qubit(), app(10.0));
        let st = reference_state();
        let d = AverageDistribution::new(&qubit(), &st, &app(10.0), 1, None).unwrap();
        for (&y, &p) in d.grid().iter().zip(d.densities()).step_by(97) {
            assert!((p - meas.outcome_density(&st, y)).abs() < 1e-12);
        }
    }

    #[test]
    fn average_distribution_moments() {
        let spec = qubit();
        let st = reference_state();
        for m in [10u64, 100, 1000, 100_000] {
            let d = AverageDistribution::new(&spec, &st, &app(10.0), m, None).unwrap();
            assert!((d.integral() - 1.0).abs() < 1e-8, "M={m}: {}", d.integral());
            assert!((d.grid_mean() - 0.6).abs() < 1e-8, "M={m}: mean {}", d.grid_mean());
            let expected = 100.0 / (2.0 * m as f64) + 0.64;
            assert!((d.variance() - expected).abs() < 1e-12);
            assert!((d.grid_variance() / expected - 1.0).abs() < 1e-6);
            assert!(d.densities().iter().all(|&p| p >= 0.0));
        }
        // at M = 1 the components are wide enough (std 7.07) that the 6-width
        // default grid drops ~2e-8 of the first moment; a 10-width grid does not
        let sd = app(10.0).statistical_error(1);
        let grid = linspace(-1.0 - 10.0 * sd, 1.0 + 10.0 * sd, 4096);
        let d = AverageDistribution::new(&spec, &st, &app(10.0), 1, Some(grid)).unwrap();
        assert!((d.integral() - 1.0).abs() < 1e-8);
        assert!((d.grid_mean() - 0.6).abs() < 1e-8);

        let e = PureState::eigenstate(2, 1);
        let d = AverageDistribution::new(&spec, &e, &app(10.0), 50, None).unwrap();
        assert!((d.variance() - 1.0).abs() < 1e-12);
        assert!(AverageDistribution::new(&spec, &e, &app(10.0), 0, None).is_err());
    }

    #[test]
    fn bin_masses_cover_the_line() {
        let d = AverageDistribution::new(&qubit(), &reference_state(), &app(10.0), 1000, None).unwrap();
        let b = d.bin_masses(&linspace(-5.0, 5.0, 11));
        assert!((b.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(b.outside() < 1e-12);
        let near_plus: f64 = d.mass_between(0.0, 2.0);
        assert!((near_plus - 0.8).abs() < 1e-4);
    }
}
