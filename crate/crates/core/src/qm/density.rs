use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PureState;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Density matrix in the observable's eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_raw(entries)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Square matrix with no physical checks. Used for perturbative
    /// expressions that may leave the positive cone.
    pub fn from_raw(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    /// `ρ_ij = α_i α_j*`.
    pub fn from_pure(state: &PureState) -> Self {
        let a = state.amplitudes();
        let d = a.len();
        Self {
            entries: DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj()),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        Self {
            entries: DMatrix::from_diagonal_element(dim, dim, w),
        }
    }

    /// Diagonal matrix with the given populations.
    pub fn diagonal_from(populations: &[f64]) -> Self {
        let d = populations.len();
        Self {
            entries: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(populations[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// Entrywise average, summed in slice order.
    pub fn average<'a, I>(matrices: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a DensityMatrix>,
    {
        let mut iter = matrices.into_iter();
        let first = iter.next()?;
        let mut acc = first.entries.clone();
        let mut n = 1usize;
        for m in iter {
            assert_eq!(m.dim(), first.dim(), "dimension mismatch");
            acc += &m.entries;
            n += 1;
        }
        acc /= Complex64::new(n as f64, 0.0);
        Some(Self { entries: acc })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.overlap_trace(self).expect("same dimension")
    }

    /// `tr(ρ_a ρ_b)`, real part (exactly real for Hermitian inputs).
    pub fn overlap_trace(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.entries[(i, j)] * other.entries[(j, i)];
            }
        }
        Ok(acc.re)
    }

    /// Largest `|ρ_ij − ρ_ji*|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                dev = dev.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn validate(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let eigenvalue = self.min_eigenvalue();
        if eigenvalue < -PSD_TOL {
            return Err(Error::NotPositive { eigenvalue });
        }
        Ok(())
    }

    /// Largest entrywise `|a_ij − b_ij|`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn map_entries<F: Fn(usize, usize, Complex64) -> Complex64>(&self, f: F) -> Self {
        let d = self.dim();
        Self {
            entries: DMatrix::from_fn(d, d, |i, j| f(i, j, self.entries[(i, j)])),
        }
    }
}
