use crate::error::{Error, Result};

/// Eigenvalues of the measured observable, sorted ascending and pairwise
/// distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Builds a spectrum, sorting the eigenvalues ascending.
    ///
    /// Use [`Spectrum::with_permutation`] when amplitudes given in the
    /// caller's order have to follow the sort.
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        Self::with_permutation(eigenvalues).map(|(s, _)| s)
    }

    /// Like [`Spectrum::new`], also returning `order` such that the k-th
    /// sorted eigenvalue was `eigenvalues[order[k]]` in the input.
    pub fn with_permutation(eigenvalues: Vec<f64>) -> Result<(Self, Vec<usize>)> {
        if eigenvalues.len() < 2 {
            return Err(Error::SpectrumTooSmall(eigenvalues.len()));
        }
        if let Some((index, &value)) = eigenvalues.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteEigenvalue { index, value });
        }
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let sorted: Vec<f64> = order.iter().map(|&k| eigenvalues[k]).collect();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DegenerateSpectrum { value: w[0] });
        }
        Ok((Self { eigenvalues: sorted }, order))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Smallest distance between neighbouring eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the eigenvalue equal to `value`, if any.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.eigenvalues.iter().position(|&s| s == value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_reports_permutation() {
        let (s, order) = Spectrum::with_permutation(vec![1.0, -1.0, 0.5]).unwrap();
        assert_eq!(s.eigenvalues(), &[-1.0, 0.5, 1.0]);
        assert_eq!(order, vec![1, 2, 0]);
        assert_eq!(s.min_gap(), 0.5);
        assert_eq!(s.index_of(1.0), Some(2));
    }

    #[test]
    fn rejects_degenerate_and_small() {
        assert!(matches!(
            Spectrum::new(vec![1.0, 0.0, 1.0]),
            Err(Error::DegenerateSpectrum { value }) if value == 1.0
        ));
        assert_eq!(Spectrum::new(vec![2.0]), Err(Error::SpectrumTooSmall(1)));
        assert!(Spectrum::new(vec![0.0, f64::NAN]).is_err());
        let msg = Spectrum::new(vec![3.0, 3.0]).unwrap_err().to_string();
        assert!(msg.contains("non-degenerate"), "{msg}");
    }
}
