use crate::numerics::ExactSum;

/// Outcomes `p_1..p_M` of repeated weak measurements.
///
/// The sufficient statistics (count, Σp, Σp²) are always maintained and are
/// authoritative; the raw outcomes are kept only when retention is on. Sums
/// are exactly rounded, so the statistics do not depend on outcome order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutcomeSequence {
    outcomes: Option<Vec<f64>>,
    count: u64,
    sum: ExactSum,
    sum_sq: ExactSum,
}

impl OutcomeSequence {
    /// Empty sequence that retains every outcome.
    pub fn new() -> Self {
        Self {
            outcomes: Some(Vec::new()),
            ..Self::default()
        }
    }

    /// Empty sequence that keeps only the sufficient statistics.
    pub fn stats_only() -> Self {
        Self::default()
    }

    pub fn from_outcomes(outcomes: &[f64]) -> Self {
        let mut seq = Self::new();
        outcomes.iter().for_each(|&p| seq.push(p));
        seq
    }

    pub fn push(&mut self, p: f64) {
        if let Some(v) = self.outcomes.as_mut() {
            v.push(p);
        }
        self.count += 1;
        self.sum.add(p);
        self.sum_sq.add(p * p);
    }

    /// Number of outcomes `M`.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// `T = Σ p_j`.
    pub fn sum(&self) -> f64 {
        self.sum.value()
    }

    /// `Σ p_j²`.
    pub fn sum_sq(&self) -> f64 {
        self.sum_sq.value()
    }

    /// Running average `y_M = T / M`; `None` for an empty sequence.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum() / self.count as f64)
    }

    pub fn outcomes(&self) -> Option<&[f64]> {
        self.outcomes.as_deref()
    }

    pub fn retains_outcomes(&self) -> bool {
        self.outcomes.is_some()
    }
}
