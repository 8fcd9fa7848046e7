//! Small numerical helpers shared by the measurement, analytics and
//! trajectory modules.

/// `ln Σ exp(x_i)` with max-subtraction. Returns `-inf` for an empty slice or
/// when every term is `-inf`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Gaussian error function (`libm`, the musl/FreeBSD implementation,
/// accurate to about one ulp).
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `n` evenly spaced points on `[lo, hi]`, both ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}

/// `n` geometrically spaced points on `[lo, hi]` (both > 0).
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Composite trapezoid rule over tabulated values on a (possibly
/// non-uniform) ascending grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Trapezoid rule for `f` on `n` uniform points over `[lo, hi]`.
pub fn integrate_uniform<F: FnMut(f64) -> f64>(lo: f64, hi: f64, n: usize, mut f: F) -> f64 {
    assert!(n >= 2, "need at least two quadrature points");
    let h = (hi - lo) / (n - 1) as f64;
    let mut acc = 0.5 * (f(lo) + f(hi));
    for k in 1..n - 1 {
        acc += f(lo + h * k as f64);
    }
    acc * h
}

/// Exactly rounded floating-point accumulator.
///
/// Keeps a list of non-overlapping partial sums (Shewchuk's algorithm, the
/// one behind Python's `math.fsum`), so [`ExactSum::value`] is the correctly
/// rounded value of the true sum. The result therefore does not depend on
/// the order in which terms were added.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // half-way case: round towards the remaining partials
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}
