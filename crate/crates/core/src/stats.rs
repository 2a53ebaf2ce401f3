//! Small descriptive-statistics helpers shared across modules.

use crate::scalar::{KahanSum, Scalar};

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn average_ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("ranked values are finite"));
    let mut ranks = vec![T::zero(); xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean((i+1)..=(j+1))
        let r = T::from_count(i + j + 2) / T::lit(2.0);
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    let s: KahanSum<T> = xs.iter().copied().collect();
    s.total() / T::from_count(xs.len())
}

/// Sample standard deviation (divisor n - 1), two-pass.
pub fn sample_std_dev<T: Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    let ss: KahanSum<T> = xs.iter().map(|&x| (x - m) * (x - m)).collect();
    (ss.total() / T::from_count(xs.len() - 1)).sqrt()
}

/// Pearson correlation; `None` if either input has zero variance.
///
/// The result is bitwise symmetric in its arguments.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    Some(r.max(-T::one()).min(T::one()))
}

/// Spearman correlation: Pearson on average ranks.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spread() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&xs), 5.0);
        assert!((sample_std_dev(&xs) - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pearson_degenerate() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(1.0));
    }
}
