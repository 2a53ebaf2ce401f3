//! Least squares through a modified Gram–Schmidt QR factorization of the
//! design matrix (intercept column first).

use super::RegressionError;
use crate::scalar::{KahanSum, Scalar};

pub(crate) struct QrDesign<T> {
    /// Original design columns, intercept first.
    columns: Vec<Vec<T>>,
    /// Orthonormal columns.
    q: Vec<Vec<T>>,
    /// Upper-triangular factor, row-major p x p.
    r: Vec<T>,
    p: usize,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

impl<T: Scalar> QrDesign<T> {
    /// `names` labels the predictor columns (not the intercept).
    pub(crate) fn new(predictors: &[Vec<T>], names: &[String]) -> Result<Self, RegressionError> {
        let n = predictors.first().map_or(0, Vec::len);
        let mut columns = Vec::with_capacity(predictors.len() + 1);
        columns.push(vec![T::one(); n]);
        columns.extend(predictors.iter().cloned());
        let p = columns.len();
        if n <= p {
            return Err(RegressionError::TooFewPairs { pairs: n, parameters: p });
        }
        let tol = T::epsilon().sqrt();
        let mut q: Vec<Vec<T>> = Vec::with_capacity(p);
        let mut r = vec![T::zero(); p * p];
        for j in 0..p {
            let mut v = columns[j].clone();
            let norm0 = dot(&v, &v).sqrt();
            // Two Gram–Schmidt passes keep the basis orthogonal to working precision.
            for _ in 0..2 {
                for (i, qi) in q.iter().enumerate() {
                    let c = dot(qi, &v);
                    r[i * p + j] += c;
                    v.iter_mut().zip(qi).for_each(|(x, &qv)| *x -= c * qv);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm0 == T::zero() || norm <= tol * norm0 {
                let mut with: Vec<String> = (0..j)
                    .filter(|&i| r[i * p + j].abs() > tol * norm0.max(T::min_positive_value()))
                    .map(|i| if i == 0 { "intercept".to_string() } else { names[i - 1].clone() })
                    .collect();
                if with.is_empty() {
                    with.push("intercept".to_string());
                }
                return Err(RegressionError::Collinear { predictor: names[j - 1].clone(), with });
            }
            r[j * p + j] = norm;
            v.iter_mut().for_each(|x| *x /= norm);
            q.push(v);
        }
        Ok(Self { columns, q, r, p })
    }

    /// Coefficients (intercept first) and the residual sum of squares.
    pub(crate) fn solve(&self, y: &[T]) -> (Vec<T>, T) {
        let p = self.p;
        let qty: Vec<T> = self.q.iter().map(|qi| dot(qi, y)).collect();
        let mut beta = vec![T::zero(); p];
        for i in (0..p).rev() {
            let mut s = qty[i];
            for k in (i + 1)..p {
                s -= self.r[i * p + k] * beta[k];
            }
            beta[i] = s / self.r[i * p + i];
        }
        let mut ssr = KahanSum::new();
        for (t, &yt) in y.iter().enumerate() {
            let fitted = self.columns.iter().zip(&beta).fold(T::zero(), |s, (c, &b)| s + c[t] * b);
            let e = yt - fitted;
            ssr.add(e * e);
        }
        (beta, ssr.total())
    }
}

pub(crate) fn total_sum_of_squares<T: Scalar>(y: &[T]) -> T {
    let m = crate::stats::mean(y);
    y.iter().map(|&v| (v - m) * (v - m)).collect::<KahanSum<T>>().total()
}
