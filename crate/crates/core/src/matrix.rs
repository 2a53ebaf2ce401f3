//! Symmetric, zero-diagonal distance matrices indexed by language ID.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix has {labels} labels but {values} values (expected {expected})")]
    Shape { labels: usize, values: usize, expected: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(String, String),
    #[error("negative entry at ({0}, {1})")]
    Negative(String, String),
    #[error("non-zero diagonal at {0:?}")]
    Diagonal(String),
    #[error("asymmetric entries at ({0}, {1})")]
    Asymmetric(String, String),
    #[error("label {0:?} not in matrix")]
    UnknownLabel(String),
}

/// Symmetric matrix of non-negative finite distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    labels: Vec<String>,
    values: Vec<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Builds a matrix from row-major values, checking every invariant exactly.
    pub fn new(labels: Vec<String>, values: Vec<T>) -> Result<Self, MatrixError> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(MatrixError::Shape { labels: n, values: values.len(), expected: n * n });
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if seen.insert(l.as_str(), i).is_some() {
                return Err(MatrixError::DuplicateLabel(l.clone()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() {
                    return Err(MatrixError::NonFinite(labels[i].clone(), labels[j].clone()));
                }
                if v < T::zero() {
                    return Err(MatrixError::Negative(labels[i].clone(), labels[j].clone()));
                }
                if i == j && v != T::zero() {
                    return Err(MatrixError::Diagonal(labels[i].clone()));
                }
                if v != values[j * n + i] {
                    return Err(MatrixError::Asymmetric(labels[i].clone(), labels[j].clone()));
                }
            }
        }
        Ok(Self { labels, values })
    }

    /// Builds a matrix from a function over the strict upper triangle.
    pub fn from_fn(
        labels: Vec<String>,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Result<Self, MatrixError> {
        let n = labels.len();
        let mut values = vec![T::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(labels, values)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.labels.len() + j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get_by_label(&self, a: &str, b: &str) -> Option<T> {
        Some(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.labels.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Matrix whose `k`-th row/column is row/column `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.len();
        assert_eq!(order.len(), n, "permutation length mismatch");
        let labels = order.iter().map(|&o| self.labels[o].clone()).collect();
        let mut values = Vec::with_capacity(n * n);
        for &oi in order {
            for &oj in order {
                values.push(self.get(oi, oj));
            }
        }
        Self { labels, values }
    }

    /// Restricts and reorders the matrix to `labels`.
    pub fn select(&self, labels: &[String]) -> Result<Self, MatrixError> {
        let order = labels
            .iter()
            .map(|l| self.index_of(l).ok_or_else(|| MatrixError::UnknownLabel(l.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let n = order.len();
        let mut values = Vec::with_capacity(n * n);
        for &oi in &order {
            for &oj in &order {
                values.push(self.get(oi, oj));
            }
        }
        Self::new(labels.to_vec(), values)
    }

    /// Same matrix with its labels sorted; returns the matrix and the
    /// original index of every sorted position.
    pub fn canonicalized(&self) -> (Self, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.labels[a].cmp(&self.labels[b]));
        (self.permuted(&order), order)
    }

    /// Strict upper triangle in row-major (i < j) order.
    pub fn upper_triangle(&self) -> Vec<T> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// CSV with a header row and a label column, matching the distance CSV format.
    pub fn to_csv(&self) -> String {
        let n = self.len();
        let mut out = String::from("language");
        for l in &self.labels {
            out.push(',');
            out.push_str(&csv_field(l));
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&csv_field(&self.labels[i]));
            for j in 0..n {
                let _ = write!(out, ",{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DistanceMatrix<U> {
        DistanceMatrix { labels: self.labels.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("l{i}")).collect()
    }

    #[test]
    fn rejects_broken_invariants() {
        let l = labels(2);
        assert!(matches!(
            DistanceMatrix::new(l.clone(), vec![0.0, 0.3, 0.4, 0.0]),
            Err(MatrixError::Asymmetric(..))
        ));
        assert!(matches!(
            DistanceMatrix::new(l.clone(), vec![0.1, 0.3, 0.3, 0.0]),
            Err(MatrixError::Diagonal(_))
        ));
        assert!(matches!(
            DistanceMatrix::new(l.clone(), vec![0.0, -0.3, -0.3, 0.0]),
            Err(MatrixError::Negative(..))
        ));
        assert!(matches!(
            DistanceMatrix::new(l, vec![0.0, f64::NAN, f64::NAN, 0.0]),
            Err(MatrixError::NonFinite(..))
        ));
        assert!(matches!(
            DistanceMatrix::new(vec!["a".into(), "a".into()], vec![0.0; 4]),
            Err(MatrixError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn upper_triangle_order() {
        let m = DistanceMatrix::from_fn(labels(3), |i, j| match (i, j) {
            (0, 1) => 1.0,
            (0, 2) => 2.0,
            _ => 3.0,
        })
        .unwrap();
        assert_eq!(m.upper_triangle(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn canonicalization_sorts_labels() {
        let m = DistanceMatrix::from_fn(
            vec!["c".into(), "a".into(), "b".into()],
            |i, j| (i + j) as f64,
        )
        .unwrap();
        let (c, order) = m.canonicalized();
        assert_eq!(c.labels(), &["a", "b", "c"]);
        assert_eq!(order, vec![1, 2, 0]);
        assert_eq!(c.get_by_label("a", "c"), m.get_by_label("a", "c"));
    }
}
