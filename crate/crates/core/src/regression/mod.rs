//! Multiple regression on distance matrices with Mantel-style permutation tests.
//!
//! Matrices are flattened to their strict upper triangles (row-major, i < j)
//! and fitted by ordinary least squares with an intercept. Significance comes
//! from refitting after permuting the rows and columns of the response matrix
//! together, which keeps the dependence between entries sharing a language.

mod mantel;
mod ols;
pub mod predictors;

pub use mantel::{mantel_permutation_test, permutation_for, MantelOptions, PermutationTarget};
pub use predictors::{
    genetic_distance_matrix, geographic_distance_matrix, glottolog_genetic_distance, great_circle_distance,
    PredictorError, EARTH_RADIUS_KM,
};

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{csv_field, DistanceMatrix, MatrixError};
use crate::scalar::Scalar;
use crate::stats;
use ols::{total_sum_of_squares, QrDesign};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("predictor {0:?} does not share the response's labels and order")]
    Misaligned(String),
    #[error("no predictors given")]
    NoPredictors,
    #[error("{pairs} data points cannot support {parameters} parameters")]
    TooFewPairs { pairs: usize, parameters: usize },
    #[error("predictor {predictor:?} is collinear with {with:?}")]
    Collinear { predictor: String, with: Vec<String> },
    #[error("response distances are constant")]
    ConstantResponse,
    #[error("need at least 3 languages, got {0}")]
    TooFewLanguages(usize),
    #[error("at least 99 permutations required, got {0}")]
    TooFewPermutations(usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Named predictor matrices over one shared, identically ordered roster.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorSet<T> {
    labels: Vec<String>,
    matrices: IndexMap<String, DistanceMatrix<T>>,
}

impl<T: Scalar> PredictorSet<T> {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels, matrices: IndexMap::new() }
    }

    pub fn insert(&mut self, name: impl Into<String>, m: DistanceMatrix<T>) -> Result<(), RegressionError> {
        let name = name.into();
        if m.labels() != self.labels.as_slice() {
            return Err(RegressionError::Misaligned(name));
        }
        self.matrices.insert(name, m);
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.matrices.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&DistanceMatrix<T>> {
        self.matrices.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &DistanceMatrix<T>)> {
        self.matrices.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Same predictors with every matrix permuted by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            labels: order.iter().map(|&o| self.labels[o].clone()).collect(),
            matrices: self.matrices.iter().map(|(k, m)| (k.clone(), m.permuted(order))).collect(),
        }
    }
}

/// Response and predictors restricted to the languages every matrix covers.
#[derive(Debug, Clone)]
pub struct AlignedData<T> {
    pub response: DistanceMatrix<T>,
    pub predictors: PredictorSet<T>,
    /// Response languages missing from at least one predictor.
    pub dropped_languages: Vec<String>,
    /// Response pairs removed by listwise deletion.
    pub dropped_pairs: usize,
}

/// Listwise deletion: keeps the response's languages (in response order) that
/// every predictor covers and reorders each predictor to match.
pub fn align<T: Scalar>(
    response: &DistanceMatrix<T>,
    predictors: &IndexMap<String, DistanceMatrix<T>>,
) -> Result<AlignedData<T>, RegressionError> {
    let (kept, dropped): (Vec<String>, Vec<String>) = response
        .labels()
        .iter()
        .cloned()
        .partition(|l| predictors.values().all(|m| m.index_of(l).is_some()));
    let pairs = |n: usize| n * n.saturating_sub(1) / 2;
    let mut set = PredictorSet::new(kept.clone());
    for (name, m) in predictors {
        set.insert(name.clone(), m.select(&kept)?)?;
    }
    Ok(AlignedData {
        response: response.select(&kept)?,
        predictors: set,
        dropped_pairs: pairs(response.len()) - pairs(kept.len()),
        dropped_languages: dropped,
    })
}

/// Strict upper triangle in row-major (i < j) order.
pub fn vectorize_lower_triangle<T: Scalar>(m: &DistanceMatrix<T>) -> Vec<T> {
    // For a symmetric matrix the strict upper and lower triangles coincide;
    // the order here is the (i < j) row-major one used for every matrix.
    m.upper_triangle()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct FitOptions {
    /// Z-score the response and every predictor vector before fitting.
    pub standardize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RegressionResult<T> {
    pub intercept: T,
    pub coefficients: IndexMap<String, T>,
    pub r_squared: T,
    /// Empty unless produced by a permutation test.
    pub p_values: IndexMap<String, f64>,
    pub p_value_r2: Option<f64>,
    pub permutations: usize,
    pub seed: Option<u64>,
    pub n_pairs: usize,
    pub dropped_pairs: usize,
    pub standardized: bool,
    pub permutation_target: Option<PermutationTarget>,
}

impl<T: Scalar> RegressionResult<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("regression results serialize")
    }

    /// One row per predictor: `predictor,coefficient,p`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("predictor,coefficient,p\n");
        let _ = writeln!(out, "intercept,{},", self.intercept);
        for (name, c) in &self.coefficients {
            let p = self.p_values.get(name).map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{c},{p}", csv_field(name));
        }
        let p = self.p_value_r2.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "r_squared,{},{p}", self.r_squared);
        out
    }
}

pub(crate) fn zscore<T: Scalar>(v: &[T]) -> Vec<T> {
    let m = stats::mean(v);
    let sd = stats::sample_std_dev(v);
    if sd == T::zero() {
        return v.iter().map(|&x| x - m).collect();
    }
    v.iter().map(|&x| (x - m) / sd).collect()
}

/// Design prepared for repeated fits against permuted responses.
pub(crate) struct PreparedFit<T> {
    pub names: Vec<String>,
    pub response: Vec<T>,
    pub design: QrDesign<T>,
    pub sst: T,
    pub standardized: bool,
}

impl<T: Scalar> PreparedFit<T> {
    pub fn new(response: &DistanceMatrix<T>, predictors: &PredictorSet<T>, opts: FitOptions) -> Result<Self, RegressionError> {
        if predictors.is_empty() {
            return Err(RegressionError::NoPredictors);
        }
        if response.len() < 3 {
            return Err(RegressionError::TooFewLanguages(response.len()));
        }
        for (name, m) in predictors.iter() {
            if m.labels() != response.labels() {
                return Err(RegressionError::Misaligned(name.to_string()));
            }
        }
        let mut y = vectorize_lower_triangle(response);
        let mut cols: Vec<Vec<T>> = predictors.iter().map(|(_, m)| vectorize_lower_triangle(m)).collect();
        debug_assert!(cols.iter().all(|c| c.len() == y.len()));
        if opts.standardize {
            y = zscore(&y);
            cols = cols.iter().map(|c| zscore(c)).collect();
        }
        let names: Vec<String> = predictors.names().map(String::from).collect();
        let design = QrDesign::new(&cols, &names)?;
        let sst = total_sum_of_squares(&y);
        if sst == T::zero() {
            return Err(RegressionError::ConstantResponse);
        }
        Ok(Self { names, response: y, design, sst, standardized: opts.standardize })
    }

    /// Coefficients (intercept first) and R² for a response vector.
    pub fn fit(&self, y: &[T]) -> (Vec<T>, T) {
        let (beta, ssr) = self.design.solve(y);
        (beta, T::one() - ssr / self.sst)
    }

    pub fn result(&self, beta: &[T], r2: T, dropped_pairs: usize) -> RegressionResult<T> {
        RegressionResult {
            intercept: beta[0],
            coefficients: self.names.iter().cloned().zip(beta[1..].iter().copied()).collect(),
            r_squared: r2,
            p_values: IndexMap::new(),
            p_value_r2: None,
            permutations: 0,
            seed: None,
            n_pairs: self.response.len(),
            dropped_pairs,
            standardized: self.standardized,
            permutation_target: None,
        }
    }
}

/// Ordinary least squares of the response triangle on the predictor triangles.
pub fn mrm_fit<T: Scalar>(
    response: &DistanceMatrix<T>,
    predictors: &PredictorSet<T>,
    opts: FitOptions,
) -> Result<RegressionResult<T>, RegressionError> {
    let prep = PreparedFit::new(response, predictors, opts)?;
    let (beta, r2) = prep.fit(&prep.response);
    Ok(prep.result(&beta, r2, 0))
}
