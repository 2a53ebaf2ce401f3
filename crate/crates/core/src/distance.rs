//! Representational distances between languages.
//!
//! The language distance is the mean, over the concepts two tables share, of
//! a per-concept vector distance. Shared concepts are visited in sorted order
//! so the result does not depend on argument order or file order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingTable};
use crate::matrix::{DistanceMatrix, MatrixError};
use crate::scalar::{KahanSum, Scalar};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMeasure {
    #[default]
    Cosine,
    Euclidean,
    /// One minus the Spearman rank correlation of the components.
    SpearmanDissimilarity,
}

impl fmt::Display for DistanceMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMeasure::Cosine => "cosine",
            DistanceMeasure::Euclidean => "euclidean",
            DistanceMeasure::SpearmanDissimilarity => "spearman",
        })
    }
}

impl FromStr for DistanceMeasure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" => Ok(DistanceMeasure::Cosine),
            "euclidean" => Ok(DistanceMeasure::Euclidean),
            "spearman" | "spearman_dissimilarity" => Ok(DistanceMeasure::SpearmanDissimilarity),
            other => Err(format!("unknown distance measure {other:?}")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate vector (zero norm or constant) under {0}")]
    Degenerate(DistanceMeasure),
    #[error("only {shared} usable shared concepts, at least {required} required")]
    InsufficientOverlap { shared: usize, required: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("need at least 3 tables, got {0}")]
    TooFewTables(usize),
    #[error("tables come from different layers ({0} and {1})")]
    MixedLayers(String, String),
    #[error("duplicate language {0:?}")]
    DuplicateLanguage(String),
    #[error("pair ({a}, {b}): {source}")]
    Pair {
        a: String,
        b: String,
        #[source]
        source: Box<DistanceError>,
    },
    #[error("no shared concepts")]
    EmptyOverlap,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Distance between two equal-length vectors.
pub fn vector_distance<T: Scalar>(u: &[T], v: &[T], measure: DistanceMeasure) -> Result<T, DistanceError> {
    if u.len() != v.len() {
        return Err(DistanceError::LengthMismatch(u.len(), v.len()));
    }
    match measure {
        DistanceMeasure::Cosine => {
            let (mut dot, mut nu, mut nv) = (T::zero(), T::zero(), T::zero());
            for (&a, &b) in u.iter().zip(v) {
                dot += a * b;
                nu += a * a;
                nv += b * b;
            }
            if nu == T::zero() || nv == T::zero() {
                return Err(DistanceError::Degenerate(measure));
            }
            if u == v {
                return Ok(T::zero());
            }
            let cos = dot / (nu.sqrt() * nv.sqrt());
            Ok((T::one() - cos).max(T::zero()).min(T::lit(2.0)))
        }
        DistanceMeasure::Euclidean => {
            let s: T = u.iter().zip(v).map(|(&a, &b)| (a - b) * (a - b)).sum();
            Ok(s.sqrt())
        }
        DistanceMeasure::SpearmanDissimilarity => {
            let rho = stats::spearman(u, v).ok_or(DistanceError::Degenerate(measure))?;
            Ok(T::one() - rho)
        }
    }
}

/// True if `v` cannot take part in `measure` comparisons.
pub fn is_degenerate<T: Scalar>(v: &[T], measure: DistanceMeasure) -> bool {
    match measure {
        DistanceMeasure::Cosine => v.iter().all(|&x| x == T::zero()),
        DistanceMeasure::Euclidean => false,
        DistanceMeasure::SpearmanDissimilarity => v.windows(2).all(|w| w[0] == w[1]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageDistanceOptions {
    /// Minimum number of usable shared concepts.
    pub min_shared: usize,
}

impl Default for LanguageDistanceOptions {
    fn default() -> Self {
        Self { min_shared: 50 }
    }
}

/// Mean concept distance between two languages with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDistance<T> {
    pub value: T,
    /// Concepts that contributed to the mean.
    pub used: usize,
    /// Shared concepts dropped because either vector was degenerate.
    pub degenerate: Vec<String>,
}

fn shared_concepts<'a, T: Scalar>(a: &'a EmbeddingTable<T>, b: &EmbeddingTable<T>) -> Vec<&'a str> {
    let mut shared: Vec<&str> = a.concepts().iter().map(String::as_str).filter(|c| b.contains(c)).collect();
    shared.sort_unstable();
    shared
}

pub fn language_distance<T: Scalar>(
    a: &EmbeddingTable<T>,
    b: &EmbeddingTable<T>,
    measure: DistanceMeasure,
    opts: LanguageDistanceOptions,
) -> Result<PairDistance<T>, DistanceError> {
    if a.dim() != b.dim() {
        return Err(DistanceError::DimMismatch(a.dim(), b.dim()));
    }
    let mut sum = KahanSum::new();
    let mut used = 0;
    let mut degenerate = Vec::new();
    for c in shared_concepts(a, b) {
        let (u, v) = (a.get(c).expect("shared"), b.get(c).expect("shared"));
        match vector_distance(u, v, measure) {
            Ok(d) => {
                sum.add(d);
                used += 1;
            }
            Err(DistanceError::Degenerate(_)) => degenerate.push(c.to_string()),
            Err(e) => return Err(e),
        }
    }
    if used == 0 || used < opts.min_shared {
        return Err(DistanceError::InsufficientOverlap { shared: used, required: opts.min_shared.max(1) });
    }
    Ok(PairDistance { value: sum.total() / T::from_count(used), used, degenerate })
}

/// Per-pair diagnostics from [`distance_matrix`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDiagnostics {
    pub a: String,
    pub b: String,
    pub used: usize,
    pub degenerate: Vec<String>,
}

/// All pairwise language distances; entry order follows `tables`.
pub fn distance_matrix<T: Scalar>(
    tables: &[EmbeddingTable<T>],
    measure: DistanceMeasure,
    opts: LanguageDistanceOptions,
) -> Result<(DistanceMatrix<T>, Vec<PairDiagnostics>), DistanceError> {
    check_tables(tables)?;
    let n = tables.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let results: Vec<PairDistance<T>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            language_distance(&tables[i], &tables[j], measure, opts).map_err(|e| DistanceError::Pair {
                a: tables[i].language().to_string(),
                b: tables[j].language().to_string(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut values = vec![T::zero(); n * n];
    let mut diagnostics = Vec::with_capacity(pairs.len());
    for (&(i, j), r) in pairs.iter().zip(results) {
        values[i * n + j] = r.value;
        values[j * n + i] = r.value;
        diagnostics.push(PairDiagnostics {
            a: tables[i].language().to_string(),
            b: tables[j].language().to_string(),
            used: r.used,
            degenerate: r.degenerate,
        });
    }
    let labels = tables.iter().map(|t| t.language().to_string()).collect();
    Ok((DistanceMatrix::new(labels, values)?, diagnostics))
}

fn check_tables<T: Scalar>(tables: &[EmbeddingTable<T>]) -> Result<(), DistanceError> {
    if tables.len() < 3 {
        return Err(DistanceError::TooFewTables(tables.len()));
    }
    let first = &tables[0];
    let mut seen = HashSet::new();
    for t in tables {
        if t.layer() != first.layer() {
            return Err(DistanceError::MixedLayers(first.layer().to_string(), t.layer().to_string()));
        }
        if t.dim() != first.dim() {
            return Err(DistanceError::DimMismatch(first.dim(), t.dim()));
        }
        if !seen.insert(t.language()) {
            return Err(DistanceError::DuplicateLanguage(t.language().to_string()));
        }
    }
    Ok(())
}

/// Re-encodes every concept by its distances to all concepts of the same table.
///
/// Component `n` of the output vector for concept `k` is the distance between
/// concepts `k` and `n`, in table order, so the output dimension is the
/// table's concept count.
pub fn second_order_encode<T: Scalar>(
    table: &EmbeddingTable<T>,
    measure: DistanceMeasure,
) -> Result<EmbeddingTable<T>, DistanceError> {
    let n = table.len();
    let mut out = EmbeddingTable::new(table.language(), table.layer(), n.max(1))?;
    let mut row = vec![T::zero(); n];
    for k in 0..n {
        let vk = table.vector_at(k);
        for (m, slot) in row.iter_mut().enumerate() {
            *slot = if m == k {
                if is_degenerate(vk, measure) {
                    return Err(DistanceError::Degenerate(measure));
                }
                T::zero()
            } else {
                vector_distance(vk, table.vector_at(m), measure)?
            };
        }
        out.insert(table.concepts()[k].clone(), &row)?;
    }
    Ok(out)
}

/// Bilingual lexicon induction result for one (source, target) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BliResult<T> {
    pub source: String,
    pub target: String,
    pub mrr: T,
    /// Rank of the correct target per evaluated source concept, in source order.
    pub ranks: IndexMap<String, usize>,
    /// Shared concepts skipped because a vector was degenerate.
    pub skipped: Vec<String>,
}

/// Ranks every target concept by distance to each source concept's vector and
/// scores the position of the correct translation. Tied candidates share the
/// worst rank of their group.
pub fn bli_mrr<T: Scalar>(
    src: &EmbeddingTable<T>,
    tgt: &EmbeddingTable<T>,
    measure: DistanceMeasure,
) -> Result<BliResult<T>, DistanceError> {
    if src.dim() != tgt.dim() {
        return Err(DistanceError::DimMismatch(src.dim(), tgt.dim()));
    }
    let candidates: Vec<&[T]> = tgt.iter().map(|(_, v)| v).filter(|v| !is_degenerate(v, measure)).collect();
    let mut ranks = IndexMap::new();
    let mut skipped = Vec::new();
    let mut recip = KahanSum::new();
    let mut any_shared = false;
    for (c, u) in src.iter() {
        let Some(truth) = tgt.get(c) else { continue };
        any_shared = true;
        if is_degenerate(u, measure) || is_degenerate(truth, measure) {
            skipped.push(c.to_string());
            continue;
        }
        let d_true = vector_distance(u, truth, measure)?;
        let mut rank = 0usize;
        for cand in &candidates {
            if vector_distance(u, cand, measure)? <= d_true {
                rank += 1;
            }
        }
        recip.add(T::one() / T::from_count(rank));
        ranks.insert(c.to_string(), rank);
    }
    if !any_shared || ranks.is_empty() {
        return Err(DistanceError::EmptyOverlap);
    }
    Ok(BliResult {
        source: src.language().to_string(),
        target: tgt.language().to_string(),
        mrr: recip.total() / T::from_count(ranks.len()),
        ranks,
        skipped,
    })
}

/// Expected MRR of a uniformly random ranking of `n` candidates: `H_n / n`.
pub fn expected_random_mrr(n: usize) -> f64 {
    assert!(n > 0);
    let h: f64 = (1..=n).map(|r| 1.0 / r as f64).sum();
    h / n as f64
}

/// MRR for every ordered pair of distinct tables (row = source, column = target).
/// Pairs without a usable overlap are `None`.
pub fn bli_matrix<T: Scalar>(tables: &[EmbeddingTable<T>], measure: DistanceMeasure) -> Vec<Vec<Option<T>>> {
    let n = tables.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        None
                    } else {
                        bli_mrr(&tables[i], &tables[j], measure).ok().map(|r| r.mrr)
                    }
                })
                .collect()
        })
        .collect()
}
