//! Cross-lingual variability of concepts and its correlation with
//! diachronic stability rankings.
//!
//! For a concept, every pair of languages that both have a (non-zero) vector
//! for it contributes one cosine similarity; a summary statistic of those
//! similarities is the concept's variability score.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use indexmap::{IndexMap, IndexSet};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::embedding::{EmbeddingTable, Layer};
use crate::ingest::{AliasTable, Direction, RankedList};
use crate::matrix::csv_field;
use crate::scalar::{KahanSum, Scalar};
use crate::stats;

/// Fewest paired observations a correlation is computed from.
pub const MIN_CORRELATION_N: usize = 5;
/// Exact permutation p-values are used up to this many observations.
pub const EXACT_P_MAX_N: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("concept {concept:?} has usable vectors in {usable} language(s), need 2")]
    TooFewLanguages { concept: String, usable: usize },
    #[error("no similarities to summarise")]
    Empty,
    #[error("standard deviation needs at least 2 similarities")]
    SingleValue,
    #[error("inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation needs at least {MIN_CORRELATION_N} observations, got {0}")]
    TooFewObservations(usize),
    #[error("correlation undefined for a constant input")]
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statistic {
    Mean,
    StdDev,
    Min,
    Max,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [Statistic::Mean, Statistic::StdDev, Statistic::Min, Statistic::Max];

    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::StdDev => "std",
            Statistic::Min => "min",
            Statistic::Max => "max",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Statistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(Statistic::Mean),
            "std" | "stddev" | "sd" => Ok(Statistic::StdDev),
            "min" => Ok(Statistic::Min),
            "max" => Ok(Statistic::Max),
            other => Err(format!("unknown statistic {other:?}")),
        }
    }
}

impl Serialize for Statistic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VariabilityScore<T> {
    pub concept: String,
    pub statistic: Statistic,
    pub value: T,
    pub pair_count: usize,
}

fn cosine_similarity<T: Scalar>(u: &[T], v: &[T]) -> T {
    if u == v {
        return T::one();
    }
    let (mut uv, mut uu, mut vv) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    for (&a, &b) in u.iter().zip(v) {
        uv.add(a * b);
        uu.add(a * a);
        vv.add(b * b);
    }
    let c = uv.total() / (uu.total().sqrt() * vv.total().sqrt());
    c.max(-T::one()).min(T::one())
}

/// Cosine similarities of `concept` over all language pairs `(i, j)`, `i < j`
/// in table order, where both tables hold a non-zero vector for it.
pub fn concept_similarities<T: Scalar>(tables: &[EmbeddingTable<T>], concept: &str) -> Result<Vec<T>, StabilityError> {
    let vectors: Vec<&[T]> = tables
        .iter()
        .filter_map(|t| t.get(concept))
        .filter(|v| v.iter().any(|&x| x != T::zero()))
        .collect();
    if vectors.len() < 2 {
        return Err(StabilityError::TooFewLanguages { concept: concept.to_string(), usable: vectors.len() });
    }
    let mut out = Vec::with_capacity(vectors.len() * (vectors.len() - 1) / 2);
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            out.push(cosine_similarity(vectors[i], vectors[j]));
        }
    }
    Ok(out)
}

pub fn variability_score<T: Scalar>(sims: &[T], stat: Statistic) -> Result<T, StabilityError> {
    if sims.is_empty() {
        return Err(StabilityError::Empty);
    }
    Ok(match stat {
        Statistic::Mean => stats::mean(sims),
        Statistic::StdDev => {
            if sims.len() < 2 {
                return Err(StabilityError::SingleValue);
            }
            stats::sample_std_dev(sims)
        }
        Statistic::Min => sims.iter().copied().fold(T::infinity(), T::min),
        Statistic::Max => sims.iter().copied().fold(T::neg_infinity(), T::max),
    })
}

/// Scores for every concept found in any table, sorted by concept name.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet<T> {
    pub scores: Vec<VariabilityScore<T>>,
    /// Concepts with fewer than two usable languages, or a single pair when
    /// a standard deviation was requested.
    pub unusable: Vec<String>,
}

pub fn variability_scores<T: Scalar>(tables: &[EmbeddingTable<T>], statistics: &[Statistic]) -> ScoreSet<T> {
    let mut concepts: Vec<&str> =
        tables.iter().flat_map(|t| t.concepts().iter().map(String::as_str)).collect::<IndexSet<_>>().into_iter().collect();
    concepts.sort_unstable();
    let per_concept: Vec<Result<Vec<VariabilityScore<T>>, String>> = concepts
        .par_iter()
        .map(|&c| {
            let sims = concept_similarities(tables, c).map_err(|_| c.to_string())?;
            statistics
                .iter()
                .map(|&s| {
                    let value = variability_score(&sims, s).map_err(|_| c.to_string())?;
                    Ok(VariabilityScore { concept: c.to_string(), statistic: s, value, pair_count: sims.len() })
                })
                .collect()
        })
        .collect();
    let mut set = ScoreSet { scores: Vec::new(), unusable: Vec::new() };
    for r in per_concept {
        match r {
            Ok(s) => set.scores.extend(s),
            Err(c) => set.unusable.push(c),
        }
    }
    set
}

fn validate_pair<T: Scalar>(x: &[T], y: &[T]) -> Result<(), StabilityError> {
    if x.len() != y.len() {
        return Err(StabilityError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < MIN_CORRELATION_N {
        return Err(StabilityError::TooFewObservations(x.len()));
    }
    Ok(())
}

/// Two-sided p-value of a correlation coefficient from Student's t with n − 2
/// degrees of freedom.
pub fn t_approx_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Two-sided exact p-value: share of all n! reorderings of `y` whose
/// |coefficient| reaches the observed one.
fn exact_p_value<T: Scalar>(x: &[T], y: &[T], observed: T, coef: impl Fn(&[T], &[T]) -> Option<T>) -> f64 {
    let n = y.len();
    let target = observed.abs() - observed.abs() * T::epsilon().sqrt() * T::lit(16.0);
    let mut perm = y.to_vec();
    let mut c = vec![0usize; n];
    let (mut hits, mut total) = (0u64, 0u64);
    let mut visit = |p: &[T]| {
        total += 1;
        if coef(x, p).is_some_and(|r| r.abs() >= target) {
            hits += 1;
        }
    };
    // Heap's algorithm.
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

/// Spearman rank correlation (average ranks for ties) with a two-sided
/// p-value: exact by permutation for n ≤ 8, Student's t approximation otherwise.
pub fn spearman_rho<T: Scalar>(x: &[T], y: &[T]) -> Result<(T, f64), StabilityError> {
    correlation(x, y, CorrelationMethod::Spearman)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Spearman,
    Pearson,
}

impl FromStr for CorrelationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spearman" => Ok(CorrelationMethod::Spearman),
            "pearson" => Ok(CorrelationMethod::Pearson),
            other => Err(format!("unknown correlation method {other:?}")),
        }
    }
}

/// Coefficient and two-sided p-value for the chosen method.
pub fn correlation<T: Scalar>(x: &[T], y: &[T], method: CorrelationMethod) -> Result<(T, f64), StabilityError> {
    validate_pair(x, y)?;
    let (x, y) = match method {
        CorrelationMethod::Spearman => (stats::average_ranks(x), stats::average_ranks(y)),
        CorrelationMethod::Pearson => (x.to_vec(), y.to_vec()),
    };
    let r = stats::pearson(&x, &y).ok_or(StabilityError::Constant)?;
    let p = if x.len() <= EXACT_P_MAX_N {
        exact_p_value(&x, &y, r, |a, b| stats::pearson(a, b))
    } else {
        t_approx_p_value(r.to_f64_lossless(), x.len())
    };
    Ok((r, p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationOptions {
    pub method: CorrelationMethod,
    pub alpha: f64,
    /// Concepts whose score rests on fewer language pairs are left out.
    pub min_pair_count: usize,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self { method: CorrelationMethod::Spearman, alpha: 0.01, min_pair_count: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrelationReport<T> {
    pub list: String,
    pub layer: Layer,
    pub statistic: Statistic,
    pub method: CorrelationMethod,
    pub rho: T,
    pub p_value: f64,
    pub n_concepts: usize,
    pub significant: bool,
    /// Orientation of the list's scores; a positive rho against a
    /// `higher_less_stable` list means the statistic grows with replacement rate.
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedCorrelation {
    pub list: String,
    pub layer: Layer,
    pub statistic: Statistic,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrelationOutcome<T> {
    pub reports: Vec<CorrelationReport<T>>,
    pub skipped: Vec<SkippedCorrelation>,
    /// Per list, entries with no scored concept after alias resolution.
    pub unmatched: IndexMap<String, Vec<String>>,
    /// Concepts excluded for resting on fewer than `min_pair_count` pairs.
    pub low_pair_count: Vec<String>,
}

/// Correlates each statistic present in `scores` with each list.
///
/// Concept names on both sides go through `aliases` (case-insensitive); the
/// observations are taken in list order.
pub fn correlate_with_lists<T: Scalar>(
    scores: &[VariabilityScore<T>],
    layer: Layer,
    lists: &[RankedList<T>],
    aliases: &AliasTable,
    opts: CorrelationOptions,
) -> CorrelationOutcome<T> {
    let mut out = CorrelationOutcome::default();
    let mut by_stat: IndexMap<Statistic, IndexMap<String, T>> = IndexMap::new();
    let mut low: IndexSet<String> = IndexSet::new();
    for s in scores {
        if s.pair_count < opts.min_pair_count {
            low.insert(s.concept.clone());
            continue;
        }
        by_stat.entry(s.statistic).or_default().entry(aliases.resolve(&s.concept)).or_insert(s.value);
    }
    out.low_pair_count = low.into_iter().collect();
    let known: IndexSet<String> = scores.iter().map(|s| aliases.resolve(&s.concept)).collect();

    for list in lists {
        let mut seen = IndexSet::new();
        let resolved: Vec<(String, T)> = list
            .scores
            .iter()
            .map(|(c, &v)| (aliases.resolve(c), v))
            .filter(|(k, _)| seen.insert(k.clone()))
            .collect();
        let unmatched: Vec<String> = list
            .scores
            .keys()
            .filter(|c| !known.contains(&aliases.resolve(c)))
            .cloned()
            .collect();
        out.unmatched.insert(list.name.clone(), unmatched);

        for (&stat, values) in &by_stat {
            let (xs, ys): (Vec<T>, Vec<T>) =
                resolved.iter().filter_map(|(k, v)| values.get(k).map(|&s| (s, *v))).unzip();
            let skip = |reason: String| SkippedCorrelation { list: list.name.clone(), layer, statistic: stat, reason };
            if xs.is_empty() {
                out.skipped.push(skip("no concepts shared with the scores".into()));
                continue;
            }
            match correlation(&xs, &ys, opts.method) {
                Ok((rho, p)) => out.reports.push(CorrelationReport {
                    list: list.name.clone(),
                    layer,
                    statistic: stat,
                    method: opts.method,
                    rho,
                    p_value: p,
                    n_concepts: xs.len(),
                    significant: p <= opts.alpha,
                    direction: list.direction,
                }),
                Err(e) => out.skipped.push(skip(e.to_string())),
            }
        }
    }
    out
}

/// Long-format table: one row per (list, layer, statistic).
pub fn correlations_to_csv<T: Scalar>(reports: &[CorrelationReport<T>]) -> String {
    let mut out = String::from("list,layer,statistic,rho,p,n,significant\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.list),
            r.layer,
            r.statistic,
            r.rho,
            r.p_value,
            r.n_concepts,
            r.significant
        );
    }
    out
}
