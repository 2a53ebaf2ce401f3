//! Permutation significance for matrix regression.
//!
//! Permutation `k` is a Fisher–Yates shuffle driven by a ChaCha stream keyed
//! on `(seed, k)`, so every permutation can be generated independently and the
//! result does not depend on how the work is split across threads.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{FitOptions, PredictorSet, PreparedFit, RegressionError, RegressionResult};
use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;

/// Which side of the regression is permuted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationTarget {
    /// Rows and columns of the response matrix.
    #[default]
    Response,
    /// Rows and columns of every predictor matrix, jointly.
    Predictors,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MantelOptions {
    pub permutations: usize,
    pub seed: u64,
    pub target: PermutationTarget,
    pub fit: FitOptions,
}

impl MantelOptions {
    pub fn new(permutations: usize, seed: u64) -> Self {
        Self { permutations, seed, target: PermutationTarget::Response, fit: FitOptions::default() }
    }
}

/// The `index`-th permutation of `0..n` for `seed`.
pub fn permutation_for(seed: u64, index: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

/// Fits the regression, then refits `permutations` times with the response
/// matrix's rows and columns shuffled together. The p-value of each statistic
/// (|coefficient| per predictor, and R²) is `(1 + #{permuted >= observed}) / (1 + permutations)`.
pub fn mantel_permutation_test<T: Scalar>(
    response: &DistanceMatrix<T>,
    predictors: &PredictorSet<T>,
    opts: MantelOptions,
) -> Result<RegressionResult<T>, RegressionError> {
    if opts.permutations < 99 {
        return Err(RegressionError::TooFewPermutations(opts.permutations));
    }
    let prep = PreparedFit::new(response, predictors, opts.fit)?;
    let (beta, r2) = prep.fit(&prep.response);
    let n = response.len();
    let k = beta.len() - 1;

    // Position of pair (i, j), i != j, in the triangle vector.
    let tri = |i: usize, j: usize| {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * (2 * n - a - 1) / 2 + (b - a - 1)
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();

    let tol = T::epsilon().sqrt();
    let at_least = |perm: T, obs: T| perm >= obs - obs.abs() * tol;
    let observed: Vec<T> = beta[1..].iter().map(|b| b.abs()).collect();

    let counts = (0..opts.permutations as u64)
        .into_par_iter()
        .map_init(
            || vec![T::zero(); pairs.len()],
            |y, idx| {
                let mut perm = permutation_for(opts.seed, idx, n);
                if opts.target == PermutationTarget::Predictors {
                    // Shuffling the predictors by π fits the same model as
                    // shuffling the response by π⁻¹.
                    let mut inv = vec![0; n];
                    for (i, &p) in perm.iter().enumerate() {
                        inv[p] = i;
                    }
                    perm = inv;
                }
                for (slot, &(i, j)) in y.iter_mut().zip(&pairs) {
                    *slot = prep.response[tri(perm[i], perm[j])];
                }
                let (b, r2p) = prep.fit(y);
                let mut hits = vec![0u64; k + 1];
                for (h, (bp, &obs)) in hits.iter_mut().zip(b[1..].iter().zip(&observed)) {
                    *h = u64::from(at_least(bp.abs(), obs));
                }
                hits[k] = u64::from(at_least(r2p, r2));
                hits
            },
        )
        .reduce(
            || vec![0u64; k + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let p = |c: u64| (1 + c) as f64 / (1 + opts.permutations) as f64;
    let mut result = prep.result(&beta, r2, 0);
    result.p_values = prep.names.iter().cloned().zip(counts[..k].iter().map(|&c| p(c))).collect();
    result.p_value_r2 = Some(p(counts[k]));
    result.permutations = opts.permutations;
    result.seed = Some(opts.seed);
    result.permutation_target = Some(opts.target);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_keyed() {
        let a = permutation_for(7, 3, 20);
        assert_eq!(a, permutation_for(7, 3, 20));
        assert_ne!(a, permutation_for(7, 4, 20));
        assert_ne!(a, permutation_for(8, 3, 20));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_too_few_permutations() {
        let m = DistanceMatrix::from_fn((0..4).map(|i| i.to_string()).collect(), |i, j| (i + j) as f64).unwrap();
        let mut set = PredictorSet::new(m.labels().to_vec());
        set.insert("x", m.clone()).unwrap();
        assert_eq!(
            mantel_permutation_test(&m, &set, MantelOptions::new(98, 1)),
            Err(RegressionError::TooFewPermutations(98))
        );
    }
}
