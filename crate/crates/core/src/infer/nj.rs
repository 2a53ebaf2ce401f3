use super::{assemble, clamp_nonneg, InferError, Internal, Join, Merge, MergeTrace, Method, Sub};
use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;
use crate::tree::PhyloTree;

/// Saitou–Nei neighbor joining with the Q-criterion.
///
/// The unrooted result is rooted at the midpoint of the last edge created.
/// Negative branch lengths are set to zero and counted in the trace; the
/// sibling then takes the whole pair distance.
pub fn neighbor_joining<T: Scalar>(d: &DistanceMatrix<T>) -> Result<(PhyloTree<T>, MergeTrace<T>), InferError> {
    let n = d.len();
    if n < 3 {
        return Err(InferError::TooFewLanguages { method: Method::Nj, required: 3, got: n });
    }
    let (c, order) = d.canonicalized();
    let mut dist: Vec<T> = (0..n * n).map(|k| c.get(k / n, k % n)).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut sub: Vec<Sub> = (0..n).map(Sub::Leaf).collect();
    let mut cluster_id: Vec<usize> = order.clone();
    let mut internals: Vec<Internal<T>> = Vec::with_capacity(n - 2);
    let mut trace = MergeTrace { merges: Vec::with_capacity(n - 1), clamped_negative: 0 };
    let two = T::lit(2.0);
    let mut row_sum = vec![T::zero(); n];

    let mut step = 0;
    while active.len() > 2 {
        let r = T::from_count(active.len());
        for &i in &active {
            row_sum[i] = active.iter().map(|&k| dist[i * n + k]).fold(T::zero(), |s, x| s + x);
        }
        let mut best: Option<(usize, usize, T)> = None;
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai + 1..] {
                let q = (r - two) * dist[i * n + j] - row_sum[i] - row_sum[j];
                if best.is_none_or(|(_, _, b)| q < b) {
                    best = Some((i, j, q));
                }
            }
        }
        let (a, b, _) = best.expect("at least three active nodes");
        let dab = dist[a * n + b];
        let raw_a = dab / two + (row_sum[a] - row_sum[b]) / (two * (r - two));
        let (la, lb) = if raw_a < T::zero() {
            trace.clamped_negative += 1;
            (T::zero(), dab)
        } else if dab - raw_a < T::zero() {
            trace.clamped_negative += 1;
            (dab, T::zero())
        } else {
            (raw_a, dab - raw_a)
        };
        internals.push([(sub[a], la), (sub[b], lb)]);
        trace.merges.push(Merge { left: cluster_id[a], right: cluster_id[b], join: Join::Branches(la, lb) });

        for &k in active.iter().filter(|&&k| k != a && k != b) {
            let v = (dist[a * n + k] + dist[b * n + k] - dab) / two;
            dist[a * n + k] = v;
            dist[k * n + a] = v;
        }
        active.retain(|&k| k != b);
        sub[a] = Sub::Internal(internals.len() - 1);
        cluster_id[a] = n + step;
        step += 1;
    }
    let (a, b) = (active[0], active[1]);
    let half = clamp_nonneg(dist[a * n + b], &mut trace.clamped_negative) / two;
    trace.merges.push(Merge { left: cluster_id[a], right: cluster_id[b], join: Join::Branches(half, half) });
    let tree = assemble(c.labels(), &internals, [(sub[a], half), (sub[b], half)]);
    Ok((tree, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(labels: &[&str], upper: &[f64]) -> DistanceMatrix<f64> {
        let mut it = upper.iter();
        DistanceMatrix::from_fn(labels.iter().map(|s| s.to_string()).collect(), |_, _| *it.next().unwrap()).unwrap()
    }

    fn has_split(tree: &PhyloTree<f64>, side: &[&str]) -> bool {
        let all: std::collections::BTreeSet<String> = tree.leaf_labels().into_iter().map(String::from).collect();
        let s: std::collections::BTreeSet<String> = side.iter().map(|x| x.to_string()).collect();
        let complement: std::collections::BTreeSet<String> = all.difference(&s).cloned().collect();
        let clusters = tree.clusters();
        clusters.contains(&s) || clusters.contains(&complement)
    }

    #[test]
    fn four_point_example() {
        let d = matrix(&["A", "B", "C", "D"], &[3.0, 7.0, 8.0, 6.0, 7.0, 5.0]);
        let (tree, trace) = neighbor_joining(&d).unwrap();
        assert!(has_split(&tree, &["A", "B"]));
        assert_eq!(trace.merges.len(), 3);
        assert_eq!(trace.clamped_negative, 0);
        // Additive input: path lengths in the output reproduce the matrix.
        // Q ties between AB and CD; AB wins on label order. A's pendant edge is 2, B's 1.
        assert_eq!(trace.merges[0].join, Join::Branches(2.0, 1.0));
    }

    #[test]
    fn three_taxa() {
        let d = matrix(&["A", "B", "C"], &[3.0, 4.0, 5.0]);
        let (tree, trace) = neighbor_joining(&d).unwrap();
        assert_eq!(tree.leaf_count(), 3);
        assert!(tree.is_binary());
        // Three-point formulas: a = (3 + 4 - 5) / 2 = 1, b = 2, c = 3.
        assert_eq!(trace.merges[0].join, Join::Branches(1.0, 2.0));
        assert_eq!(trace.merges[1].join, Join::Branches(1.5, 1.5));
        assert!(neighbor_joining(&matrix(&["A", "B"], &[1.0])).is_err());
    }

    #[test]
    fn negative_lengths_are_clamped() {
        // Violates the triangle inequality badly enough to produce a negative branch.
        let d = matrix(&["A", "B", "C", "D"], &[0.1, 9.0, 9.0, 1.0, 1.0, 0.1]);
        let (tree, trace) = neighbor_joining(&d).unwrap();
        assert!(trace.clamped_negative > 0);
        assert!(tree.validate().is_ok());
    }
}
