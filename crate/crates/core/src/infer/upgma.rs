use super::{assemble, clamp_nonneg, InferError, Internal, Join, Merge, MergeTrace, Method, Sub};
use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;
use crate::tree::PhyloTree;

/// Average-linkage clustering. A merge sits at half the size-weighted mean
/// distance between the two clusters.
pub fn upgma<T: Scalar>(d: &DistanceMatrix<T>) -> Result<(PhyloTree<T>, MergeTrace<T>), InferError> {
    let n = d.len();
    if n < 2 {
        return Err(InferError::TooFewLanguages { method: Method::Upgma, required: 2, got: n });
    }
    let (c, order) = d.canonicalized();
    let mut dist: Vec<T> = (0..n * n).map(|k| c.get(k / n, k % n)).collect();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut height = vec![T::zero(); n];
    let mut sub: Vec<Sub> = (0..n).map(Sub::Leaf).collect();
    let mut cluster_id: Vec<usize> = order.clone();
    let mut internals: Vec<Internal<T>> = Vec::with_capacity(n - 1);
    let mut trace = MergeTrace { merges: Vec::with_capacity(n - 1), clamped_negative: 0 };

    for step in 0..n - 1 {
        let mut best: Option<(usize, usize, T)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in ((i + 1)..n).filter(|&j| active[j]) {
                let v = dist[i * n + j];
                if best.is_none_or(|(_, _, b)| v < b) {
                    best = Some((i, j, v));
                }
            }
        }
        let (a, b, dab) = best.expect("at least two active clusters");
        let h = dab / T::lit(2.0);
        let la = clamp_nonneg(h - height[a], &mut trace.clamped_negative);
        let lb = clamp_nonneg(h - height[b], &mut trace.clamped_negative);
        internals.push([(sub[a], la), (sub[b], lb)]);
        trace.merges.push(Merge { left: cluster_id[a], right: cluster_id[b], join: Join::Height(h) });

        let (sa, sb) = (T::from_count(size[a]), T::from_count(size[b]));
        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let v = (sa * dist[a * n + k] + sb * dist[b * n + k]) / (sa + sb);
            dist[a * n + k] = v;
            dist[k * n + a] = v;
        }
        active[b] = false;
        size[a] += size[b];
        height[a] = h.max(height[a]).max(height[b]);
        sub[a] = Sub::Internal(internals.len() - 1);
        cluster_id[a] = n + step;
    }
    let root = internals.pop().expect("n >= 2 gives at least one merge");
    let tree = assemble(c.labels(), &internals, root);
    Ok((tree, trace))
}
