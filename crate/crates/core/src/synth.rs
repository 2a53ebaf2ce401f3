//! Synthetic trees, matrices and embeddings with known ground truth.
//!
//! Used by the test suites and the bundled fixtures. Every generator takes the
//! RNG explicitly so that fixtures are reproducible from a seed.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::embedding::{EmbeddingTable, Layer};
use crate::ingest::{Coordinates, Direction, RankedList};
use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;
use crate::tree::{NodeId, PhyloTree};

/// `t01`, `t02`, … zero-padded so that lexicographic and numeric order agree.
pub fn leaf_names(n: usize) -> Vec<String> {
    let w = n.to_string().len().max(2);
    (1..=n).map(|i| format!("t{i:0w$}")).collect()
}

pub fn concept_names(n: usize) -> Vec<String> {
    let w = n.to_string().len().max(3);
    (0..n).map(|i| format!("c{i:0w$}")).collect()
}

fn branch<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.random_range(0.1..1.0))
}

fn label_leaves<T: Scalar, R: Rng + ?Sized>(tree: &mut PhyloTree<T>, rng: &mut R) {
    let leaves = tree.leaves();
    let mut names = leaf_names(leaves.len());
    names.shuffle(rng);
    for (id, name) in leaves.into_iter().zip(names) {
        tree.node_mut(id).label = Some(name);
    }
}

/// Rooted binary tree on `n ≥ 2` leaves grown by repeatedly splitting a
/// uniformly chosen leaf; branch lengths uniform in [0.1, 1).
pub fn random_binary_tree<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> PhyloTree<T> {
    assert!(n >= 2, "need at least two leaves");
    let mut tree = PhyloTree::with_root(None);
    let mut tips = Vec::with_capacity(n);
    for _ in 0..2 {
        let len = branch(rng);
        tips.push(tree.add_child(0, None, Some(len)));
    }
    while tips.len() < n {
        let at = tips.swap_remove(rng.random_range(0..tips.len()));
        for _ in 0..2 {
            let len = branch(rng);
            tips.push(tree.add_child(at, None, Some(len)));
        }
    }
    label_leaves(&mut tree, rng);
    tree
}

/// A random binary tree whose internal (non-root) branches are each
/// contracted with probability `collapse`, producing polytomies.
pub fn random_mary_tree<T: Scalar, R: Rng + ?Sized>(n: usize, collapse: f64, rng: &mut R) -> PhyloTree<T> {
    let bin: PhyloTree<T> = random_binary_tree(n, rng);
    let mut out = PhyloTree::with_root(None);
    // (node in `bin`, parent in `out`, length carried over from contracted branches)
    let mut stack: Vec<(NodeId, NodeId, T)> =
        bin.node(bin.root()).children.iter().rev().map(|&c| (c, out.root(), T::zero())).collect();
    while let Some((src, dst, extra)) = stack.pop() {
        let node = bin.node(src);
        let len = node.length.unwrap_or_else(T::zero) + extra;
        if !node.is_leaf() && rng.random_bool(collapse) {
            stack.extend(node.children.iter().rev().map(|&c| (c, dst, len)));
            continue;
        }
        let id = out.add_child(dst, node.label.clone(), Some(len));
        stack.extend(node.children.iter().rev().map(|&c| (c, id, T::zero())));
    }
    out
}

/// Ultrametric binary tree: random pairs of clusters coalesce at strictly
/// increasing heights; all leaves sit at height 0.
pub fn random_ultrametric_tree<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> PhyloTree<T> {
    assert!(n >= 2, "need at least two leaves");
    let mut children: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut height: Vec<f64> = vec![0.0; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut t = 0.0;
    while active.len() > 1 {
        t += rng.random_range(0.05..0.5);
        let a = active.swap_remove(rng.random_range(0..active.len()));
        let b = active.swap_remove(rng.random_range(0..active.len()));
        children.push(Some((a, b)));
        height.push(t);
        active.push(children.len() - 1);
    }
    let top = active[0];
    let mut tree = PhyloTree::with_root(None);
    let mut stack = vec![(top, tree.root())];
    while let Some((src, dst)) = stack.pop() {
        if let Some((a, b)) = children[src] {
            for c in [a, b] {
                let id = tree.add_child(dst, None, Some(T::lit(height[src] - height[c])));
                stack.push((c, id));
            }
        }
    }
    label_leaves(&mut tree, rng);
    tree
}

/// Leaf-to-leaf path lengths, labels in sorted order. Missing branch lengths count as 0.
pub fn patristic_matrix<T: Scalar>(tree: &PhyloTree<T>) -> DistanceMatrix<T> {
    let mut dist = vec![T::zero(); tree.node_count()];
    for id in tree.preorder() {
        for &c in &tree.node(id).children {
            dist[c] = dist[id] + tree.node(c).length.unwrap_or_else(T::zero);
        }
    }
    let depth = tree.depths();
    let lca = |mut a: NodeId, mut b: NodeId| {
        while a != b {
            if depth[a] >= depth[b] {
                a = tree.node(a).parent.expect("walks stay below the root");
            } else {
                b = tree.node(b).parent.expect("walks stay below the root");
            }
        }
        a
    };
    let mut leaves: Vec<(String, NodeId)> =
        tree.leaves().into_iter().map(|id| (tree.node(id).label.clone().unwrap_or_default(), id)).collect();
    leaves.sort();
    let ids: Vec<NodeId> = leaves.iter().map(|l| l.1).collect();
    DistanceMatrix::from_fn(leaves.into_iter().map(|l| l.0).collect(), |i, j| {
        let (a, b) = (ids[i], ids[j]);
        dist[a] + dist[b] - T::lit(2.0) * dist[lca(a, b)]
    })
    .expect("path lengths form a valid distance matrix")
}

/// Parameters for [`evolve_concepts`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub dim: usize,
    /// Per-concept drift rate: standard deviation per unit branch length.
    pub rates: Vec<f64>,
    /// Independent Gaussian noise added to every leaf vector.
    pub noise: f64,
    pub layer: Layer,
}

/// Brownian motion of each concept's vector down the tree: the root vector is
/// standard normal, and each branch of length ℓ adds N(0, rate²·ℓ) per component.
/// Returns one table per leaf, in sorted label order.
pub fn evolve_concepts<T: Scalar, R: Rng + ?Sized>(
    tree: &PhyloTree<T>,
    concepts: &[String],
    params: &Evolution,
    rng: &mut R,
) -> Vec<EmbeddingTable<T>> {
    assert_eq!(concepts.len(), params.rates.len(), "one rate per concept");
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let order = tree.preorder();
    let mut leaves: Vec<(String, NodeId)> =
        tree.leaves().into_iter().map(|id| (tree.node(id).label.clone().unwrap_or_default(), id)).collect();
    leaves.sort();
    let mut tables: Vec<EmbeddingTable<T>> = leaves
        .iter()
        .map(|(l, _)| EmbeddingTable::new(l.clone(), params.layer, params.dim).expect("positive dimension"))
        .collect();
    let mut state = vec![vec![0.0f64; params.dim]; tree.node_count()];
    for (c, &rate) in concepts.iter().zip(&params.rates) {
        for &id in &order {
            match tree.node(id).parent {
                None => {
                    // Fixed root norm √dim, so a concept's similarity level
                    // depends on its rate rather than on its starting length.
                    state[id].iter_mut().for_each(|x| *x = std.sample(rng));
                    let norm = state[id].iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                    let scale = (params.dim as f64).sqrt() / norm;
                    state[id].iter_mut().for_each(|x| *x *= scale);
                }
                Some(p) => {
                    let sd = rate * tree.node(id).length.map_or(0.0, |l| l.to_f64_lossless()).sqrt();
                    for k in 0..params.dim {
                        state[id][k] = state[p][k] + sd * std.sample(rng);
                    }
                }
            }
        }
        for ((_, leaf), table) in leaves.iter().zip(&mut tables) {
            let v: Vec<T> = state[*leaf].iter().map(|&x| T::lit(x + params.noise * std.sample(rng))).collect();
            table.insert(c.clone(), &v).expect("fresh concept of the right dimension");
        }
    }
    tables
}

/// Stability list whose score falls with the drift rate (so it is oriented
/// `HigherMoreStable`), perturbed by multiplicative noise of relative size `jitter`.
pub fn stability_list<T: Scalar, R: Rng + ?Sized>(
    name: &str,
    concepts: &[String],
    rates: &[f64],
    jitter: f64,
    rng: &mut R,
) -> RankedList<T> {
    let scores = concepts
        .iter()
        .zip(rates)
        .map(|(c, &r)| (c.clone(), T::lit((1.0 / r) * (1.0 + jitter * rng.random_range(-1.0..1.0)))))
        .collect();
    RankedList { name: name.to_string(), direction: Direction::HigherMoreStable, scores }
}

/// Uniform latitudes in [−60, 70] and longitudes in [−180, 180).
pub fn random_coordinates<T: Scalar, R: Rng + ?Sized>(labels: &[String], rng: &mut R) -> Coordinates<T> {
    labels
        .iter()
        .map(|l| (l.clone(), (T::lit(rng.random_range(-60.0..70.0)), T::lit(rng.random_range(-180.0..180.0)))))
        .collect::<IndexMap<_, _>>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_have_the_requested_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..20 {
            let b: PhyloTree<f64> = random_binary_tree(n, &mut rng);
            assert_eq!(b.leaf_count(), n);
            assert!(b.is_binary());
            b.validate().unwrap();
            let u: PhyloTree<f64> = random_ultrametric_tree(n, &mut rng);
            assert!(u.is_binary());
            let h = u.heights();
            for leaf in u.leaves() {
                // every root-to-leaf path has the same length
                let mut s = 0.0;
                let mut cur = leaf;
                while let Some(p) = u.node(cur).parent {
                    s += u.node(cur).length.unwrap();
                    cur = p;
                }
                assert!((s - h[u.root()]).abs() < 1e-9);
            }
            let m: PhyloTree<f64> = random_mary_tree(n, 0.5, &mut rng);
            assert_eq!(m.leaf_count(), n);
            m.validate().unwrap();
        }
    }

    #[test]
    fn patristic_distances() {
        let t: PhyloTree<f64> = crate::ingest::parse_newick("((a:1,b:2):3,c:4);").unwrap();
        let d = patristic_matrix(&t);
        assert_eq!(d.get_by_label("a", "b"), Some(3.0));
        assert_eq!(d.get_by_label("a", "c"), Some(8.0));
        assert_eq!(d.get_by_label("b", "c"), Some(9.0));
    }

    #[test]
    fn evolution_is_seeded() {
        let tree: PhyloTree<f64> = random_ultrametric_tree(5, &mut ChaCha8Rng::seed_from_u64(3));
        let concepts = concept_names(4);
        let p = Evolution { dim: 3, rates: vec![0.5; 4], noise: 0.01, layer: Layer::Index(0) };
        let a = evolve_concepts(&tree, &concepts, &p, &mut ChaCha8Rng::seed_from_u64(9));
        let b = evolve_concepts(&tree, &concepts, &p, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert_eq!(a[0].len(), 4);
        assert_eq!(a[0].language(), "t01");
    }
}
