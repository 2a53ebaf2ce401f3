//! Brute-force reference implementations used to check the library.
//! Nothing here calls the code under test beyond reading tree structure.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use glossotree::{DistanceMatrix, PhyloTree};
use rand::Rng;

fn adjacency(tree: &PhyloTree<f64>) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); tree.node_count()];
    for id in tree.preorder() {
        if let Some(p) = tree.node(id).parent {
            adj[id].push(p);
            adj[p].push(id);
        }
    }
    adj
}

fn path(adj: &[Vec<usize>], from: usize, to: usize) -> BTreeSet<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut out = BTreeSet::from([to]);
    let mut u = to;
    while u != from {
        u = prev[u];
        out.insert(u);
    }
    out
}

fn leaf_ids(tree: &PhyloTree<f64>) -> HashMap<String, usize> {
    tree.preorder()
        .into_iter()
        .filter(|&id| tree.node(id).is_leaf())
        .filter_map(|id| tree.node(id).label.clone().map(|l| (l, id)))
        .collect()
}

/// Quartet topology by path disjointness in the unrooted tree:
/// `Some(0)` = ab|cd, `Some(1)` = ac|bd, `Some(2)` = ad|bc, `None` = star.
fn quartet(adj: &[Vec<usize>], q: [usize; 4]) -> Option<u8> {
    let [a, b, c, d] = q;
    let splits = [((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))];
    splits
        .iter()
        .position(|&((p, q), (r, s))| path(adj, p, q).is_disjoint(&path(adj, r, s)))
        .map(|i| i as u8)
}

/// `(resolved quartets in reference, of which resolved differently in inferred)`
/// over every 4-subset of the shared leaves.
pub fn gqd_oracle(reference: &PhyloTree<f64>, inferred: &PhyloTree<f64>) -> (u64, u64) {
    let (ra, ia) = (adjacency(reference), adjacency(inferred));
    let (rl, il) = (leaf_ids(reference), leaf_ids(inferred));
    let mut common: Vec<&String> = rl.keys().filter(|l| il.contains_key(*l)).collect();
    common.sort();
    let n = common.len();
    let (mut total, mut dev) = (0, 0);
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    let pick = |m: &HashMap<String, usize>| [a, b, c, d].map(|i| m[common[i]]);
                    let Some(r) = quartet(&ra, pick(&rl)) else { continue };
                    total += 1;
                    if quartet(&ia, pick(&il)) != Some(r) {
                        dev += 1;
                    }
                }
            }
        }
    }
    (total, dev)
}

/// Leaf-to-leaf path lengths for `labels`, by walking parent pointers.
pub fn path_lengths(tree: &PhyloTree<f64>, labels: &[String]) -> Vec<Vec<f64>> {
    let ids = leaf_ids(tree);
    let to_root = |mut u: usize| {
        let mut acc = HashMap::new();
        let mut d = 0.0;
        loop {
            acc.insert(u, d);
            match tree.node(u).parent {
                Some(p) => {
                    d += tree.node(u).length.unwrap_or(0.0);
                    u = p;
                }
                None => return acc,
            }
        }
    };
    let chains: Vec<HashMap<usize, f64>> = labels.iter().map(|l| to_root(ids[l])).collect();
    let mut out = vec![vec![0.0; labels.len()]; labels.len()];
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            // Lowest shared ancestor minimizes the summed distance.
            out[i][j] = chains[i]
                .iter()
                .filter_map(|(u, di)| chains[j].get(u).map(|dj| di + dj))
                .fold(f64::INFINITY, f64::min);
        }
    }
    out
}

/// Pairs `i < j` in row-major order.
pub fn lower_pairs(m: &DistanceMatrix<f64>) -> Vec<f64> {
    let n = m.len();
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| m.get(i, j)).collect()
}

/// Intercept and slopes from the normal equations `XᵀX β = Xᵀy`, solved by
/// Gauss–Jordan elimination with partial pivoting.
pub fn ols_oracle(y: &[f64], cols: &[Vec<f64>]) -> Vec<f64> {
    let p = cols.len() + 1;
    let x = |r: usize, k: usize| if k == 0 { 1.0 } else { cols[k - 1][r] };
    let mut a = vec![vec![0.0; p + 1]; p];
    for r in 0..y.len() {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += x(r, i) * x(r, j);
            }
            a[i][p] += x(r, i) * y[r];
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..p {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..=p {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    (0..p).map(|i| a[i][p] / a[i][i]).collect()
}

/// Mean reciprocal rank of a uniformly random rank among `n`, by simulation.
pub fn random_mrr_monte_carlo<R: Rng>(n: usize, draws: usize, rng: &mut R) -> f64 {
    (0..draws).map(|_| 1.0 / rng.random_range(1..=n) as f64).sum::<f64>() / draws as f64
}

/// One-sample Kolmogorov–Smirnov test against U(0, 1); returns the
/// asymptotic p-value (Stephens' small-sample correction).
pub fn ks_uniform_p(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    let t = d * (n.sqrt() + 0.12 + 0.11 / n.sqrt());
    let p: f64 = (1..=100).map(|k| {
        let k = k as f64;
        2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * t * t).exp()
    }).sum();
    p.clamp(0.0, 1.0)
}
