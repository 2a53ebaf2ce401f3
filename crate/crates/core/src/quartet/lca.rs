//! Lowest common ancestors in O(1) per query via an Euler tour and a sparse
//! table of range minima over tour depths.

use crate::scalar::Scalar;
use crate::tree::{NodeId, PhyloTree};

pub struct EulerLca {
    tour: Vec<NodeId>,
    tour_depth: Vec<u32>,
    first: Vec<usize>,
    depth: Vec<u32>,
    // table[k][i] = tour index of the shallowest entry in tour[i .. i + 2^k]
    table: Vec<Vec<u32>>,
}

impl EulerLca {
    pub fn new<T: Scalar>(tree: &PhyloTree<T>) -> Self {
        let n = tree.node_count();
        let mut tour = Vec::with_capacity(2 * n);
        let mut tour_depth = Vec::with_capacity(2 * n);
        let mut first = vec![usize::MAX; n];
        let mut depth = vec![0u32; n];

        // Iterative DFS: (node, next child position)
        let mut stack: Vec<(NodeId, usize)> = vec![(tree.root(), 0)];
        first[tree.root()] = 0;
        tour.push(tree.root());
        tour_depth.push(0);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let children = &tree.node(node).children;
            if *next < children.len() {
                let c = children[*next];
                *next += 1;
                depth[c] = depth[node] + 1;
                first[c] = tour.len();
                tour.push(c);
                tour_depth.push(depth[c]);
                stack.push((c, 0));
            } else {
                stack.pop();
                if let Some(&(parent, _)) = stack.last() {
                    tour.push(parent);
                    tour_depth.push(depth[parent]);
                }
            }
        }

        let m = tour.len();
        let levels = usize::BITS as usize - m.leading_zeros() as usize;
        let mut table: Vec<Vec<u32>> = Vec::with_capacity(levels);
        table.push((0..m as u32).collect());
        for k in 1..levels {
            let half = 1 << (k - 1);
            let prev = &table[k - 1];
            let row: Vec<u32> = (0..=m - (1 << k))
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + half]);
                    if tour_depth[b as usize] < tour_depth[a as usize] { b } else { a }
                })
                .collect();
            table.push(row);
        }
        Self { tour, tour_depth, first, depth, table }
    }

    pub fn lca(&self, u: NodeId, v: NodeId) -> NodeId {
        let (mut l, mut r) = (self.first[u], self.first[v]);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let len = r - l + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let a = self.table[k][l];
        let b = self.table[k][r + 1 - (1 << k)];
        let best = if self.tour_depth[b as usize] < self.tour_depth[a as usize] { b } else { a };
        self.tour[best as usize]
    }

    /// Number of branches from the root to `u`.
    pub fn depth(&self, u: NodeId) -> u32 {
        self.depth[u]
    }

    pub fn lca_depth(&self, u: NodeId, v: NodeId) -> u32 {
        self.depth[self.lca(u, v)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_newick;

    fn naive_lca(tree: &PhyloTree<f64>, u: NodeId, v: NodeId) -> NodeId {
        let mut anc = std::collections::HashSet::new();
        let mut x = Some(u);
        while let Some(n) = x {
            anc.insert(n);
            x = tree.node(n).parent;
        }
        let mut y = v;
        while !anc.contains(&y) {
            y = tree.node(y).parent.unwrap();
        }
        y
    }

    #[test]
    fn agrees_with_parent_walk() {
        let tree: PhyloTree<f64> = parse_newick("((a,(b,c)),(d,(e,f,g)),h);").unwrap();
        let lca = EulerLca::new(&tree);
        for u in 0..tree.node_count() {
            for v in 0..tree.node_count() {
                assert_eq!(lca.lca(u, v), naive_lca(&tree, u, v), "{u} {v}");
            }
        }
        assert_eq!(lca.depth(tree.find_leaf("b").unwrap()), 3);
    }

    #[test]
    fn single_node_tree() {
        let tree = PhyloTree::<f64>::with_root(Some("x".into()));
        let lca = EulerLca::new(&tree);
        assert_eq!(lca.lca(0, 0), 0);
    }
}
