//! Rooted, labeled trees of arbitrary arity with optional branch lengths.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::scalar::Scalar;

pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("leaf without a label")]
    UnlabeledLeaf,
    #[error("empty leaf label")]
    EmptyLabel,
    #[error("duplicate leaf label {0:?}")]
    DuplicateLeaf(String),
    #[error("negative or non-finite branch length on {0:?}")]
    BadLength(String),
    #[error("no leaves remain after restriction")]
    Empty,
    #[error("unknown leaf {0:?}")]
    UnknownLeaf(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node<T> {
    pub label: Option<String>,
    /// Length of the branch to the parent.
    pub length: Option<T>,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
}

impl<T> Node<T> {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Arena-backed rooted tree. Node 0 is not necessarily the root; use [`PhyloTree::root`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree<T> {
    nodes: Vec<Node<T>>,
    root: NodeId,
}

impl<T: Scalar> PhyloTree<T> {
    /// A tree consisting of a single root node.
    pub fn with_root(label: Option<String>) -> Self {
        Self {
            nodes: vec![Node { label, length: None, children: Vec::new(), parent: None }],
            root: 0,
        }
    }

    pub fn add_child(&mut self, parent: NodeId, label: Option<String>, length: Option<T>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node { label, length, children: Vec::new(), parent: Some(parent) });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node<T> {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node<T> {
        &mut self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Checks leaf labels (present, non-empty, unique) and branch lengths.
    pub fn validate(&self) -> Result<(), TreeError> {
        let mut seen = HashSet::new();
        for id in self.preorder() {
            let n = &self.nodes[id];
            if let Some(l) = n.length {
                if !l.is_finite() || l < T::zero() {
                    return Err(TreeError::BadLength(n.label.clone().unwrap_or_default()));
                }
            }
            if n.is_leaf() {
                let label = n.label.as_deref().ok_or(TreeError::UnlabeledLeaf)?;
                if label.is_empty() {
                    return Err(TreeError::EmptyLabel);
                }
                if !seen.insert(label) {
                    return Err(TreeError::DuplicateLeaf(label.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Nodes reachable from the root, parents before children.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        out
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut order = self.preorder();
        order.reverse();
        order
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder().into_iter().filter(|&id| self.nodes[id].is_leaf()).collect()
    }

    pub fn leaf_labels(&self) -> Vec<&str> {
        self.leaves().into_iter().filter_map(|id| self.nodes[id].label.as_deref()).collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    pub fn leaf_index(&self) -> HashMap<&str, NodeId> {
        self.leaves()
            .into_iter()
            .filter_map(|id| self.nodes[id].label.as_deref().map(|l| (l, id)))
            .collect()
    }

    pub fn find_leaf(&self, label: &str) -> Option<NodeId> {
        self.leaves().into_iter().find(|&id| self.nodes[id].label.as_deref() == Some(label))
    }

    /// True if every internal node has exactly two children.
    pub fn is_binary(&self) -> bool {
        self.preorder().into_iter().all(|id| {
            let c = self.nodes[id].children.len();
            c == 0 || c == 2
        })
    }

    /// Number of branches between the root and every node.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        for id in self.preorder() {
            for &c in &self.nodes[id].children {
                depth[c] = depth[id] + 1;
            }
        }
        depth
    }

    /// Height of each node above its deepest descendant leaf, summing branch
    /// lengths (missing lengths count as zero).
    pub fn heights(&self) -> Vec<T> {
        let mut h = vec![T::zero(); self.nodes.len()];
        for id in self.postorder() {
            let n = &self.nodes[id];
            h[id] = n
                .children
                .iter()
                .map(|&c| h[c] + self.nodes[c].length.unwrap_or_else(T::zero))
                .fold(T::zero(), T::max);
        }
        h
    }

    /// Keeps only the leaves whose labels are in `keep`; prunes empty subtrees
    /// and suppresses nodes left with a single child, summing branch lengths.
    pub fn restrict<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self, TreeError> {
        let keep: HashSet<&str> = keep.iter().map(|s| s.as_ref()).collect();
        let mut alive = vec![false; self.nodes.len()];
        for id in self.postorder() {
            let n = &self.nodes[id];
            alive[id] = if n.is_leaf() {
                n.label.as_deref().is_some_and(|l| keep.contains(l))
            } else {
                n.children.iter().any(|&c| alive[c])
            };
        }
        if !alive[self.root] {
            return Err(TreeError::Empty);
        }
        // Root descends through unary chains; the surviving root keeps the original root's length.
        let mut root = self.root;
        loop {
            let live: Vec<NodeId> = self.nodes[root].children.iter().copied().filter(|&c| alive[c]).collect();
            if live.len() == 1 {
                root = live[0];
            } else {
                break;
            }
        }
        let mut out = PhyloTree::with_root(self.nodes[root].label.clone());
        out.nodes[0].length = self.nodes[self.root].length;
        let mut stack = vec![(root, 0usize)];
        while let Some((src, dst)) = stack.pop() {
            for &c in &self.nodes[src].children {
                if !alive[c] {
                    continue;
                }
                let mut cur = c;
                let mut len = self.nodes[c].length;
                loop {
                    let live: Vec<NodeId> =
                        self.nodes[cur].children.iter().copied().filter(|&g| alive[g]).collect();
                    if live.len() != 1 {
                        break;
                    }
                    cur = live[0];
                    len = add_lengths(len, self.nodes[cur].length);
                }
                let id = out.add_child(dst, self.nodes[cur].label.clone(), len);
                stack.push((cur, id));
            }
        }
        Ok(out)
    }

    /// Re-roots the tree on the branch above `node`, splitting it in half.
    /// The old root is suppressed if it is left with a single child.
    pub fn reroot_above(&self, node: NodeId) -> Self {
        assert!(node != self.root, "cannot re-root above the root");
        let parent = self.nodes[node].parent.expect("non-root node has a parent");
        let n = self.nodes.len();
        let mut adj: Vec<Vec<(NodeId, Option<T>)>> = vec![Vec::new(); n];
        for id in self.preorder() {
            for &c in &self.nodes[id].children {
                adj[id].push((c, self.nodes[c].length));
                adj[c].push((id, self.nodes[c].length));
            }
        }
        let half = self.nodes[node].length.map(|l| l / T::lit(2.0));
        let mut out = PhyloTree::with_root(None);
        let mut stack = Vec::new();
        for (start, from) in [(node, parent), (parent, node)] {
            let id = out.add_child(0, self.nodes[start].label.clone(), half);
            stack.push((start, from, id));
        }
        while let Some((src, from, dst)) = stack.pop() {
            for &(nb, len) in &adj[src] {
                if nb == from {
                    continue;
                }
                let id = out.add_child(dst, self.nodes[nb].label.clone(), len);
                stack.push((nb, src, id));
            }
        }
        let labels: Vec<String> = self.leaf_labels().into_iter().map(str::to_string).collect();
        out.restrict(&labels).expect("re-rooted tree keeps every leaf")
    }

    /// Order-independent topology key: children sorted, branch lengths ignored.
    /// Two trees are isomorphic as rooted trees iff their keys are equal.
    pub fn topology_key(&self) -> String {
        self.key_of(self.root, false)
    }

    /// Like [`topology_key`](Self::topology_key) but including branch lengths.
    pub fn key_with_lengths(&self) -> String {
        self.key_of(self.root, true)
    }

    fn key_of(&self, id: NodeId, lengths: bool) -> String {
        let n = &self.nodes[id];
        let mut s = String::new();
        if !n.is_leaf() {
            let mut parts: Vec<String> = n.children.iter().map(|&c| self.key_of(c, lengths)).collect();
            parts.sort();
            s.push('(');
            s.push_str(&parts.join(","));
            s.push(')');
        }
        if let Some(l) = &n.label {
            s.push_str(&format!("{l:?}"));
        }
        if lengths {
            if let Some(len) = n.length {
                s.push_str(&format!(":{len}"));
            }
        }
        s
    }

    /// Set of non-trivial splits (clusters of leaf labels) below the root.
    pub fn clusters(&self) -> BTreeSet<BTreeSet<String>> {
        let mut sets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); self.nodes.len()];
        let mut out = BTreeSet::new();
        for id in self.postorder() {
            let n = &self.nodes[id];
            if n.is_leaf() {
                if let Some(l) = &n.label {
                    sets[id].insert(l.clone());
                }
            } else {
                let merged: BTreeSet<String> =
                    n.children.iter().flat_map(|&c| sets[c].iter().cloned()).collect();
                sets[id] = merged;
                if id != self.root {
                    out.insert(sets[id].clone());
                }
            }
        }
        out
    }
}

fn add_lengths<T: Scalar>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        (x, None) => x,
        (None, y) => y,
    }
}
