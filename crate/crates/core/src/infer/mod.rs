//! Distance-based tree inference.
//!
//! Both methods first reorder the matrix by sorted label, then break ties in
//! the selection criterion by the lexicographically smallest pair of cluster
//! slots. A merged cluster occupies the slot of its lower-indexed part, so a
//! slot index is always the smallest sorted-label index in its cluster and
//! the output does not depend on the input label order.

mod nj;
mod upgma;

pub use nj::neighbor_joining;
pub use upgma::upgma;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::matrix::DistanceMatrix;
use crate::scalar::Scalar;
use crate::tree::{NodeId, PhyloTree};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferError {
    #[error("{method} needs at least {required} languages, got {got}")]
    TooFewLanguages { method: Method, required: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Upgma,
    Nj,
}

impl Method {
    pub fn infer<T: Scalar>(self, d: &DistanceMatrix<T>) -> Result<(PhyloTree<T>, MergeTrace<T>), InferError> {
        match self {
            Method::Upgma => upgma(d),
            Method::Nj => neighbor_joining(d),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Upgma => "UPGMA",
            Method::Nj => "NJ",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upgma" => Ok(Method::Upgma),
            "nj" | "neighbor_joining" | "neighbor-joining" => Ok(Method::Nj),
            other => Err(format!("unknown inference method {other:?}")),
        }
    }
}

/// How two clusters were joined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Join<T> {
    /// UPGMA: height of the new node above the leaves.
    Height(T),
    /// NJ: branch lengths from the new node to the left and right cluster.
    Branches(T, T),
}

/// One merge. Leaves are identified by their index in the input matrix;
/// the cluster created by merge `s` has ID `M + s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge<T> {
    pub left: usize,
    pub right: usize,
    pub join: Join<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeTrace<T> {
    pub merges: Vec<Merge<T>>,
    /// Branch lengths that came out negative and were set to zero.
    pub clamped_negative: usize,
}

/// Subtree reference used while assembling the output tree.
#[derive(Debug, Clone, Copy)]
enum Sub {
    /// Index into the sorted label list.
    Leaf(usize),
    /// Index into the internal-node list.
    Internal(usize),
}

type Internal<T> = [(Sub, T); 2];

fn assemble<T: Scalar>(labels: &[String], internals: &[Internal<T>], root: Internal<T>) -> PhyloTree<T> {
    let mut tree = PhyloTree::with_root(None);
    let mut stack: Vec<(NodeId, Sub, T)> = root.iter().rev().map(|&(s, l)| (tree.root(), s, l)).collect();
    while let Some((parent, sub, len)) = stack.pop() {
        match sub {
            Sub::Leaf(i) => {
                tree.add_child(parent, Some(labels[i].clone()), Some(len));
            }
            Sub::Internal(k) => {
                let id = tree.add_child(parent, None, Some(len));
                stack.extend(internals[k].iter().rev().map(|&(s, l)| (id, s, l)));
            }
        }
    }
    tree
}

fn clamp_nonneg<T: Scalar>(x: T, clamped: &mut usize) -> T {
    if x < T::zero() {
        *clamped += 1;
        T::zero()
    } else {
        x
    }
}
