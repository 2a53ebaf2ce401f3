//! Genetic and geographic predictor distances.

use thiserror::Error;

use crate::matrix::{DistanceMatrix, MatrixError};
use crate::quartet::EulerLca;
use crate::scalar::Scalar;
use crate::tree::PhyloTree;

/// Mean Earth radius used by the haversine formula.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictorError {
    #[error("label {0:?} is not a leaf of the tree")]
    UnknownLeaf(String),
    #[error("coordinates out of range: ({0}, {1})")]
    OutOfRange(f64, f64),
    #[error("no coordinates for {0:?}")]
    MissingCoordinates(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Share of non-shared branches on the root-to-tip paths of two leaves:
/// `(depth(i) + depth(j) - 2 * depth(lca)) / (depth(i) + depth(j))`, where depths
/// count branches from the root.
pub fn glottolog_genetic_distance<T: Scalar>(tree: &PhyloTree<T>, i: &str, j: &str) -> Result<T, PredictorError> {
    let a = tree.find_leaf(i).ok_or_else(|| PredictorError::UnknownLeaf(i.to_string()))?;
    let b = tree.find_leaf(j).ok_or_else(|| PredictorError::UnknownLeaf(j.to_string()))?;
    let lca = EulerLca::new(tree);
    Ok(genetic_from_depths(lca.depth(a), lca.depth(b), lca.lca_depth(a, b)))
}

fn genetic_from_depths<T: Scalar>(di: u32, dj: u32, shared: u32) -> T {
    let total = di + dj;
    if total == 0 {
        return T::zero();
    }
    T::from_count((total - 2 * shared) as usize) / T::from_count(total as usize)
}

/// Genetic distances between the given leaves. Labels missing from the tree are skipped.
pub fn genetic_distance_matrix<T: Scalar>(tree: &PhyloTree<T>, labels: &[String]) -> Result<DistanceMatrix<T>, PredictorError> {
    let lca = EulerLca::new(tree);
    let index = tree.leaf_index();
    let kept: Vec<(String, usize)> = labels
        .iter()
        .filter_map(|l| index.get(l.as_str()).map(|&id| (l.clone(), id)))
        .collect();
    let ids: Vec<usize> = kept.iter().map(|(_, id)| *id).collect();
    let m = DistanceMatrix::from_fn(kept.into_iter().map(|(l, _)| l).collect(), |i, j| {
        genetic_from_depths(lca.depth(ids[i]), lca.depth(ids[j]), lca.lca_depth(ids[i], ids[j]))
    })?;
    Ok(m)
}

/// Haversine great-circle distance in kilometres between (lat, lon) points in degrees.
pub fn great_circle_distance<T: Scalar>(p1: (T, T), p2: (T, T)) -> Result<T, PredictorError> {
    for &(lat, lon) in &[p1, p2] {
        if !(lat.abs() <= T::lit(90.0)) || !(lon.abs() <= T::lit(180.0)) {
            return Err(PredictorError::OutOfRange(lat.to_f64_lossless(), lon.to_f64_lossless()));
        }
    }
    let (phi1, phi2) = (p1.0.to_radians(), p2.0.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (p2.1 - p1.1).to_radians();
    let two = T::lit(2.0);
    let h = (dphi / two).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / two).sin().powi(2);
    let h = h.max(T::zero()).min(T::one());
    let c = two * h.sqrt().atan2((T::one() - h).sqrt());
    Ok(T::lit(EARTH_RADIUS_KM) * c)
}

/// Geographic distances between the given languages.
pub fn geographic_distance_matrix<T: Scalar>(
    coords: &indexmap::IndexMap<String, (T, T)>,
    labels: &[String],
) -> Result<DistanceMatrix<T>, PredictorError> {
    let pts: Vec<(T, T)> = labels
        .iter()
        .map(|l| coords.get(l).copied().ok_or_else(|| PredictorError::MissingCoordinates(l.clone())))
        .collect::<Result<_, _>>()?;
    let mut err = None;
    let m = DistanceMatrix::from_fn(labels.to_vec(), |i, j| match great_circle_distance(pts[i], pts[j]) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            T::zero()
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_newick;
    use std::f64::consts::PI;

    #[test]
    fn genetic_examples() {
        let t: PhyloTree<f64> = parse_newick("(((a,b),c),(d,e));").unwrap();
        assert_eq!(glottolog_genetic_distance(&t, "a", "a").unwrap(), 0.0);
        // a and b: depth 3 each, LCA at depth 2 -> (6 - 4) / 6
        assert_eq!(glottolog_genetic_distance(&t, "a", "b").unwrap(), 2.0 / 6.0);
        // c (depth 2) and d (depth 2), LCA is the root -> 1
        assert_eq!(glottolog_genetic_distance(&t, "c", "d").unwrap(), 1.0);
        assert!(glottolog_genetic_distance(&t, "a", "z").is_err());

        let siblings: PhyloTree<f64> = parse_newick("((x,y),(z,w));").unwrap();
        assert_eq!(glottolog_genetic_distance(&siblings, "x", "y").unwrap(), 0.5);
        let disjoint: PhyloTree<f64> = parse_newick("(((p,q),r),(s,t));").unwrap();
        assert_eq!(glottolog_genetic_distance(&disjoint, "p", "s").unwrap(), 1.0);
    }

    #[test]
    fn genetic_matrix_matches_pairwise() {
        let t: PhyloTree<f64> = parse_newick("(((a,b),c),(d,e,f));").unwrap();
        let labels: Vec<String> = ["a", "c", "f", "zz"].iter().map(|s| s.to_string()).collect();
        let m = genetic_distance_matrix(&t, &labels).unwrap();
        assert_eq!(m.labels(), &["a", "c", "f"]);
        assert_eq!(m.get(0, 2), glottolog_genetic_distance(&t, "a", "f").unwrap());
        assert_eq!(m.get(0, 1), glottolog_genetic_distance(&t, "c", "a").unwrap());
    }

    #[test]
    fn haversine_examples() {
        assert_eq!(great_circle_distance((10.0, 20.0), (10.0, 20.0)).unwrap(), 0.0);
        let half = PI * EARTH_RADIUS_KM;
        assert!((great_circle_distance((0.0, 0.0), (0.0, 180.0)).unwrap() - half).abs() < 1e-9);
        assert!((great_circle_distance((90.0, 0.0), (-90.0, 0.0)).unwrap() - half).abs() < 1e-9);
        assert!((half - 20015.1).abs() < 0.1);
        assert!(great_circle_distance((91.0, 0.0), (0.0, 0.0)).is_err());
        assert!(great_circle_distance((0.0, 0.0), (0.0, -180.5)).is_err());
    }
}
