#[path = "common/oracles.rs"]
mod oracles;

use glossotree::synth::{patristic_matrix, random_binary_tree, random_ultrametric_tree};
use glossotree::{gqd, Method, PhyloTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn nj_recovers_additive_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let truth: PhyloTree<f64> = random_binary_tree(rng.random_range(4..=16), &mut rng);
        let d = patristic_matrix(&truth);
        let (tree, _) = Method::Nj.infer(&d).unwrap();
        assert_eq!(gqd(&truth, &tree).unwrap().gqd, 0.0);
        let got = oracles::path_lengths(&tree, d.labels());
        for (i, row) in got.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((v - d.get(i, j)).abs() < 1e-9, "path {i}-{j}: {v} vs {}", d.get(i, j));
            }
        }
    }
}

#[test]
fn upgma_recovers_ultrametric_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..60 {
        let truth: PhyloTree<f64> = random_ultrametric_tree(rng.random_range(3..=16), &mut rng);
        let d = patristic_matrix(&truth);
        let (tree, _) = Method::Upgma.infer(&d).unwrap();
        assert_eq!(tree.clusters(), truth.clusters());
        let got = oracles::path_lengths(&tree, d.labels());
        let want = oracles::path_lengths(&truth, d.labels());
        for (g, w) in got.iter().flatten().zip(want.iter().flatten()) {
            assert!((g - w).abs() < 1e-9);
        }
    }
}

#[test]
fn inference_ignores_input_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let truth: PhyloTree<f64> = random_binary_tree(10, &mut rng);
    let d = patristic_matrix(&truth);
    let order: Vec<usize> = (0..d.len()).rev().collect();
    let shuffled = d.permuted(&order);
    for m in [Method::Upgma, Method::Nj] {
        let (a, _) = m.infer(&d).unwrap();
        let (b, _) = m.infer(&shuffled).unwrap();
        assert_eq!(a.to_newick(), b.to_newick(), "{m}");
    }
}
