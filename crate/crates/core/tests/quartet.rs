#[path = "common/oracles.rs"]
mod oracles;

use glossotree::quartet::TreeMetricError;
use glossotree::synth::{random_binary_tree, random_mary_tree};
use glossotree::{gqd, PhyloTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_restriction_oracle_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 150 {
        let n = rng.random_range(4..=11);
        let reference: PhyloTree<f64> = random_mary_tree(n, rng.random_range(0.0..0.6), &mut rng);
        let inferred: PhyloTree<f64> = random_binary_tree(n + rng.random_range(0..2), &mut rng);
        let (total, dev) = oracles::gqd_oracle(&reference, &inferred);
        match gqd(&reference, &inferred) {
            Ok(r) => {
                assert_eq!((r.total_butterflies_in_reference, r.deviating), (total, dev));
                assert_eq!(r.gqd, dev as f64 / total as f64);
                checked += 1;
            }
            Err(TreeMetricError::NoButterflies) => assert_eq!(total, 0),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn partial_overlap_uses_shared_leaves_only() {
    let reference: PhyloTree<f64> = glossotree::ingest::parse_newick("((a,b),(c,d),(e,x));").unwrap();
    let inferred: PhyloTree<f64> = glossotree::ingest::parse_newick("((a,c),(b,d),(e,y));").unwrap();
    let r = gqd(&reference, &inferred).unwrap();
    assert_eq!(r.dropped_from_reference, ["x"]);
    assert_eq!(r.dropped_from_inferred, ["y"]);
    assert_eq!(r.common_leaf_count, 5);
    let (total, dev) = oracles::gqd_oracle(&reference, &inferred);
    assert_eq!((r.total_butterflies_in_reference, r.deviating), (total, dev));
}

#[test]
fn identical_trees_have_zero_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let t: PhyloTree<f64> = random_binary_tree(rng.random_range(4..20), &mut rng);
        assert_eq!(gqd(&t, &t).unwrap().gqd, 0.0);
    }
}
