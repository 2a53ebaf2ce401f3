//! Writes a complete synthetic input set with a known generating tree.

use std::fmt::Write as _;
use std::path::Path;

use glossotree::ingest::vec_file_name;
use glossotree::regression::{genetic_distance_matrix, geographic_distance_matrix};
use glossotree::synth::{
    concept_names, evolve_concepts, random_coordinates, random_ultrametric_tree, stability_list, Evolution,
};
use glossotree::{EmbeddingTable, Layer, PhyloTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pipeline::write_file;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub languages: usize,
    pub concepts: usize,
    pub dim: usize,
    /// Index layers `0..layers` are written; each is an independent draw
    /// with leaf noise growing by `noise` per layer.
    pub layers: u32,
    pub noise: f64,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self { languages: 12, concepts: 100, dim: 24, layers: 2, noise: 0.05, seed: 2024 }
    }
}

/// Six significant digits keep the text files small; the rounding is far
/// below the generating noise.
fn rounded(t: &EmbeddingTable<f64>) -> EmbeddingTable<f64> {
    let mut out = EmbeddingTable::new(t.language(), t.layer(), t.dim()).expect("same dimension");
    for (c, v) in t.iter() {
        let r: Vec<f64> = v.iter().map(|x| format!("{x:.5e}").parse().expect("formatted float parses")).collect();
        out.insert(c, &r).expect("same shape");
    }
    out
}

/// Writes the fixture into `dir` and returns the generating tree.
pub fn write_fixture(dir: &Path, spec: &FixtureSpec) -> Result<PhyloTree<f64>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tree: PhyloTree<f64> = random_ultrametric_tree(spec.languages, &mut rng);
    let mut languages: Vec<String> = tree.leaf_labels().into_iter().map(String::from).collect();
    languages.sort();
    let concepts = concept_names(spec.concepts);
    let rates: Vec<f64> = (0..spec.concepts).map(|_| rng.random_range(0.05..0.5)).collect();

    write_file(dir, "tree.nwk", &format!("{}\n", tree.to_newick()))?;

    let mut list = format!("concept\t{}\n", languages.join("\t"));
    for c in &concepts {
        list.push_str(c);
        for l in &languages {
            let _ = write!(list, "\t{l}_{c}");
        }
        list.push('\n');
    }
    write_file(dir, "concepts.tsv", &list)?;

    for k in 0..spec.layers {
        let params = Evolution { dim: spec.dim, rates: rates.clone(), noise: spec.noise * f64::from(k + 1), layer: Layer::Index(k) };
        for t in evolve_concepts(&tree, &concepts, &params, &mut rng) {
            write_file(dir, &format!("embeddings/{}", vec_file_name(t.language(), t.layer())), &rounded(&t).to_vec_text())?;
        }
    }

    let coords = random_coordinates::<f64, _>(&languages, &mut rng);
    let mut csv = String::from("language,lat,lon\n");
    for (l, (lat, lon)) in &coords {
        let _ = writeln!(csv, "{l},{lat:.4},{lon:.4}");
    }
    write_file(dir, "coordinates.csv", &csv)?;
    let internal = |e: glossotree::regression::PredictorError| CliError::Internal(e.to_string());
    write_file(dir, "genetic.csv", &genetic_distance_matrix(&tree, &languages).map_err(internal)?.to_csv())?;
    let geo_coords = glossotree::ingest::read_coordinates::<f64, _>(csv.as_bytes()).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(dir, "geographic.csv", &geographic_distance_matrix(&geo_coords, &languages).map_err(internal)?.to_csv())?;

    let stab = stability_list::<f64, _>("synthetic", &concepts, &rates, 0.02, &mut rng);
    let mut text = format!("#name={}\n#direction={}\nconcept\tscore\n", stab.name, stab.direction.as_str());
    for (c, v) in &stab.scores {
        // Upper-case names exercise the case-insensitive matching.
        let _ = writeln!(text, "{}\t{v:.6}", c.to_uppercase());
    }
    write_file(dir, "lists/synthetic.tsv", &text)?;
    write_file(dir, "aliases.tsv", "# alias\tcanonical\nfirst concept\tc000\n")?;

    let layers: Vec<String> = (0..spec.layers).map(|k| k.to_string()).chain(["avg".to_string()]).collect();
    let conf = format!(
        "# Synthetic fixture: {n} languages evolved along tree.nwk (seed {seed}).\n\
         word_list = synthetic\n\
         concepts = concepts.tsv\n\
         embeddings = embeddings\n\
         layers = {layers}\n\
         reference_tree = tree.nwk\n\
         predictor.genetic = genetic.csv\n\
         predictor.geographic = geographic.csv\n\
         coordinates = coordinates.csv\n\
         stability_lists = lists\n\
         aliases = aliases.tsv\n\
         measure = cosine\n\
         methods = upgma,nj\n\
         min_shared = 50\n\
         nperm = 999\n\
         seed = 42\n\
         statistics = mean,std\n\
         output = out\n",
        n = spec.languages,
        seed = spec.seed,
        layers = layers.join(","),
    );
    write_file(dir, "run.conf", &conf)?;
    Ok(tree)
}
