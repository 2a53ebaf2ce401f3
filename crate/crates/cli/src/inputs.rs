//! Loading the files a run configuration points at.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use glossotree::distance::second_order_encode;
use glossotree::embedding::average_layers;
use glossotree::ingest::{
    embeddings::split_vec_file_name, parse_alias_table, parse_concept_list, parse_coordinates,
    parse_distance_csv, parse_embeddings, parse_newick_file, parse_ranked_list, vec_file_name, AliasTable,
    ConceptList, Coordinates, EmbeddingSource, RankedList,
};
use glossotree::regression::{genetic_distance_matrix, geographic_distance_matrix};
use glossotree::{DistanceMatrix, EmbeddingTable, Layer, PhyloTree};
use indexmap::IndexMap;

use crate::config::RunConfig;
use crate::CliError;

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Languages with at least one `.vec` file in `dir`, sorted, and the index
/// layers found for each.
pub fn scan_embedding_dir(dir: &Path) -> Result<IndexMap<String, BTreeSet<Layer>>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| input_err(dir, e))?;
    let mut found: IndexMap<String, BTreeSet<Layer>> = IndexMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| input_err(dir, e))?;
        if let Some((lang, layer)) = entry.file_name().to_str().and_then(split_vec_file_name) {
            found.entry(lang).or_default().insert(layer);
        }
    }
    found.sort_keys();
    Ok(found)
}

pub fn load_concepts(cfg: &RunConfig) -> Result<Option<ConceptList>, CliError> {
    cfg.concepts
        .as_deref()
        .map(|p| parse_concept_list(p, cfg.languages.as_deref()).map_err(|e| input_err(p, e)))
        .transpose()
}

/// The languages a run covers, before checking that their files exist.
pub fn roster(cfg: &RunConfig, concepts: Option<&ConceptList>) -> Result<Vec<String>, CliError> {
    let mut langs = match (&cfg.languages, concepts) {
        (Some(l), _) => l.clone(),
        (None, Some(c)) => c.languages().to_vec(),
        (None, None) => scan_embedding_dir(&cfg.embeddings)?.into_keys().collect(),
    };
    langs.retain(|l| !cfg.exclude_languages.contains(l));
    Ok(langs)
}

pub fn embedding_path(cfg: &RunConfig, language: &str, layer: Layer) -> PathBuf {
    cfg.embeddings.join(vec_file_name(language, layer))
}

fn load_one(cfg: &RunConfig, language: &str, layer: Layer) -> Result<EmbeddingTable<f64>, CliError> {
    let path = embedding_path(cfg, language, layer);
    let source = EmbeddingSource { language: Some(language.to_string()), layer: Some(layer), layer_count: cfg.layer_count };
    parse_embeddings(&path, &source).map_err(|e| input_err(&path, e))
}

/// One table per roster language for `layer`. The average layer is read from
/// `<lang>.layeravg.vec` when present, otherwise computed from every index
/// layer file of that language.
pub fn load_layer(cfg: &RunConfig, roster: &[String], layer: Layer) -> Result<Vec<EmbeddingTable<f64>>, CliError> {
    let scanned = if layer == Layer::Average { Some(scan_embedding_dir(&cfg.embeddings)?) } else { None };
    let mut tables = Vec::with_capacity(roster.len());
    for lang in roster {
        let table = if layer == Layer::Average && !embedding_path(cfg, lang, layer).exists() {
            let layers: Vec<Layer> = scanned
                .as_ref()
                .and_then(|s| s.get(lang))
                .map(|set| set.iter().copied().filter(|l| *l != Layer::Average).collect())
                .unwrap_or_default();
            if layers.is_empty() {
                return Err(CliError::Input(format!(
                    "{}: missing, and no layer files to average",
                    embedding_path(cfg, lang, layer).display()
                )));
            }
            let parts = layers.iter().map(|&l| load_one(cfg, lang, l)).collect::<Result<Vec<_>, _>>()?;
            average_layers(&parts).map_err(|e| CliError::Input(format!("averaging layers of {lang}: {e}")))?
        } else {
            load_one(cfg, lang, layer)?
        };
        tables.push(if cfg.second_order {
            second_order_encode(&table, cfg.measure).map_err(|e| CliError::Input(format!("{lang}: {e}")))?
        } else {
            table
        });
    }
    Ok(tables)
}

pub fn load_tree(path: &Path) -> Result<PhyloTree<f64>, CliError> {
    parse_newick_file(path).map_err(|e| input_err(path, e))
}

pub fn load_matrix(path: &Path) -> Result<DistanceMatrix<f64>, CliError> {
    parse_distance_csv(path).map_err(|e| input_err(path, e))
}

pub fn load_coordinates(path: &Path) -> Result<Coordinates<f64>, CliError> {
    parse_coordinates(path).map_err(|e| input_err(path, e))
}

pub fn load_aliases(path: Option<&Path>) -> Result<AliasTable, CliError> {
    path.map(|p| parse_alias_table(p).map_err(|e| input_err(p, e))).transpose().map(Option::unwrap_or_default)
}

/// Every `*.tsv` / `*.txt` file in `dir`, in file-name order.
pub fn load_lists(dir: &Path) -> Result<Vec<RankedList<f64>>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| input_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv" || x == "txt"))
        .collect();
    paths.sort();
    paths.iter().map(|p| parse_ranked_list(p).map_err(|e| input_err(p, e))).collect()
}

/// Predictor matrices over (a subset of) `roster`: the declared CSVs plus the
/// derived genetic and geographic ones. Languages a source does not cover are
/// left out of that matrix and removed later by listwise deletion.
pub fn load_predictors(cfg: &RunConfig, roster: &[String]) -> Result<IndexMap<String, DistanceMatrix<f64>>, CliError> {
    let mut out = IndexMap::new();
    for (name, path) in &cfg.predictors {
        out.insert(name.clone(), load_matrix(path)?);
    }
    if cfg.derive_genetic {
        let path = cfg.reference_tree.as_deref().expect("checked by RunConfig::check");
        let tree = load_tree(path)?;
        let m = genetic_distance_matrix(&tree, roster).map_err(|e| input_err(path, e))?;
        out.insert("genetic".into(), m);
    }
    if cfg.derive_geographic {
        let path = cfg.coordinates.as_deref().expect("checked by RunConfig::check");
        let coords = load_coordinates(path)?;
        let known: Vec<String> = roster.iter().filter(|l| coords.contains_key(*l)).cloned().collect();
        let m = geographic_distance_matrix(&coords, &known).map_err(|e| input_err(path, e))?;
        out.insert("geographic".into(), m);
    }
    Ok(out)
}

