//! The full per-layer pipeline and its tabular outputs.
//!
//! Each layer runs three independent branches over its embedding tables:
//! distances → trees → quartet distances, distances → matrix regression, and
//! variability scores → stability correlations. A failing stage stops its own
//! branch only; the error is recorded in the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use glossotree::distance::{bli_matrix, LanguageDistanceOptions, PairDiagnostics};
use glossotree::ingest::{AliasTable, RankedList};
use glossotree::quartet::GqdReport;
use glossotree::regression::{align, mantel_permutation_test, mrm_fit, FitOptions, MantelOptions, PermutationTarget, PredictorSet};
use glossotree::stability::{
    correlate_with_lists, correlations_to_csv, variability_scores, CorrelationOptions, CorrelationReport, VariabilityScore,
};
use glossotree::{distance_matrix, gqd, DistanceMatrix, EmbeddingTable, Layer, Method, PhyloTree, RegressionResult};
use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{inputs, plot, CliError};

/// Per-layer permutation seed derived from the run seed (SplitMix64 finalizer).
pub fn layer_seed(seed: u64, layer: Layer) -> u64 {
    let code = match layer {
        Layer::Index(k) => u64::from(k) + 1,
        Layer::Average => 1 << 40,
    };
    let mut z = seed ^ code.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn layer_dir_name(layer: Layer) -> String {
    format!("layer-{layer}")
}

/// Creates `<output>/run-NNNN` with the next free number; never reuses one.
pub fn create_run_dir(output: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(output).map_err(|e| CliError::Input(format!("{}: {e}", output.display())))?;
    for n in 1..=9999 {
        let dir = output.join(format!("run-{n:04}"));
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::Input(format!("{}: {e}", dir.display()))),
        }
    }
    Err(CliError::Input(format!("{}: no free run directory", output.display())))
}

pub fn write_file(root: &Path, rel: &str, content: &str) -> Result<String, CliError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Input(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, content).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(rel.to_string())
}

pub fn diagnostics_csv(diag: &[PairDiagnostics]) -> String {
    let mut out = String::from("language_a,language_b,shared_concepts,degenerate_concepts\n");
    for d in diag {
        let _ = writeln!(out, "{},{},{},{}", d.a, d.b, d.used, d.degenerate.len());
    }
    out
}

pub fn bli_csv(tables: &[EmbeddingTable<f64>], mrr: &[Vec<Option<f64>>]) -> String {
    let mut out = String::from("source");
    for t in tables {
        let _ = write!(out, ",{}", t.language());
    }
    out.push('\n');
    for (t, row) in tables.iter().zip(mrr) {
        out.push_str(t.language());
        for v in row {
            out.push(',');
            if let Some(v) = v {
                let _ = write!(out, "{v}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn scores_csv(scores: &[VariabilityScore<f64>]) -> String {
    let mut out = String::from("concept,statistic,value,pair_count\n");
    for s in scores {
        let _ = writeln!(out, "{},{},{},{}", s.concept, s.statistic, s.value, s.pair_count);
    }
    out
}

/// Regression settings shared by the pipeline and the `mrm` subcommand.
#[derive(Debug, Clone, Copy)]
pub struct RegressionSettings {
    pub nperm: usize,
    pub seed: Option<u64>,
    pub target: PermutationTarget,
    pub standardize: bool,
}

/// Listwise-aligns the predictors to the response, then fits, with a Mantel
/// permutation test when `nperm > 0`.
pub fn run_regression(
    response: &DistanceMatrix<f64>,
    predictors: &IndexMap<String, DistanceMatrix<f64>>,
    s: RegressionSettings,
) -> Result<RegressionResult<f64>, CliError> {
    let aligned = align(response, predictors).map_err(|e| CliError::Input(e.to_string()))?;
    let mut set = PredictorSet::new(aligned.response.labels().to_vec());
    for (name, m) in aligned.predictors.iter() {
        set.insert(name, m.clone()).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let fit = FitOptions { standardize: s.standardize };
    let mut result = if s.nperm > 0 {
        let seed = s.seed.ok_or_else(|| CliError::Input("a seed is required for permutation tests".into()))?;
        mantel_permutation_test(&aligned.response, &set, MantelOptions { permutations: s.nperm, seed, target: s.target, fit })
    } else {
        mrm_fit(&aligned.response, &set, fit)
    }
    .map_err(|e| CliError::Input(e.to_string()))?;
    result.dropped_pairs = aligned.dropped_pairs;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LayerOutcome {
    pub layer: Layer,
    pub seed: Option<u64>,
    pub status: &'static str,
    pub errors: Vec<String>,
    pub notes: Vec<String>,
    pub files: Vec<String>,
    #[serde(skip)]
    pub gqd: IndexMap<Method, GqdReport>,
    #[serde(skip)]
    pub trees: IndexMap<Method, PhyloTree<f64>>,
    #[serde(skip)]
    pub regression: Option<RegressionResult<f64>>,
    #[serde(skip)]
    pub correlations: Vec<CorrelationReport<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: String,
    pub seed: Option<u64>,
    pub n_perm: usize,
    pub word_list: String,
    pub languages: Vec<String>,
    pub layers: Vec<LayerOutcome>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub run_dir: PathBuf,
    pub manifest: Manifest,
}

impl PipelineOutcome {
    pub fn layer(&self, layer: Layer) -> Option<&LayerOutcome> {
        self.manifest.layers.iter().find(|l| l.layer == layer)
    }
}

struct Shared {
    roster: Vec<String>,
    reference: Option<PhyloTree<f64>>,
    predictors: IndexMap<String, DistanceMatrix<f64>>,
    lists: Vec<RankedList<f64>>,
    aliases: AliasTable,
}

fn run_layer(cfg: &RunConfig, shared: &Shared, run_dir: &Path, layer: Layer) -> LayerOutcome {
    let seed = cfg.seed.map(|s| layer_seed(s, layer));
    let mut out = LayerOutcome {
        layer,
        seed,
        status: "ok",
        errors: Vec::new(),
        notes: Vec::new(),
        files: Vec::new(),
        gqd: IndexMap::new(),
        trees: IndexMap::new(),
        regression: None,
        correlations: Vec::new(),
    };
    let dir = layer_dir_name(layer);
    let write = |out: &mut LayerOutcome, name: &str, content: &str| match write_file(run_dir, &format!("{dir}/{name}"), content) {
        Ok(f) => out.files.push(f),
        Err(e) => out.errors.push(e.to_string()),
    };

    let tables = match inputs::load_layer(cfg, &shared.roster, layer) {
        Ok(t) => t,
        Err(e) => {
            out.errors.push(format!("load: {e}"));
            out.status = "failed";
            return out;
        }
    };

    if cfg.bli_layers.contains(&layer) {
        let mrr = bli_matrix(&tables, cfg.measure);
        write(&mut out, "bli_mrr.csv", &bli_csv(&tables, &mrr));
    }

    // distances → trees → quartet distance; distances → regression
    match distance_matrix(&tables, cfg.measure, LanguageDistanceOptions { min_shared: cfg.min_shared }) {
        Ok((d, diag)) => {
            write(&mut out, "distance.csv", &d.to_csv());
            write(&mut out, "pair_diagnostics.csv", &diagnostics_csv(&diag));
            for &method in &cfg.methods {
                let tag = method.to_string().to_lowercase();
                let (tree, trace) = match method.infer(&d) {
                    Ok(r) => r,
                    Err(e) => {
                        out.errors.push(format!("{method}: {e}"));
                        continue;
                    }
                };
                write(&mut out, &format!("{tag}.nwk"), &format!("{}\n", tree.to_newick()));
                if trace.clamped_negative > 0 {
                    out.notes.push(format!("{method}: {} negative branch lengths set to zero", trace.clamped_negative));
                }
                if let Some(reference) = &shared.reference {
                    match gqd(reference, &tree) {
                        Ok(report) => {
                            let json = serde_json::to_string_pretty(&report).expect("reports serialize");
                            write(&mut out, &format!("gqd_{tag}.json"), &format!("{json}\n"));
                            out.gqd.insert(method, report);
                        }
                        Err(e) => out.errors.push(format!("{method} quartet distance: {e}")),
                    }
                }
                out.trees.insert(method, tree);
            }
            if !shared.predictors.is_empty() {
                let settings = RegressionSettings {
                    nperm: cfg.nperm,
                    seed,
                    target: cfg.permutation_target,
                    standardize: cfg.standardize,
                };
                match run_regression(&d, &shared.predictors, settings) {
                    Ok(r) => {
                        write(&mut out, "regression.json", &format!("{}\n", r.to_json()));
                        write(&mut out, "regression.csv", &r.to_csv());
                        out.regression = Some(r);
                    }
                    Err(e) => out.errors.push(format!("regression: {e}")),
                }
            }
        }
        Err(e) => out.errors.push(format!("distances: {e}")),
    }

    // variability scores → stability correlations
    if !shared.lists.is_empty() {
        let set = variability_scores(&tables, &cfg.statistics);
        if !set.unusable.is_empty() {
            out.notes.push(format!("{} concepts without two usable languages", set.unusable.len()));
        }
        write(&mut out, "variability.csv", &scores_csv(&set.scores));
        let opts = CorrelationOptions { method: cfg.correlation, alpha: cfg.alpha, min_pair_count: cfg.min_pair_count };
        let outcome = correlate_with_lists(&set.scores, layer, &shared.lists, &shared.aliases, opts);
        for s in &outcome.skipped {
            out.notes.push(format!("correlation {} / {} skipped: {}", s.list, s.statistic, s.reason));
        }
        for (list, missing) in &outcome.unmatched {
            if !missing.is_empty() {
                out.notes.push(format!("list {list}: no scores for {}", missing.join(", ")));
            }
        }
        if !outcome.low_pair_count.is_empty() {
            out.notes.push(format!(
                "{} concepts excluded with fewer than {} language pairs",
                outcome.low_pair_count.len(),
                cfg.min_pair_count
            ));
        }
        write(&mut out, "correlations.csv", &correlations_to_csv(&outcome.reports));
        out.correlations = outcome.reports;
    }

    if !out.errors.is_empty() {
        out.status = "partial";
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `method,word_list,<layer>…` — quartet distance per method and layer.
pub fn table_gqd(cfg: &RunConfig, layers: &[LayerOutcome]) -> String {
    let mut out = String::from("method,word_list");
    for l in layers {
        let _ = write!(out, ",{}", l.layer);
    }
    out.push('\n');
    for &m in &cfg.methods {
        let _ = write!(out, "{m},{}", cfg.word_list);
        for l in layers {
            let _ = write!(out, ",{}", fmt_opt(l.gqd.get(&m).map(|r| r.gqd)));
        }
        out.push('\n');
    }
    out
}

/// `word_list,<layer>…` — regression R² per layer.
pub fn table_r2(cfg: &RunConfig, layers: &[LayerOutcome]) -> String {
    let mut out = String::from("word_list");
    for l in layers {
        let _ = write!(out, ",{}", l.layer);
    }
    let _ = write!(out, "\n{}", cfg.word_list);
    for l in layers {
        let _ = write!(out, ",{}", fmt_opt(l.regression.as_ref().map(|r| r.r_squared)));
    }
    out.push('\n');
    out
}

/// Long format: one row per (layer, predictor) coefficient.
pub fn table_coefficients(cfg: &RunConfig, layers: &[LayerOutcome]) -> String {
    let mut out = String::from("word_list,layer,predictor,coefficient,p,significant\n");
    for l in layers {
        if let Some(r) = &l.regression {
            for (name, c) in &r.coefficients {
                let p = r.p_values.get(name).copied();
                let sig = p.is_some_and(|p| p <= cfg.coefficient_alpha);
                let _ = writeln!(out, "{},{},{name},{c},{},{sig}", cfg.word_list, l.layer, fmt_opt(p));
            }
        }
    }
    out
}

fn coefficient_plot(cfg: &RunConfig, layers: &[LayerOutcome]) -> String {
    let x: Vec<String> = layers.iter().map(|l| l.layer.to_string()).collect();
    let mut names: Vec<String> = Vec::new();
    for r in layers.iter().filter_map(|l| l.regression.as_ref()) {
        for n in r.coefficients.keys() {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
    }
    let series: Vec<(String, Vec<Option<(f64, bool)>>)> = names
        .iter()
        .map(|n| {
            let pts = layers
                .iter()
                .map(|l| {
                    let r = l.regression.as_ref()?;
                    let c = *r.coefficients.get(n)?;
                    Some((c, r.p_values.get(n).is_some_and(|&p| p <= cfg.coefficient_alpha)))
                })
                .collect();
            (n.clone(), pts)
        })
        .collect();
    plot::line_chart(&format!("Regression coefficients by layer ({})", cfg.word_list), &x, &series)
}

fn correlation_plot(layers: &[LayerOutcome]) -> String {
    let all: Vec<&CorrelationReport<f64>> = layers.iter().flat_map(|l| &l.correlations).collect();
    let mut rows: Vec<String> = Vec::new();
    let mut cols: Vec<String> = Vec::new();
    for r in &all {
        if !rows.contains(&r.list) {
            rows.push(r.list.clone());
        }
        let c = format!("{}/{}", r.statistic, r.layer);
        if !cols.contains(&c) {
            cols.push(c);
        }
    }
    let mut cells = vec![vec![None; cols.len()]; rows.len()];
    for r in all {
        let i = rows.iter().position(|x| *x == r.list).expect("row listed");
        let j = cols.iter().position(|x| *x == format!("{}/{}", r.statistic, r.layer)).expect("column listed");
        cells[i][j] = Some((r.rho, r.significant));
    }
    plot::heatmap("Variability vs. stability lists (rho)", &rows, &cols, &cells)
}

/// Runs every configured layer and writes the run directory.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutcome, CliError> {
    cfg.check()?;
    let concepts = inputs::load_concepts(cfg)?;
    let roster = inputs::roster(cfg, concepts.as_ref())?;
    let shared = Shared {
        reference: cfg.reference_tree.as_deref().map(inputs::load_tree).transpose()?,
        predictors: inputs::load_predictors(cfg, &roster)?,
        lists: cfg.stability_lists.as_deref().map(inputs::load_lists).transpose()?.unwrap_or_default(),
        aliases: inputs::load_aliases(cfg.aliases.as_deref())?,
        roster,
    };
    let run_dir = create_run_dir(&cfg.output)?;

    let layers: Vec<LayerOutcome> = cfg.layers.par_iter().map(|&l| run_layer(cfg, &shared, &run_dir, l)).collect();

    let mut outputs = Vec::new();
    outputs.push(write_file(&run_dir, "table_gqd.csv", &table_gqd(cfg, &layers))?);
    if !shared.predictors.is_empty() {
        outputs.push(write_file(&run_dir, "table_r2.csv", &table_r2(cfg, &layers))?);
        outputs.push(write_file(&run_dir, "coefficients.csv", &table_coefficients(cfg, &layers))?);
        outputs.push(write_file(&run_dir, "coefficients.svg", &coefficient_plot(cfg, &layers))?);
    }
    if !shared.lists.is_empty() {
        let all: Vec<CorrelationReport<f64>> = layers.iter().flat_map(|l| l.correlations.iter().cloned()).collect();
        outputs.push(write_file(&run_dir, "correlations.csv", &correlations_to_csv(&all))?);
        outputs.push(write_file(&run_dir, "correlations.svg", &correlation_plot(&layers))?);
    }
    outputs.push("manifest.json".into());

    let manifest = Manifest {
        tool: "glossotree",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        config: cfg.canonical(),
        seed: cfg.seed,
        n_perm: cfg.nperm,
        word_list: cfg.word_list.clone(),
        languages: shared.roster.clone(),
        layers,
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&run_dir, "manifest.json", &format!("{json}\n"))?;
    Ok(PipelineOutcome { run_dir, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_seeds_differ() {
        let a = layer_seed(42, Layer::Index(0));
        assert_eq!(a, layer_seed(42, Layer::Index(0)));
        assert_ne!(a, layer_seed(42, Layer::Index(1)));
        assert_ne!(a, layer_seed(43, Layer::Index(0)));
        assert_ne!(layer_seed(42, Layer::Average), a);
    }

    #[test]
    fn run_dirs_are_numbered() {
        let tmp = tempfile::tempdir().unwrap();
        let a = create_run_dir(tmp.path()).unwrap();
        let b = create_run_dir(tmp.path()).unwrap();
        assert!(a.ends_with("run-0001") && b.ends_with("run-0002"));
    }
}
