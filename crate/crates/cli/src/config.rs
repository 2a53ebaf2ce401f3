//! Run configuration: a line-oriented `key = value` file with `#` comments.
//!
//! Relative paths are resolved against the directory containing the file.
//! Predictor matrices are declared as `predictor.<name> = <csv>`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use glossotree::regression::PermutationTarget;
use glossotree::stability::{CorrelationMethod, Statistic};
use glossotree::{DistanceMeasure, Layer, Method};
use indexmap::IndexMap;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub base_dir: PathBuf,
    /// Row label for the word list in the layer tables.
    pub word_list: String,
    pub concepts: Option<PathBuf>,
    /// Directory of `<language>.layer<k>.vec` files.
    pub embeddings: PathBuf,
    /// Explicit roster; otherwise the concept list header, otherwise the
    /// languages found in the embedding directory.
    pub languages: Option<Vec<String>>,
    /// Dropped from the roster, e.g. second-script duplicates of a language.
    pub exclude_languages: Vec<String>,
    pub layers: Vec<Layer>,
    pub layer_count: Option<u32>,
    pub reference_tree: Option<PathBuf>,
    pub predictors: IndexMap<String, PathBuf>,
    /// Adds a `genetic` predictor computed from the reference tree.
    pub derive_genetic: bool,
    pub coordinates: Option<PathBuf>,
    /// Adds a `geographic` predictor computed from the coordinates.
    pub derive_geographic: bool,
    pub stability_lists: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub measure: DistanceMeasure,
    pub second_order: bool,
    pub min_shared: usize,
    pub methods: Vec<Method>,
    pub nperm: usize,
    pub seed: Option<u64>,
    pub permutation_target: PermutationTarget,
    pub standardize: bool,
    /// Coefficients with `p <= coefficient_alpha` are marked significant
    /// (with 999 permutations the smallest attainable p is 0.001).
    pub coefficient_alpha: f64,
    pub statistics: Vec<Statistic>,
    pub correlation: CorrelationMethod,
    pub alpha: f64,
    pub min_pair_count: usize,
    pub bli_layers: Vec<Layer>,
    pub output: PathBuf,
}

impl RunConfig {
    /// Defaults for every setting; `base_dir` anchors relative paths.
    pub fn new(base_dir: PathBuf) -> Self {
        Self {
            base_dir,
            word_list: "words".into(),
            concepts: None,
            embeddings: PathBuf::new(),
            languages: None,
            exclude_languages: Vec::new(),
            layers: Vec::new(),
            layer_count: None,
            reference_tree: None,
            predictors: IndexMap::new(),
            derive_genetic: false,
            coordinates: None,
            derive_geographic: false,
            stability_lists: None,
            aliases: None,
            measure: DistanceMeasure::Cosine,
            second_order: false,
            min_shared: 50,
            methods: vec![Method::Upgma, Method::Nj],
            nperm: 999,
            seed: None,
            permutation_target: PermutationTarget::Response,
            standardize: false,
            coefficient_alpha: 0.001,
            statistics: Statistic::ALL.to_vec(),
            correlation: CorrelationMethod::Spearman,
            alpha: 0.01,
            min_pair_count: 10,
            bli_layers: Vec::new(),
            output: PathBuf::from("out"),
        }
    }

    /// Checks the cross-field invariants. Path existence is left to `validate`.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Input(format!("config: {m}")));
        if self.embeddings.as_os_str().is_empty() {
            return bad("`embeddings` is required".into());
        }
        if self.layers.is_empty() {
            return bad("`layers` must list at least one layer".into());
        }
        if self.methods.is_empty() {
            return bad("`methods` must name UPGMA and/or NJ".into());
        }
        if self.nperm > 0 && self.seed.is_none() {
            return bad("`seed` is required when nperm > 0".into());
        }
        if self.nperm > 0 && self.nperm < 99 {
            return bad(format!("nperm must be 0 or at least 99, got {}", self.nperm));
        }
        if let Some(l) = self.bli_layers.iter().find(|l| !self.layers.contains(l)) {
            return bad(format!("bli layer {l} is not among `layers`"));
        }
        if self.derive_genetic && self.reference_tree.is_none() {
            return bad("`derive_genetic` needs `reference_tree`".into());
        }
        if self.derive_geographic && self.coordinates.is_none() {
            return bad("`derive_geographic` needs `coordinates`".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) || !(self.coefficient_alpha > 0.0 && self.coefficient_alpha < 1.0) {
            return bad("significance levels must lie in (0, 1)".into());
        }
        Ok(())
    }

    /// Canonical `key = value` rendering of the effective settings; its
    /// SHA-256 identifies a run configuration.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        // Paths are written relative to the config directory so the hash
        // does not depend on where a fixture is checked out.
        let rel = |p: &Path| p.strip_prefix(&self.base_dir).unwrap_or(p).display().to_string();
        let path = |p: &Option<PathBuf>| p.as_deref().map(rel).unwrap_or_default();
        let list = |v: Vec<String>| v.join(",");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("word_list", self.word_list.clone());
        kv("concepts", path(&self.concepts));
        kv("embeddings", rel(&self.embeddings));
        kv("languages", self.languages.clone().map(list).unwrap_or_default());
        kv("exclude_languages", list(self.exclude_languages.clone()));
        kv("layers", list(self.layers.iter().map(Layer::to_string).collect()));
        kv("layer_count", self.layer_count.map(|c| c.to_string()).unwrap_or_default());
        kv("reference_tree", path(&self.reference_tree));
        for (name, p) in &self.predictors {
            kv(&format!("predictor.{name}"), rel(p));
        }
        kv("derive_genetic", self.derive_genetic.to_string());
        kv("coordinates", path(&self.coordinates));
        kv("derive_geographic", self.derive_geographic.to_string());
        kv("stability_lists", path(&self.stability_lists));
        kv("aliases", path(&self.aliases));
        kv("measure", self.measure.to_string());
        kv("second_order", self.second_order.to_string());
        kv("min_shared", self.min_shared.to_string());
        kv("methods", list(self.methods.iter().map(Method::to_string).collect()));
        kv("nperm", self.nperm.to_string());
        kv("seed", self.seed.map(|s| s.to_string()).unwrap_or_default());
        kv("permutation_target", target_name(self.permutation_target).into());
        kv("standardize", self.standardize.to_string());
        kv("coefficient_alpha", self.coefficient_alpha.to_string());
        kv("statistics", list(self.statistics.iter().map(Statistic::to_string).collect()));
        kv("correlation", format!("{:?}", self.correlation).to_lowercase());
        kv("alpha", self.alpha.to_string());
        kv("min_pair_count", self.min_pair_count.to_string());
        kv("bli_layers", list(self.bli_layers.iter().map(Layer::to_string).collect()));
        kv("output", rel(&self.output));
        out
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn target_name(t: PermutationTarget) -> &'static str {
    match t {
        PermutationTarget::Response => "response",
        PermutationTarget::Predictors => "predictors",
    }
}

/// Command-line replacements for config values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub layers: Option<Vec<Layer>>,
    pub nperm: Option<usize>,
    pub seed: Option<u64>,
    pub measure: Option<DistanceMeasure>,
    pub methods: Option<Vec<Method>>,
    pub output: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(l) = &self.layers {
            cfg.layers = l.clone();
            cfg.bli_layers.retain(|b| l.contains(b));
            if cfg.bli_layers.is_empty() {
                cfg.bli_layers.push(l[0]);
            }
        }
        if let Some(n) = self.nperm {
            cfg.nperm = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(m) = self.measure {
            cfg.measure = m;
        }
        if let Some(m) = &self.methods {
            cfg.methods = m.clone();
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
    }
}

pub fn parse_list<T: std::str::FromStr<Err = String>>(v: &str) -> Result<Vec<T>, String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true/false, got {v:?}")),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid number {v:?}"))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses config text; `base_dir` anchors relative paths.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::new(base_dir.to_path_buf());
    let mut seen = std::collections::HashSet::new();
    let resolve = |v: &str| {
        let p = PathBuf::from(v);
        if p.is_absolute() {
            p
        } else {
            base_dir.join(p)
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        let at = |m: String| format!("line {}: {m}", i + 1);
        let (key, value) = line.split_once('=').ok_or_else(|| at("expected key = value".into()))?;
        let (key, v) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(at(format!("duplicate key {key:?}")));
        }
        let r: Result<(), String> = (|| {
            match key {
                "word_list" => cfg.word_list = v.to_string(),
                "concepts" => cfg.concepts = Some(resolve(v)),
                "embeddings" => cfg.embeddings = resolve(v),
                "languages" => cfg.languages = Some(v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
                "exclude_languages" => {
                    cfg.exclude_languages = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
                "layers" => cfg.layers = parse_list(v)?,
                "layer_count" => cfg.layer_count = Some(parse_num(v)?),
                "reference_tree" => cfg.reference_tree = Some(resolve(v)),
                "derive_genetic" => cfg.derive_genetic = parse_bool(v)?,
                "coordinates" => cfg.coordinates = Some(resolve(v)),
                "derive_geographic" => cfg.derive_geographic = parse_bool(v)?,
                "stability_lists" => cfg.stability_lists = Some(resolve(v)),
                "aliases" => cfg.aliases = Some(resolve(v)),
                "measure" => cfg.measure = v.parse()?,
                "second_order" => cfg.second_order = parse_bool(v)?,
                "min_shared" => cfg.min_shared = parse_num(v)?,
                "methods" => cfg.methods = parse_list(v)?,
                "nperm" => cfg.nperm = parse_num(v)?,
                "seed" => cfg.seed = Some(parse_num(v)?),
                "permutation_target" => {
                    cfg.permutation_target = match v {
                        "response" => PermutationTarget::Response,
                        "predictors" => PermutationTarget::Predictors,
                        _ => return Err(format!("unknown permutation target {v:?}")),
                    }
                }
                "standardize" => cfg.standardize = parse_bool(v)?,
                "coefficient_alpha" => cfg.coefficient_alpha = parse_num(v)?,
                "statistics" => cfg.statistics = parse_list(v)?,
                "correlation" => cfg.correlation = v.parse()?,
                "alpha" => cfg.alpha = parse_num(v)?,
                "min_pair_count" => cfg.min_pair_count = parse_num(v)?,
                "bli_layers" => cfg.bli_layers = parse_list(v)?,
                "output" => cfg.output = resolve(v),
                k => match k.strip_prefix("predictor.") {
                    Some(name) if !name.is_empty() => {
                        cfg.predictors.insert(name.to_string(), resolve(v));
                    }
                    _ => return Err(format!("unknown key {k:?}")),
                },
            }
            Ok(())
        })();
        r.map_err(at)?;
    }
    if cfg.bli_layers.is_empty() {
        cfg.bli_layers.extend(cfg.layers.first().copied());
    }
    Ok(cfg)
}
