//! Pre-flight checks of every input a run configuration names.

use std::fmt;

use glossotree::distance::{language_distance, DistanceError, LanguageDistanceOptions};
use glossotree::Layer;

use crate::config::RunConfig;
use crate::inputs;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub fatal: Vec<String>,
    pub warnings: Vec<String>,
    /// Rosters, counts and other facts worth showing.
    pub info: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.fatal.is_empty()
    }

    pub fn summary(&self) -> String {
        format!("{} fatal, {} warnings", self.fatal.len(), self.warnings.len())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.info {
            writeln!(f, "info: {l}")?;
        }
        for l in &self.warnings {
            writeln!(f, "warning: {l}")?;
        }
        for l in &self.fatal {
            writeln!(f, "fatal: {l}")?;
        }
        write!(f, "{}", self.summary())
    }
}

pub fn validate(cfg: &RunConfig) -> ValidationReport {
    let mut r = ValidationReport::default();
    if let Err(e) = cfg.check() {
        r.fatal.push(e.to_string());
        return r;
    }
    if !cfg.embeddings.is_dir() {
        r.fatal.push(format!("embedding directory {} not found", cfg.embeddings.display()));
        return r;
    }

    let concepts = match inputs::load_concepts(cfg) {
        Ok(c) => c,
        Err(e) => {
            r.fatal.push(e.to_string());
            None
        }
    };
    let roster = match inputs::roster(cfg, concepts.as_ref()) {
        Ok(l) => l,
        Err(e) => {
            r.fatal.push(e.to_string());
            return r;
        }
    };
    r.info.push(format!("{} languages: {}", roster.len(), roster.join(", ")));
    if roster.len() < 3 {
        r.fatal.push(format!("need at least 3 languages, roster has {}", roster.len()));
    }
    if let Some(c) = &concepts {
        r.info.push(format!("concept list: {} concepts", c.len()));
        let missing = c.missing().len();
        if missing > 0 {
            r.info.push(format!("concept list: {missing} (concept, language) cells without a form"));
        }
    }

    // Embeddings: every roster language at every layer, and pairwise overlap.
    let opts = LanguageDistanceOptions { min_shared: cfg.min_shared };
    for &layer in &cfg.layers {
        match inputs::load_layer(cfg, &roster, layer) {
            Ok(tables) => {
                if layer == Layer::Average {
                    for lang in &roster {
                        if !inputs::embedding_path(cfg, lang, layer).exists() {
                            r.info.push(format!("layer avg for {lang} computed from its layer files"));
                        }
                    }
                }
                for (i, a) in tables.iter().enumerate() {
                    for b in &tables[i + 1..] {
                        match language_distance(a, b, cfg.measure, opts) {
                            Ok(_) => {}
                            Err(DistanceError::InsufficientOverlap { shared, required }) => r.warnings.push(format!(
                                "layer {layer}: {}–{} share {shared} usable concepts, below min_shared = {required}",
                                a.language(),
                                b.language()
                            )),
                            Err(e) => r.fatal.push(format!("layer {layer}: {}–{}: {e}", a.language(), b.language())),
                        }
                    }
                }
                if let Some(c) = &concepts {
                    for t in &tables {
                        let absent = c.concepts().iter().filter(|k| !t.contains(k)).count();
                        if absent > 0 {
                            r.info.push(format!("layer {layer}: {} lacks vectors for {absent} listed concepts", t.language()));
                        }
                    }
                }
            }
            Err(e) => r.fatal.push(format!("layer {layer}: {e}")),
        }
    }

    if let Some(path) = &cfg.reference_tree {
        match inputs::load_tree(path) {
            Ok(tree) => {
                let absent: Vec<&str> =
                    roster.iter().map(String::as_str).filter(|l| tree.find_leaf(l).is_none()).collect();
                if !absent.is_empty() {
                    r.warnings.push(format!("reference tree lacks {}", absent.join(", ")));
                }
                r.info.push(format!("reference tree: {} leaves", tree.leaf_count()));
            }
            Err(e) => r.fatal.push(e.to_string()),
        }
    }

    match inputs::load_predictors(cfg, &roster) {
        Ok(preds) => {
            for (name, m) in &preds {
                let absent: Vec<&str> =
                    roster.iter().map(String::as_str).filter(|l| m.index_of(l).is_none()).collect();
                if !absent.is_empty() {
                    r.warnings.push(format!("predictor {name} lacks {} (dropped listwise)", absent.join(", ")));
                }
            }
            r.info.push(format!("predictors: {}", preds.keys().cloned().collect::<Vec<_>>().join(", ")));
        }
        Err(e) => r.fatal.push(e.to_string()),
    }

    if let Some(dir) = &cfg.stability_lists {
        match inputs::load_lists(dir) {
            Ok(lists) if lists.is_empty() => r.warnings.push(format!("no stability lists in {}", dir.display())),
            Ok(lists) => r.info.push(format!(
                "stability lists: {}",
                lists.iter().map(|l| format!("{} ({})", l.name, l.scores.len())).collect::<Vec<_>>().join(", ")
            )),
            Err(e) => r.fatal.push(e.to_string()),
        }
    }
    if let Err(e) = inputs::load_aliases(cfg.aliases.as_deref()) {
        r.fatal.push(e.to_string());
    }
    r
}
