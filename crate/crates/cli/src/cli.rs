//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use glossotree::distance::{bli_matrix, LanguageDistanceOptions};
use glossotree::ingest::{parse_newick_file, to_newick};
use glossotree::regression::PermutationTarget;
use glossotree::stability::{correlate_with_lists, correlations_to_csv, variability_scores, CorrelationMethod, CorrelationOptions, Statistic};
use glossotree::{distance_matrix, gqd, DistanceMeasure, Layer, Method};
use indexmap::IndexMap;

use crate::compare::{compare_run, Tolerances};
use crate::config::{load_config, parse_list, Overrides, RunConfig};
use crate::fixture::{write_fixture, FixtureSpec};
use crate::pipeline::{bli_csv, diagnostics_csv, run_pipeline, run_regression, RegressionSettings};
use crate::validate::validate;
use crate::{inputs, CliError};

#[derive(Debug, Parser)]
#[command(name = "glossotree", version, about = "Phylogenetic, geographic and stability signals in cross-lingual word embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn layers_arg(s: &str) -> Result<Vec<Layer>, String> {
    parse_list(s)
}

fn methods_arg(s: &str) -> Result<Vec<Method>, String> {
    parse_list(s)
}

fn statistics_arg(s: &str) -> Result<Vec<Statistic>, String> {
    parse_list(s)
}

fn target_arg(s: &str) -> Result<PermutationTarget, String> {
    match s {
        "response" => Ok(PermutationTarget::Response),
        "predictors" => Ok(PermutationTarget::Predictors),
        _ => Err(format!("expected response or predictors, got {s:?}")),
    }
}

fn predictor_arg(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected NAME=PATH")?;
    Ok((name.trim().to_string(), PathBuf::from(path.trim())))
}

#[derive(Debug, Args)]
struct EmbeddingArgs {
    /// Directory of `<language>.layer<k>.vec` files.
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    layer: Layer,
    /// Comma-separated roster (default: every language found in the directory).
    #[arg(long, value_delimiter = ',')]
    languages: Option<Vec<String>>,
    #[arg(long, default_value = "cosine")]
    measure: DistanceMeasure,
    /// Re-encode each concept by its distances to all concepts first.
    #[arg(long)]
    second_order: bool,
}

impl EmbeddingArgs {
    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(PathBuf::new());
        cfg.embeddings = self.embeddings.clone();
        cfg.languages = self.languages.clone();
        cfg.layers = vec![self.layer];
        cfg.measure = self.measure;
        cfg.second_order = self.second_order;
        cfg
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that every input of a run configuration parses and lines up.
    Validate { config: PathBuf },
    /// Run distances, trees, quartet distances, regression and stability for every layer.
    Pipeline {
        config: PathBuf,
        #[arg(long, value_parser = layers_arg)]
        layers: Option<Vec<Layer>>,
        #[arg(long)]
        nperm: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        measure: Option<DistanceMeasure>,
        #[arg(long, value_parser = methods_arg)]
        method: Option<Vec<Method>>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Language distance matrix for one layer.
    Dist {
        #[command(flatten)]
        emb: EmbeddingArgs,
        #[arg(long, default_value_t = 50)]
        min_shared: usize,
        /// Also write per-pair overlap diagnostics here.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Mean reciprocal rank of lexicon induction for every language pair.
    Bli {
        #[command(flatten)]
        emb: EmbeddingArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Infer a tree from a distance matrix CSV.
    Tree {
        #[arg(long)]
        distances: PathBuf,
        #[arg(long, default_value = "upgma")]
        method: Method,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generalized quartet distance of an inferred tree to a reference tree.
    Gqd {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        inferred: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Multiple regression on distance matrices with a permutation test.
    Mrm {
        #[arg(long)]
        response: PathBuf,
        /// `NAME=PATH`, repeatable.
        #[arg(long = "predictor", value_parser = predictor_arg, required = true)]
        predictors: Vec<(String, PathBuf)>,
        /// 0 fits without a permutation test.
        #[arg(long, default_value_t = 999)]
        nperm: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = target_arg, default_value = "response")]
        target: PermutationTarget,
        #[arg(long)]
        standardize: bool,
        #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
        format: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Correlate per-concept variability with stability lists for one layer.
    Stability {
        #[command(flatten)]
        emb: EmbeddingArgs,
        /// Directory of ranked list files.
        #[arg(long)]
        lists: PathBuf,
        #[arg(long)]
        aliases: Option<PathBuf>,
        #[arg(long, value_parser = statistics_arg, default_value = "mean,std,min,max")]
        statistics: Vec<Statistic>,
        #[arg(long, default_value = "spearman")]
        correlation: CorrelationMethod,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 10)]
        min_pair_count: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic input set generated from a known tree.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 12)]
        languages: usize,
        #[arg(long, default_value_t = 100)]
        concepts: usize,
        #[arg(long, default_value_t = 24)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        layers: u32,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Compare a run's layer tables with reference tables.
    Compare {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        gqd_tol: f64,
        #[arg(long, default_value_t = 0.08)]
        r2_tol: f64,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            let report = validate(&cfg);
            println!("{report}");
            Ok(if report.is_ok() { 0 } else { 1 })
        }
        Command::Pipeline { config, layers, nperm, seed, measure, method, output } => {
            let mut cfg = load_config(&config)?;
            Overrides { layers, nperm, seed, measure, methods: method, output }.apply(&mut cfg);
            let report = validate(&cfg);
            if !report.is_ok() {
                println!("{report}");
                return Ok(1);
            }
            let outcome = run_pipeline(&cfg)?;
            for l in &outcome.manifest.layers {
                println!("layer {}: {}", l.layer, l.status);
                for e in &l.errors {
                    println!("  error: {e}");
                }
            }
            println!("{}", outcome.run_dir.display());
            Ok(0)
        }
        Command::Dist { emb, min_shared, diagnostics, out } => {
            let cfg = emb.config();
            let roster = inputs::roster(&cfg, None)?;
            let tables = inputs::load_layer(&cfg, &roster, emb.layer)?;
            let (d, diag) = distance_matrix(&tables, emb.measure, LanguageDistanceOptions { min_shared }).map_err(input)?;
            if let Some(p) = diagnostics {
                emit(Some(&p), &diagnostics_csv(&diag))?;
            }
            emit(out.as_deref(), &d.to_csv())?;
            Ok(0)
        }
        Command::Bli { emb, out } => {
            let cfg = emb.config();
            let roster = inputs::roster(&cfg, None)?;
            let tables = inputs::load_layer(&cfg, &roster, emb.layer)?;
            emit(out.as_deref(), &bli_csv(&tables, &bli_matrix(&tables, emb.measure)))?;
            Ok(0)
        }
        Command::Tree { distances, method, out } => {
            let d = inputs::load_matrix(&distances)?;
            let (tree, trace) = method.infer(&d).map_err(input)?;
            if trace.clamped_negative > 0 {
                eprintln!("note: {} negative branch lengths set to zero", trace.clamped_negative);
            }
            emit(out.as_deref(), &format!("{}\n", to_newick(&tree)))?;
            Ok(0)
        }
        Command::Gqd { reference, inferred, out } => {
            let r = parse_newick_file::<f64>(&reference).map_err(input)?;
            let i = parse_newick_file::<f64>(&inferred).map_err(input)?;
            let report = gqd(&r, &i).map_err(input)?;
            emit(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&report).expect("reports serialize")))?;
            Ok(0)
        }
        Command::Mrm { response, predictors, nperm, seed, target, standardize, format, out } => {
            let y = inputs::load_matrix(&response)?;
            let mut preds = IndexMap::new();
            for (name, path) in &predictors {
                preds.insert(name.clone(), inputs::load_matrix(path)?);
            }
            let r = run_regression(&y, &preds, RegressionSettings { nperm, seed, target, standardize })?;
            let text = if format == "csv" { r.to_csv() } else { format!("{}\n", r.to_json()) };
            emit(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Stability { emb, lists, aliases, statistics, correlation, alpha, min_pair_count, out } => {
            let cfg = emb.config();
            let roster = inputs::roster(&cfg, None)?;
            let tables = inputs::load_layer(&cfg, &roster, emb.layer)?;
            let lists = inputs::load_lists(&lists)?;
            let aliases = inputs::load_aliases(aliases.as_deref())?;
            let set = variability_scores(&tables, &statistics);
            let opts = CorrelationOptions { method: correlation, alpha, min_pair_count };
            let outcome = correlate_with_lists(&set.scores, emb.layer, &lists, &aliases, opts);
            for s in &outcome.skipped {
                eprintln!("warning: {} / {} skipped: {}", s.list, s.statistic, s.reason);
            }
            for (list, missing) in &outcome.unmatched {
                if !missing.is_empty() {
                    eprintln!("warning: list {list}: no scores for {}", missing.join(", "));
                }
            }
            emit(out.as_deref(), &correlations_to_csv(&outcome.reports))?;
            Ok(0)
        }
        Command::Synth { out, languages, concepts, dim, layers, noise, seed } => {
            let spec = FixtureSpec { languages, concepts, dim, layers, noise, seed };
            write_fixture(&out, &spec)?;
            println!("{}", out.join("run.conf").display());
            Ok(0)
        }
        Command::Compare { run, reference, gqd_tol, r2_tol } => {
            let c = compare_run(&run, &reference, Tolerances { gqd: gqd_tol, r2: r2_tol })?;
            print!("{}", c.to_csv());
            for u in &c.unmatched {
                eprintln!("unmatched: {u}");
            }
            let outside = c.cells.iter().filter(|x| !x.within).count();
            eprintln!("{} cells compared, {outside} outside tolerance", c.cells.len());
            Ok(if c.passed() { 0 } else { 1 })
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code: 0 success, 1 input error, 2 internal error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("internal error: an invariant was violated");
            2
        }
    }
}
