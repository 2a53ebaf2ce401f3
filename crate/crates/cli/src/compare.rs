//! Cell-by-cell comparison of a run's layer tables against reference tables
//! of the same shape, at a per-table absolute tolerance.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub gqd: f64,
    pub r2: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gqd: 0.05, r2: 0.08 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComparison {
    pub table: String,
    pub row: String,
    pub layer: String,
    pub ours: f64,
    pub reference: f64,
    pub diff: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Comparison {
    pub cells: Vec<CellComparison>,
    /// Reference rows or layers with no counterpart in the run.
    pub unmatched: Vec<String>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        !self.cells.is_empty() && self.cells.iter().all(|c| c.within)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,row,layer,ours,reference,diff,within\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", c.table, c.row, c.layer, c.ours, c.reference, c.diff, c.within);
        }
        out
    }
}

fn norm(s: &str) -> String {
    let s = s.trim().trim_end_matches('.').to_lowercase();
    match s.as_str() {
        "average" => "avg".into(),
        _ => s,
    }
}

struct Table {
    layers: Vec<String>,
    rows: Vec<(String, Vec<Option<f64>>)>,
}

/// `key_cols` leading columns form the row key; the rest are layers.
fn read_table(text: &str, key_cols: usize) -> Result<Table, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| e.to_string())?.clone();
    if header.len() <= key_cols {
        return Err("no layer columns".into());
    }
    let layers = header.iter().skip(key_cols).map(norm).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let key = rec.iter().take(key_cols).map(norm).collect::<Vec<_>>().join("/");
        let vals = rec
            .iter()
            .skip(key_cols)
            .map(|v| if v.is_empty() { Ok(None) } else { v.parse().map(Some).map_err(|_| format!("invalid number {v:?}")) })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((key, vals));
    }
    Ok(Table { layers, rows })
}

pub fn compare_tables(name: &str, ours: &str, reference: &str, key_cols: usize, tol: f64) -> Result<Comparison, String> {
    let (a, b) = (read_table(ours, key_cols)?, read_table(reference, key_cols)?);
    let mut out = Comparison::default();
    for (key, ref_vals) in &b.rows {
        let Some((_, our_vals)) = a.rows.iter().find(|(k, _)| k == key) else {
            out.unmatched.push(format!("{name}: row {key}"));
            continue;
        };
        for (layer, rv) in b.layers.iter().zip(ref_vals) {
            let Some(rv) = rv else { continue };
            match a.layers.iter().position(|l| l == layer).and_then(|j| our_vals.get(j).copied().flatten()) {
                Some(ov) => {
                    let diff = (ov - rv).abs();
                    out.cells.push(CellComparison {
                        table: name.into(),
                        row: key.clone(),
                        layer: layer.clone(),
                        ours: ov,
                        reference: *rv,
                        diff,
                        within: diff <= tol + 1e-12,
                    });
                }
                None => out.unmatched.push(format!("{name}: {key} layer {layer}")),
            }
        }
    }
    Ok(out)
}

/// Compares `table_gqd.csv` and `table_r2.csv` of a run directory with the
/// same-named files in `reference_dir` (either may be absent on one side).
pub fn compare_run(run_dir: &Path, reference_dir: &Path, tol: Tolerances) -> Result<Comparison, CliError> {
    let mut all = Comparison::default();
    for (file, keys, t) in [("table_gqd.csv", 2, tol.gqd), ("table_r2.csv", 1, tol.r2)] {
        let (ours, reference) = (run_dir.join(file), reference_dir.join(file));
        if !reference.exists() {
            continue;
        }
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())));
        if !ours.exists() {
            all.unmatched.push(format!("{file}: not produced by the run"));
            continue;
        }
        let c = compare_tables(file, &read(&ours)?, &read(&reference)?, keys, t)
            .map_err(|e| CliError::Input(format!("{file}: {e}")))?;
        all.cells.extend(c.cells);
        all.unmatched.extend(c.unmatched);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_rows_and_layers_loosely() {
        let ours = "method,word_list,0,2,avg\nUPGMA,PanLex,0.30,0.20,0.2\nNJ,PanLex,0.4,,0.3\n";
        let reference = "method,word_list,0,2,Avg.\nupgma,panlex,0.34,0.17,0.20\nnj,panlex,0.38,0.30,0.30\nnj,other,1,1,1\n";
        let c = compare_tables("t", ours, reference, 2, 0.05).unwrap();
        assert_eq!(c.cells.len(), 5);
        assert!(c.cells.iter().all(|x| x.within));
        assert_eq!(c.unmatched.len(), 2, "{:?}", c.unmatched);
        assert!(c.passed());
        let strict = compare_tables("t", ours, reference, 2, 0.01).unwrap();
        assert!(!strict.passed());
    }
}
