//! Concept stability lists: `concept<TAB>score` with `#key=value` metadata.

use std::io::BufRead;
use std::path::Path;

use indexmap::IndexMap;
use serde::Serialize;

use super::{io_err, nfc, open, strip_eol, IngestError};
use crate::scalar::Scalar;

/// How a list's scores relate to diachronic stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherMoreStable,
    HigherLessStable,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::HigherMoreStable => "higher_more_stable",
            Direction::HigherLessStable => "higher_less_stable",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "higher_more_stable" => Ok(Direction::HigherMoreStable),
            "higher_less_stable" => Ok(Direction::HigherLessStable),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList<T> {
    pub name: String,
    pub direction: Direction,
    /// Scores in file order.
    pub scores: IndexMap<String, T>,
}

/// Parses a list file; the name defaults to the file stem unless a `#name=` line is present.
pub fn parse_ranked_list<T: Scalar>(path: &Path) -> Result<RankedList<T>, IngestError> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("list").to_string();
    read_ranked_list(open(path)?, &stem).map_err(|e| e.in_file(path))
}

pub fn read_ranked_list<T: Scalar, R: BufRead>(reader: R, default_name: &str) -> Result<RankedList<T>, IngestError> {
    let mut name = default_name.to_string();
    let mut direction = None;
    let mut scores = IndexMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(io_err)?;
        let line = strip_eol(&line).trim_start_matches('\u{feff}');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                match k.trim() {
                    "direction" => {
                        direction = Some(v.parse::<Direction>().map_err(|e| IngestError::line(lineno, e))?)
                    }
                    "name" => name = v.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        let Some((concept, score)) = line.split_once('\t') else {
            return Err(IngestError::line(lineno, "expected concept<TAB>score"));
        };
        let concept = nfc(concept.trim());
        let score = score.trim();
        if scores.is_empty() && concept == "concept" && score == "score" {
            continue;
        }
        let v: T = score.parse().map_err(|_| IngestError::line(lineno, format!("non-numeric score {score:?}")))?;
        if !v.is_finite() {
            return Err(IngestError::line(lineno, format!("non-finite score {score:?}")));
        }
        if concept.is_empty() {
            return Err(IngestError::line(lineno, "empty concept"));
        }
        if scores.insert(concept.clone(), v).is_some() {
            return Err(IngestError::line(lineno, format!("duplicate concept {concept:?}")));
        }
    }
    let direction = direction.ok_or_else(|| IngestError::Format("missing #direction= metadata".into()))?;
    if scores.is_empty() {
        return Err(IngestError::Format("ranked list has no entries".into()));
    }
    Ok(RankedList { name, direction, scores })
}
