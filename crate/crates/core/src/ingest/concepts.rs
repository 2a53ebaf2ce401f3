//! Tab-separated concept lists: one row per concept, one column per language.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use super::{io_err, nfc, open, strip_eol, IngestError};

/// Concept identifiers with their surface forms per language.
///
/// A cell can carry several `|`-separated variants; all are kept. Empty cells
/// are recorded as missing.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptList {
    concepts: Vec<String>,
    languages: Vec<String>,
    // forms[concept][language]; empty means missing.
    forms: Vec<Vec<Vec<String>>>,
}

impl ConceptList {
    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Variants for a (concept, language) cell; `None` if either is unknown or the cell is missing.
    pub fn forms(&self, concept: &str, language: &str) -> Option<&[String]> {
        let c = self.concepts.iter().position(|x| x == concept)?;
        let l = self.languages.iter().position(|x| x == language)?;
        let f = &self.forms[c][l];
        (!f.is_empty()).then_some(f.as_slice())
    }

    /// Missing (concept, language) cells in row-major order.
    pub fn missing(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (ci, row) in self.forms.iter().enumerate() {
            for (li, cell) in row.iter().enumerate() {
                if cell.is_empty() {
                    out.push((self.concepts[ci].as_str(), self.languages[li].as_str()));
                }
            }
        }
        out
    }

    /// Concepts attested for `language`, in list order.
    pub fn concepts_for(&self, language: &str) -> Vec<&str> {
        let Some(l) = self.languages.iter().position(|x| x == language) else {
            return Vec::new();
        };
        self.concepts
            .iter()
            .zip(&self.forms)
            .filter(|(_, row)| !row[l].is_empty())
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

pub fn parse_concept_list(path: &Path, roster: Option<&[String]>) -> Result<ConceptList, IngestError> {
    read_concept_list(open(path)?, roster).map_err(|e| e.in_file(path))
}

/// Reads a concept list. When `roster` is given, every language column must appear in it.
pub fn read_concept_list<R: BufRead>(reader: R, roster: Option<&[String]>) -> Result<ConceptList, IngestError> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(io_err)?,
        None => return Err(IngestError::line(1, "empty file, expected a header")),
    };
    let header = nfc(strip_eol(header.trim_start_matches('\u{feff}')));
    let mut cols = header.split('\t');
    if cols.next() != Some("concept") {
        return Err(IngestError::line(1, "malformed header: first column must be \"concept\""));
    }
    let languages: Vec<String> = cols.map(|c| c.trim().to_string()).collect();
    if languages.is_empty() {
        return Err(IngestError::line(1, "malformed header: no language columns"));
    }
    let mut seen = HashSet::new();
    for l in &languages {
        if l.is_empty() {
            return Err(IngestError::line(1, "malformed header: empty language column"));
        }
        if !seen.insert(l.as_str()) {
            return Err(IngestError::line(1, format!("malformed header: duplicate language {l:?}")));
        }
        if let Some(r) = roster {
            if !r.iter().any(|x| x == l) {
                return Err(IngestError::line(1, format!("undeclared language column {l:?}")));
            }
        }
    }

    let mut concepts = Vec::new();
    let mut forms = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(io_err)?;
        let line = strip_eol(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != languages.len() + 1 {
            return Err(IngestError::line(
                lineno,
                format!("expected {} fields, found {}", languages.len() + 1, fields.len()),
            ));
        }
        let concept = nfc(fields[0].trim());
        if concept.is_empty() {
            return Err(IngestError::line(lineno, "empty concept identifier"));
        }
        if index.contains_key(&concept) {
            return Err(IngestError::line(lineno, format!("duplicate concept {concept:?}")));
        }
        let row = fields[1..]
            .iter()
            .map(|cell| {
                cell.split('|').map(|v| nfc(v.trim())).filter(|v| !v.is_empty()).collect()
            })
            .collect();
        index.insert(concept.clone(), concepts.len());
        concepts.push(concept);
        forms.push(row);
    }
    Ok(ConceptList { concepts, languages, forms })
}
