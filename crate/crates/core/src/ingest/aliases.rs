//! Concept-name alias table: `alias<TAB>canonical`, `#` comments.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use super::{io_err, nfc, open, strip_eol, IngestError};

/// Maps alternative concept names onto canonical ones, case-insensitively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AliasTable {
    map: HashMap<String, String>,
}

impl AliasTable {
    pub fn insert(&mut self, alias: &str, canonical: &str) {
        self.map.insert(normalize_concept(alias), normalize_concept(canonical));
    }

    /// Case-folded, NFC-normalized key with aliases resolved.
    pub fn resolve(&self, concept: &str) -> String {
        let key = normalize_concept(concept);
        self.map.get(&key).cloned().unwrap_or(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

pub fn normalize_concept(s: &str) -> String {
    nfc(s.trim()).to_lowercase()
}

pub fn parse_alias_table(path: &Path) -> Result<AliasTable, IngestError> {
    read_alias_table(open(path)?).map_err(|e| e.in_file(path))
}

pub fn read_alias_table<R: BufRead>(reader: R) -> Result<AliasTable, IngestError> {
    let mut table = AliasTable::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let line = strip_eol(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (a, c) = line
            .split_once('\t')
            .ok_or_else(|| IngestError::line(i + 1, "expected alias<TAB>canonical"))?;
        table.insert(a, c);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_case_insensitively() {
        let t = read_alias_table("# comment\n1SG pronoun\tI\n".as_bytes()).unwrap();
        assert_eq!(t.resolve("1sg PRONOUN"), "i");
        assert_eq!(t.resolve("Hand"), "hand");
    }
}
