//! Parsers for every external input format.
//!
//! Each format has a reader-based entry point (`read_*`) and a path-based
//! wrapper (`parse_*`). Line numbers in errors are 1-based.

pub mod aliases;
pub mod concepts;
pub mod coordinates;
pub mod distance_csv;
pub mod embeddings;
pub mod newick;
pub mod ranked;

use std::path::{Path, PathBuf};

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub use aliases::{parse_alias_table, read_alias_table, AliasTable};
pub use concepts::{parse_concept_list, read_concept_list, ConceptList};
pub use coordinates::{parse_coordinates, read_coordinates, Coordinates};
pub use distance_csv::{parse_distance_csv, read_distance_csv};
pub use embeddings::{parse_embeddings, read_embeddings, vec_file_name, EmbeddingSource};
pub use newick::{parse_newick, parse_newick_file, to_newick};
pub use ranked::{parse_ranked_list, read_ranked_list, Direction, RankedList};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Format(String),
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<IngestError>,
    },
}

impl IngestError {
    pub(crate) fn line(line: usize, message: impl Into<String>) -> Self {
        IngestError::Line { line, message: message.into() }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            e @ IngestError::Io { .. } => e,
            e => IngestError::InFile { path: path.to_path_buf(), source: Box::new(e) },
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, IngestError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn io_err(e: std::io::Error) -> IngestError {
    IngestError::Io { path: PathBuf::new(), source: e }
}

/// Unicode NFC normalization applied to all ingested identifiers and forms.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

pub(crate) fn strip_eol(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}
