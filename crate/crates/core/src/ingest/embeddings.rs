//! Text vector files: header `N d`, then `conceptID f1 ... fd` per line.

use std::io::BufRead;
use std::path::Path;

use super::{io_err, nfc, open, IngestError};
use crate::embedding::{EmbeddingError, EmbeddingTable, Layer};
use crate::scalar::Scalar;

/// Where a table's language and layer come from.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSource {
    /// Overrides the language taken from the file name.
    pub language: Option<String>,
    /// Overrides the layer taken from the file name.
    pub layer: Option<Layer>,
    /// Declared number of layers; layer indices must be below it.
    pub layer_count: Option<u32>,
}

/// `<language>.layer<k>.vec`
pub fn vec_file_name(language: &str, layer: Layer) -> String {
    format!("{language}.layer{layer}.vec")
}

/// Splits `<language>.layer<k>.vec` into its parts.
pub fn split_vec_file_name(name: &str) -> Option<(String, Layer)> {
    let stem = name.strip_suffix(".vec")?;
    let (lang, layer) = stem.rsplit_once(".layer")?;
    if lang.is_empty() {
        return None;
    }
    Some((lang.to_string(), layer.parse().ok()?))
}

pub fn parse_embeddings<T: Scalar>(path: &Path, source: &EmbeddingSource) -> Result<EmbeddingTable<T>, IngestError> {
    let from_name = path.file_name().and_then(|n| n.to_str()).and_then(split_vec_file_name);
    let language = source
        .language
        .clone()
        .or_else(|| from_name.as_ref().map(|(l, _)| l.clone()))
        .ok_or_else(|| {
            IngestError::Format(format!(
                "{}: cannot infer language and layer; expected <lang>.layer<k>.vec",
                path.display()
            ))
        })?;
    let layer = source
        .layer
        .or(from_name.map(|(_, k)| k))
        .ok_or_else(|| IngestError::Format(format!("{}: cannot infer layer", path.display())))?;
    let src = EmbeddingSource { language: Some(language), layer: Some(layer), ..source.clone() };
    read_embeddings(open(path)?, &src).map_err(|e| e.in_file(path))
}

/// Reads a vector file. `source.language` and `source.layer` must be set.
pub fn read_embeddings<T: Scalar, R: BufRead>(
    reader: R,
    source: &EmbeddingSource,
) -> Result<EmbeddingTable<T>, IngestError> {
    let language = source.language.clone().ok_or_else(|| IngestError::Format("language not given".into()))?;
    let layer = source.layer.ok_or_else(|| IngestError::Format("layer not given".into()))?;
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(io_err)?,
        None => return Err(IngestError::line(1, "empty file, expected header \"N d\"")),
    };
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match parts.as_slice() {
        [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
            (Ok(n), Ok(d)) if d > 0 => (n, d),
            _ => return Err(IngestError::line(1, format!("malformed header {header:?}"))),
        },
        _ => return Err(IngestError::line(1, format!("malformed header {header:?}"))),
    };
    let mut table = EmbeddingTable::new(language, layer, dim).map_err(|e| IngestError::line(1, e.to_string()))?;
    if let Some(n) = source.layer_count {
        table.check_layer(n).map_err(|e| IngestError::Format(e.to_string()))?;
    }
    let mut buf: Vec<T> = Vec::with_capacity(dim);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(io_err)?;
        let mut tokens = line.split_whitespace();
        let Some(concept) = tokens.next() else { continue };
        buf.clear();
        for tok in tokens {
            let v: T = tok
                .parse()
                .map_err(|_| IngestError::line(lineno, format!("invalid number {tok:?}")))?;
            buf.push(v);
        }
        if buf.len() != dim {
            return Err(IngestError::line(
                lineno,
                format!("dimension mismatch: {} values, expected {dim}", buf.len()),
            ));
        }
        match table.insert(nfc(concept), &buf) {
            Ok(()) => {}
            Err(EmbeddingError::NonFinite(c)) => {
                return Err(IngestError::line(lineno, format!("non-finite value for {c:?}")))
            }
            Err(EmbeddingError::Duplicate(c)) => {
                return Err(IngestError::line(lineno, format!("duplicate concept {c:?}")))
            }
            Err(e) => return Err(IngestError::line(lineno, e.to_string())),
        }
    }
    if table.len() != count {
        return Err(IngestError::Format(format!(
            "entry count mismatch: header declares {count}, found {}",
            table.len()
        )));
    }
    Ok(table)
}
