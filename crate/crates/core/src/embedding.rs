//! Per-(language, layer) concept vector store.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

/// Layer a table was extracted from: a concrete index, or the element-wise
/// mean over all layers of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Index(u32),
    Average,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Index(k) => write!(f, "{k}"),
            Layer::Average => f.write_str("avg"),
        }
    }
}

impl Serialize for Layer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for Layer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("avg") || t.eq_ignore_ascii_case("average") {
            return Ok(Layer::Average);
        }
        t.parse::<u32>().map(Layer::Index).map_err(|_| format!("invalid layer {s:?}"))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("concept {concept:?} has {got} components, expected {expected}")]
    Dim { concept: String, got: usize, expected: usize },
    #[error("concept {0:?} has a non-finite component")]
    NonFinite(String),
    #[error("duplicate concept {0:?}")]
    Duplicate(String),
    #[error("layer {layer} outside the declared {count} layers")]
    LayerRange { layer: u32, count: u32 },
    #[error("cannot average zero tables")]
    NoTables,
    #[error("tables disagree on {0}")]
    Mismatch(&'static str),
}

/// Dense vectors for the concepts of one language at one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    language: String,
    layer: Layer,
    dim: usize,
    concepts: Vec<String>,
    data: Vec<T>,
    index: HashMap<String, usize>,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn new(language: impl Into<String>, layer: Layer, dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        Ok(Self {
            language: language.into(),
            layer,
            dim,
            concepts: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
        })
    }

    /// Fails if `layer` is not below `layer_count`.
    pub fn check_layer(&self, layer_count: u32) -> Result<(), EmbeddingError> {
        match self.layer {
            Layer::Index(k) if k >= layer_count => {
                Err(EmbeddingError::LayerRange { layer: k, count: layer_count })
            }
            _ => Ok(()),
        }
    }

    pub fn insert(&mut self, concept: impl Into<String>, vector: &[T]) -> Result<(), EmbeddingError> {
        let concept = concept.into();
        if vector.len() != self.dim {
            return Err(EmbeddingError::Dim { concept, got: vector.len(), expected: self.dim });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite(concept));
        }
        if self.index.contains_key(&concept) {
            return Err(EmbeddingError::Duplicate(concept));
        }
        self.index.insert(concept.clone(), self.concepts.len());
        self.concepts.push(concept);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    /// Convenience constructor from (concept, vector) pairs.
    pub fn from_rows<S: Into<String>>(
        language: impl Into<String>,
        layer: Layer,
        dim: usize,
        rows: impl IntoIterator<Item = (S, Vec<T>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut t = Self::new(language, layer, dim)?;
        for (c, v) in rows {
            t.insert(c, &v)?;
        }
        Ok(t)
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn layer(&self) -> Layer {
        self.layer
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    /// Concepts in insertion (file) order.
    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn get(&self, concept: &str) -> Option<&[T]> {
        self.index.get(concept).map(|&i| self.vector_at(i))
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.index.contains_key(concept)
    }

    pub fn vector_at(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[T])> {
        self.concepts.iter().enumerate().map(|(i, c)| (c.as_str(), self.vector_at(i)))
    }

    /// Scales every vector by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= factor);
        out
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    /// Writes the text vector format: header `N d`, then one line per concept.
    pub fn to_vec_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (c, v) in self.iter() {
            out.push_str(c);
            for x in v {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }
}

/// Element-wise mean of one language's vectors across several layers.
///
/// Only concepts present in every table are kept, in the first table's order.
pub fn average_layers<T: Scalar>(tables: &[EmbeddingTable<T>]) -> Result<EmbeddingTable<T>, EmbeddingError> {
    let first = tables.first().ok_or(EmbeddingError::NoTables)?;
    if tables.iter().any(|t| t.language != first.language) {
        return Err(EmbeddingError::Mismatch("language"));
    }
    if tables.iter().any(|t| t.dim != first.dim) {
        return Err(EmbeddingError::Mismatch("dimension"));
    }
    let count = T::from_count(tables.len());
    let mut out = EmbeddingTable::new(first.language.clone(), Layer::Average, first.dim)?;
    let mut acc = vec![T::zero(); first.dim];
    'concepts: for (c, _) in first.iter() {
        acc.iter_mut().for_each(|a| *a = T::zero());
        for t in tables {
            let Some(v) = t.get(c) else { continue 'concepts };
            acc.iter_mut().zip(v).for_each(|(a, &x)| *a += x);
        }
        acc.iter_mut().for_each(|a| *a /= count);
        out.insert(c, &acc)?;
    }
    Ok(out)
}
