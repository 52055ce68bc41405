//! Embedding dataset files: one JSON object per line,
//!
//! ```text
//! {"id": "train-0-3", "split": "train", "label": "anger", "vector": [0.12, -0.5, ...]}
//! ```
//!
//! A line of the form `{"metadata": {...}}` carries producer information
//! (encoder, context size) and is kept aside rather than treated as a record.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{for_each_line, parse_error, write_json_line, Splits};
use crate::dataset::{ActivationDataset, LabeledVector, Split};
use crate::error::{FfpError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub id: String,
    pub split: Split,
    pub label: String,
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T> {
    pub dimension: usize,
    pub data: Splits<ActivationDataset<T>>,
    pub metadata: Option<Value>,
}

impl<T: Scalar> EmbeddingSet<T> {
    pub fn split(&self, split: Split) -> Option<&ActivationDataset<T>> {
        self.data.get(split)
    }

    pub fn len(&self) -> usize {
        self.data.splits.values().map(ActivationDataset::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Reject records whose label is outside this set.
    pub labels: Option<BTreeSet<String>>,
    /// Required vector length; inferred from the first record when unset.
    pub dimension: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Record { id: String, split: String, label: String, vector: Vec<f64> },
    Metadata { metadata: Value },
}

pub fn load_embeddings<T: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingSet<T>> {
    load_embeddings_with(path, &LoadOptions::default())
}

pub fn load_embeddings_with<T: Scalar>(path: impl AsRef<Path>, options: &LoadOptions) -> Result<EmbeddingSet<T>> {
    let path = path.as_ref();
    let mut dimension = options.dimension;
    let mut metadata = None;
    let mut groups: BTreeMap<Split, Vec<LabeledVector<T>>> = BTreeMap::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for_each_line(path, |n, line| {
        let parsed: Line = serde_json::from_str(line).map_err(|e| parse_error(path, n, e.to_string()))?;
        let (id, split, label, vector) = match parsed {
            Line::Record { id, split, label, vector } => (id, split, label, vector),
            Line::Metadata { metadata: m } => {
                metadata = Some(m);
                return Ok(());
            }
        };
        let split = Split::parse(&split).ok_or_else(|| parse_error(path, n, format!("unknown split `{split}`")))?;
        if let Some(labels) = &options.labels {
            if !labels.contains(&label) {
                return Err(parse_error(path, n, format!("record `{id}` has unknown label `{label}`")));
            }
        }
        let d = *dimension.get_or_insert(vector.len());
        if vector.len() != d {
            return Err(FfpError::Dimension(format!(
                "{}: line {n}: record `{id}` has {} values, expected {d}",
                path.display(),
                vector.len()
            )));
        }
        if !seen.insert(id.clone()) {
            return Err(parse_error(path, n, format!("duplicate record id `{id}`")));
        }
        let vector = vector
            .into_iter()
            .map(|v| T::from_f64_value(v).filter(|x| x.is_finite_value()))
            .collect::<Option<Vec<T>>>()
            .ok_or_else(|| parse_error(path, n, format!("record `{id}` has a value outside the scalar range")))?;
        groups.entry(split).or_default().push(LabeledVector { id, label, vector });
        Ok(())
    })?;
    let dimension = match dimension {
        Some(d) if !groups.is_empty() => d,
        _ => return Err(FfpError::EmptyDataset(format!("{} holds no embedding records", path.display()))),
    };
    let splits = groups
        .into_iter()
        .map(|(s, recs)| Ok((s, ActivationDataset::new(dimension, recs)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(EmbeddingSet { dimension, data: Splits { splits }, metadata })
}

/// Writes records (and an optional metadata line first) in the format read by
/// [`load_embeddings`].
pub fn write_embeddings<'a>(
    path: impl AsRef<Path>,
    metadata: Option<&Value>,
    records: impl IntoIterator<Item = &'a EmbeddingRecord>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| FfpError::io(path, e))?;
    let mut w = BufWriter::new(file);
    if let Some(m) = metadata {
        write_json_line(&mut w, &serde_json::json!({ "metadata": m })).map_err(|e| FfpError::io(path, e))?;
    }
    for r in records {
        write_json_line(&mut w, r).map_err(|e| FfpError::io(path, e))?;
    }
    w.flush().map_err(|e| FfpError::io(path, e))
}
