//! Labeled training and evaluation data in the two feature spaces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{FfpError, Result};
use crate::fingerprint::FeatureSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Split> {
        match s {
            "train" => Some(Split::Train),
            "validation" | "valid" | "dev" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One encoder output vector with its gold label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector<T> {
    pub id: String,
    pub label: String,
    pub vector: Vec<T>,
}

/// One text reduced to its token multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTokenBag {
    pub id: String,
    pub label: String,
    pub tokens: Vec<String>,
}

impl LabeledTokenBag {
    pub fn from_text(id: impl Into<String>, label: impl Into<String>, text: &str) -> Result<Self> {
        let id = id.into();
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(FfpError::Build(format!("instance `{id}` has no tokens")));
        }
        Ok(LabeledTokenBag { id, label: label.into(), tokens })
    }
}

/// Lowercases and splits on every run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationDataset<T> {
    dimension: usize,
    records: Vec<LabeledVector<T>>,
}

impl<T: Scalar> ActivationDataset<T> {
    pub fn new(dimension: usize, records: Vec<LabeledVector<T>>) -> Result<Self> {
        if dimension == 0 {
            return Err(FfpError::Dimension("dimension must be at least 1".into()));
        }
        for r in &records {
            if r.vector.len() != dimension {
                return Err(FfpError::Dimension(format!(
                    "record `{}` has {} values, expected {dimension}",
                    r.id,
                    r.vector.len()
                )));
            }
            if let Some(d) = r.vector.iter().position(|v| !v.is_finite_value()) {
                return Err(FfpError::Build(format!("record `{}` has a non-finite value at {d}", r.id)));
            }
        }
        Ok(ActivationDataset { dimension, records })
    }

    /// Infers the dimension from the first record.
    pub fn from_records(records: Vec<LabeledVector<T>>) -> Result<Self> {
        let dimension = records
            .first()
            .map(|r| r.vector.len())
            .ok_or_else(|| FfpError::EmptyDataset("no activation records".into()))?;
        Self::new(dimension, records)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn records(&self) -> &[LabeledVector<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.label.clone()).collect()
    }

    /// Applies `f` to every coordinate of every vector.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|r| LabeledVector { id: r.id.clone(), label: r.label.clone(), vector: r.vector.iter().map(|&v| f(v)).collect() })
            .collect();
        Self::new(self.dimension, records)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TokenDataset {
    records: Vec<LabeledTokenBag>,
}

impl TokenDataset {
    pub fn new(records: Vec<LabeledTokenBag>) -> Result<Self> {
        if let Some(r) = records.iter().find(|r| r.tokens.is_empty()) {
            return Err(FfpError::Build(format!("instance `{}` has no tokens", r.id)));
        }
        Ok(TokenDataset { records })
    }

    pub fn records(&self) -> &[LabeledTokenBag] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.records.iter().map(|r| r.label.clone()).collect()
    }
}

/// Training or evaluation data in either feature space.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset<T> {
    Activation(ActivationDataset<T>),
    Token(TokenDataset),
}

impl<T: Scalar> Dataset<T> {
    pub fn feature_space(&self) -> FeatureSpace {
        match self {
            Dataset::Activation(_) => FeatureSpace::Activation,
            Dataset::Token(_) => FeatureSpace::Token,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Activation(d) => d.len(),
            Dataset::Token(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> BTreeSet<String> {
        match self {
            Dataset::Activation(d) => d.labels(),
            Dataset::Token(d) => d.labels(),
        }
    }

    pub fn ids(&self) -> Vec<&str> {
        match self {
            Dataset::Activation(d) => d.records().iter().map(|r| r.id.as_str()).collect(),
            Dataset::Token(d) => d.records().iter().map(|r| r.id.as_str()).collect(),
        }
    }

    pub fn gold_labels(&self) -> Vec<&str> {
        match self {
            Dataset::Activation(d) => d.records().iter().map(|r| r.label.as_str()).collect(),
            Dataset::Token(d) => d.records().iter().map(|r| r.label.as_str()).collect(),
        }
    }
}

impl<T> From<ActivationDataset<T>> for Dataset<T> {
    fn from(d: ActivationDataset<T>) -> Self {
        Dataset::Activation(d)
    }
}

impl<T> From<TokenDataset> for Dataset<T> {
    fn from(d: TokenDataset) -> Self {
        Dataset::Token(d)
    }
}
