//! Class fingerprint construction from labeled training data.
//!
//! Activation space: sum every training vector of a class, rank the output
//! coordinates by the accumulated value, keep the top K and fuzzify.
//! Token space: count token frequencies per class, rank by count, keep the
//! top K and fuzzify.
//!
//! Both paths go through [`ClassRankings`], which holds the full per-class
//! ranking. A library at any K is a prefix truncation of it, which is what
//! the K sweep relies on.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dataset::{ActivationDataset, Dataset, LabeledTokenBag, LabeledVector, TokenDataset};
use crate::error::{FfpError, Result};
use crate::fingerprint::{fuzzify, rank, ElementId, FeatureSpace, Fingerprint, FuzzifyParams, RankingMode};
use crate::library::{FingerprintLibrary, Vocabulary};
use crate::scalar::Scalar;
use crate::token::rank_tokens;

/// Running per-coordinate sum over one class's training vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAccumulator<T> {
    pub label: String,
    pub sums: Vec<T>,
    pub count: usize,
}

impl<T: Scalar> ClassAccumulator<T> {
    pub fn new(label: impl Into<String>, dimension: usize) -> Self {
        ClassAccumulator { label: label.into(), sums: vec![T::zero(); dimension], count: 0 }
    }

    pub fn add(&mut self, example: &LabeledVector<T>) -> Result<()> {
        if example.label != self.label {
            return Err(FfpError::Build(format!(
                "example `{}` has label `{}`, accumulator is for `{}`",
                example.id, example.label, self.label
            )));
        }
        if example.vector.len() != self.sums.len() {
            return Err(FfpError::Dimension(format!(
                "example `{}` has {} values, expected {}",
                example.id,
                example.vector.len(),
                self.sums.len()
            )));
        }
        for (s, &v) in self.sums.iter_mut().zip(&example.vector) {
            *s = *s + v;
        }
        self.count += 1;
        Ok(())
    }
}

/// Sums a class's training vectors coordinate-wise.
pub fn accumulate_class<'a, T: Scalar>(examples: impl IntoIterator<Item = &'a LabeledVector<T>>) -> Result<ClassAccumulator<T>> {
    let mut iter = examples.into_iter();
    let first = iter.next().ok_or_else(|| FfpError::Build("cannot accumulate an empty class".into()))?;
    let mut acc = ClassAccumulator::new(first.label.clone(), first.vector.len());
    acc.add(first)?;
    for ex in iter {
        acc.add(ex)?;
    }
    Ok(acc)
}

pub fn build_activation_fingerprint<T: Scalar>(acc: &ClassAccumulator<T>, params: &FuzzifyParams<T>) -> Result<Fingerprint<T>> {
    build_activation_fingerprint_with(acc, params, RankingMode::Signed)
}

pub fn build_activation_fingerprint_with<T: Scalar>(
    acc: &ClassAccumulator<T>,
    params: &FuzzifyParams<T>,
    ranking: RankingMode,
) -> Result<Fingerprint<T>> {
    if acc.count == 0 {
        return Err(FfpError::Build(format!("class `{}` has no accumulated examples", acc.label)));
    }
    check_k(params.k(), acc.sums.len())?;
    let ranked = rank(&acc.sums, ranking)?;
    fuzzify(&ranked, params, FeatureSpace::Activation)
}

/// Fingerprint of a single unlabeled vector, built exactly like a class
/// fingerprint of a one-example class.
pub fn instance_fingerprint<T: Scalar>(vector: &[T], params: &FuzzifyParams<T>) -> Result<Fingerprint<T>> {
    check_k(params.k(), vector.len())?;
    let ranked = rank(vector, RankingMode::Signed)?;
    fuzzify(&ranked, params, FeatureSpace::Activation)
}

fn check_k(k: usize, dimension: usize) -> Result<()> {
    if k > dimension {
        return Err(FfpError::Parameter(format!("fingerprint size {k} exceeds dimension {dimension}")));
    }
    Ok(())
}

/// Token-space class fingerprint before vocabulary interning.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenFingerprint<T> {
    pub entries: Vec<(String, T)>,
    pub k: usize,
}

pub fn build_token_fingerprint<'a, T: Scalar>(
    examples: impl IntoIterator<Item = &'a LabeledTokenBag>,
    params: &FuzzifyParams<T>,
) -> Result<TokenFingerprint<T>> {
    let examples: Vec<&LabeledTokenBag> = examples.into_iter().collect();
    let label = examples.first().map(|e| e.label.as_str()).ok_or_else(|| FfpError::Build("no examples".into()))?;
    if let Some(e) = examples.iter().find(|e| e.label != label) {
        return Err(FfpError::Build(format!("example `{}` has label `{}`, expected `{label}`", e.id, e.label)));
    }
    let ranked = rank_class_tokens(&examples);
    if ranked.len() < params.k() {
        return Err(FfpError::Build(format!(
            "class `{label}` has {} distinct tokens, fingerprint size is {}",
            ranked.len(),
            params.k()
        )));
    }
    let entries = ranked.into_iter().take(params.k()).enumerate().map(|(i, t)| (t, params.membership(i))).collect();
    Ok(TokenFingerprint { entries, k: params.k() })
}

fn rank_class_tokens(examples: &[&LabeledTokenBag]) -> Vec<String> {
    let all: Vec<&str> = examples.iter().flat_map(|e| e.tokens.iter().map(String::as_str)).collect();
    rank_tokens(&all).into_iter().map(|(t, _)| t).collect()
}

/// Full per-class rankings from which libraries of any size are cut.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassRankings {
    Activation { dimension: usize, ranking: RankingMode, classes: BTreeMap<String, Vec<ElementId>> },
    Token { classes: BTreeMap<String, Vec<String>> },
}

impl ClassRankings {
    pub fn from_dataset<T: Scalar>(data: &Dataset<T>, ranking: RankingMode) -> Result<Self> {
        match data {
            Dataset::Activation(d) => Self::from_activations(d, ranking),
            Dataset::Token(d) => Self::from_tokens(d),
        }
    }

    pub fn from_activations<T: Scalar>(data: &ActivationDataset<T>, ranking: RankingMode) -> Result<Self> {
        if data.is_empty() {
            return Err(FfpError::Build("empty training dataset".into()));
        }
        let mut groups: BTreeMap<&str, Vec<&LabeledVector<T>>> = BTreeMap::new();
        for r in data.records() {
            groups.entry(r.label.as_str()).or_default().push(r);
        }
        let classes = groups
            .into_par_iter()
            .map(|(label, examples)| {
                let acc = accumulate_class(examples)?;
                Ok((label.to_string(), rank(&acc.sums, ranking)?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(ClassRankings::Activation { dimension: data.dimension(), ranking, classes })
    }

    pub fn from_tokens(data: &TokenDataset) -> Result<Self> {
        if data.is_empty() {
            return Err(FfpError::Build("empty training dataset".into()));
        }
        let mut groups: BTreeMap<&str, Vec<&LabeledTokenBag>> = BTreeMap::new();
        for r in data.records() {
            groups.entry(r.label.as_str()).or_default().push(r);
        }
        let classes = groups.into_par_iter().map(|(label, examples)| (label.to_string(), rank_class_tokens(&examples))).collect();
        Ok(ClassRankings::Token { classes })
    }

    pub fn feature_space(&self) -> FeatureSpace {
        match self {
            ClassRankings::Activation { .. } => FeatureSpace::Activation,
            ClassRankings::Token { .. } => FeatureSpace::Token,
        }
    }

    /// Largest K every class can support.
    pub fn max_k(&self) -> usize {
        match self {
            ClassRankings::Activation { dimension, .. } => *dimension,
            ClassRankings::Token { classes } => classes.values().map(Vec::len).min().unwrap_or(0),
        }
    }

    /// Truncates every class ranking to `params.k()` and fuzzifies.
    pub fn library<T: Scalar>(&self, params: &FuzzifyParams<T>) -> Result<FingerprintLibrary<T>> {
        match self {
            ClassRankings::Activation { dimension, ranking, classes } => {
                check_k(params.k(), *dimension)?;
                let fps = classes
                    .iter()
                    .map(|(label, ranked)| Ok((label.clone(), fuzzify(ranked, params, FeatureSpace::Activation)?)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                FingerprintLibrary::activation(fps, *params, *dimension, *ranking)
            }
            ClassRankings::Token { classes } => {
                if let Some((label, ranked)) = classes.iter().find(|(_, r)| r.len() < params.k()) {
                    return Err(FfpError::Build(format!(
                        "class `{label}` has {} distinct tokens, fingerprint size is {}",
                        ranked.len(),
                        params.k()
                    )));
                }
                let vocab = Vocabulary::new(classes.values().flat_map(|r| r[..params.k()].iter().cloned()));
                let fps = classes
                    .iter()
                    .map(|(label, ranked)| {
                        let ids: Vec<ElementId> =
                            ranked[..params.k()].iter().map(|t| vocab.id(t).expect("interned above")).collect();
                        Ok((label.clone(), fuzzify(&ids, params, FeatureSpace::Token)?))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()?;
                FingerprintLibrary::token(fps, *params, vocab)
            }
        }
    }
}

/// One fingerprint per label, all with identical parameters, signed ranking.
pub fn build_library<T: Scalar>(data: &Dataset<T>, params: &FuzzifyParams<T>) -> Result<FingerprintLibrary<T>> {
    build_library_with(data, params, RankingMode::Signed)
}

pub fn build_library_with<T: Scalar>(data: &Dataset<T>, params: &FuzzifyParams<T>, ranking: RankingMode) -> Result<FingerprintLibrary<T>> {
    ClassRankings::from_dataset(data, ranking)?.library(params)
}
