use std::collections::{BTreeMap, HashMap};

use crate::error::{FfpError, Result};
use crate::fingerprint::{fuzzify, fuzzify_partial, rank, ElementId, FeatureSpace, Fingerprint, FuzzifyParams, RankingMode};
use crate::scalar::Scalar;
use crate::token::rank_tokens;

/// Token strings addressed by [`ElementId`], sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, ElementId>,
}

impl Vocabulary {
    pub fn new(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut tokens: Vec<String> = tokens.into_iter().collect();
        tokens.sort();
        tokens.dedup();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), ElementId(i as u32))).collect();
        Vocabulary { tokens, index }
    }

    pub fn id(&self, token: &str) -> Option<ElementId> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: ElementId) -> Option<&str> {
        self.tokens.get(id.index()).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Per-class fingerprints sharing one set of build parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintLibrary<T> {
    classes: BTreeMap<String, Fingerprint<T>>,
    params: FuzzifyParams<T>,
    dimension: usize,
    feature_space: FeatureSpace,
    ranking: RankingMode,
    vocabulary: Option<Vocabulary>,
}

impl<T: Scalar> FingerprintLibrary<T> {
    /// Assembles an activation-space library.
    pub fn activation(
        classes: BTreeMap<String, Fingerprint<T>>,
        params: FuzzifyParams<T>,
        dimension: usize,
        ranking: RankingMode,
    ) -> Result<Self> {
        let lib = FingerprintLibrary { classes, params, dimension, feature_space: FeatureSpace::Activation, ranking, vocabulary: None };
        lib.validate()?;
        Ok(lib)
    }

    /// Assembles a token-space library; element ids index `vocabulary`.
    pub fn token(classes: BTreeMap<String, Fingerprint<T>>, params: FuzzifyParams<T>, vocabulary: Vocabulary) -> Result<Self> {
        let lib = FingerprintLibrary {
            classes,
            params,
            dimension: vocabulary.len(),
            feature_space: FeatureSpace::Token,
            ranking: RankingMode::Signed,
            vocabulary: Some(vocabulary),
        };
        lib.validate()?;
        Ok(lib)
    }

    fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(FfpError::Build("a library needs at least one class".into()));
        }
        if self.params.k() > self.dimension {
            return Err(FfpError::Parameter(format!(
                "fingerprint size {} exceeds dimension {}",
                self.params.k(),
                self.dimension
            )));
        }
        for (label, fp) in &self.classes {
            if fp.feature_space() != self.feature_space {
                return Err(FfpError::Domain { expected: self.feature_space, found: fp.feature_space() });
            }
            if fp.k() != self.params.k() || !fp.is_complete() {
                return Err(FfpError::Build(format!(
                    "class `{label}` holds {} of k={} entries (library k={})",
                    fp.len(),
                    fp.k(),
                    self.params.k()
                )));
            }
            if let Some(e) = fp.elements().find(|e| e.index() >= self.dimension) {
                return Err(FfpError::Dimension(format!(
                    "class `{label}` references element {e}, dimension is {}",
                    self.dimension
                )));
            }
        }
        Ok(())
    }

    pub fn classes(&self) -> &BTreeMap<String, Fingerprint<T>> {
        &self.classes
    }

    pub fn get(&self, label: &str) -> Option<&Fingerprint<T>> {
        self.classes.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn params(&self) -> &FuzzifyParams<T> {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn feature_space(&self) -> FeatureSpace {
        self.feature_space
    }

    pub fn ranking(&self) -> RankingMode {
        self.ranking
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        self.vocabulary.as_ref()
    }

    /// Human-readable name of an element: the token for token libraries,
    /// the index otherwise.
    pub fn element_name(&self, id: ElementId) -> String {
        match self.vocabulary.as_ref().and_then(|v| v.token(id)) {
            Some(t) => t.to_string(),
            None => id.to_string(),
        }
    }

    /// Fingerprints an activation vector with this library's parameters.
    pub fn fingerprint_vector(&self, vector: &[T]) -> Result<Fingerprint<T>> {
        if self.feature_space != FeatureSpace::Activation {
            return Err(FfpError::Domain { expected: self.feature_space, found: FeatureSpace::Activation });
        }
        if vector.len() != self.dimension {
            return Err(FfpError::Dimension(format!(
                "instance has {} values, library dimension is {}",
                vector.len(),
                self.dimension
            )));
        }
        let ranked = rank(vector, self.ranking)?;
        fuzzify(&ranked, &self.params, FeatureSpace::Activation)
    }

    /// Fingerprints a token multiset. Tokens outside the vocabulary get
    /// fresh ids past its end so they occupy ranks but never match.
    pub fn fingerprint_tokens(&self, tokens: &[String]) -> Result<Fingerprint<T>> {
        let vocab = match (&self.vocabulary, self.feature_space) {
            (Some(v), FeatureSpace::Token) => v,
            _ => return Err(FfpError::Domain { expected: self.feature_space, found: FeatureSpace::Token }),
        };
        let ranked = rank_tokens(tokens);
        if ranked.is_empty() {
            return Err(FfpError::Dimension("instance has no tokens".into()));
        }
        let mut next_unknown = vocab.len() as u32;
        let ids: Vec<ElementId> = ranked
            .iter()
            .take(self.params.k())
            .map(|(t, _)| {
                vocab.id(t).unwrap_or_else(|| {
                    let id = ElementId(next_unknown);
                    next_unknown += 1;
                    id
                })
            })
            .collect();
        fuzzify_partial(&ids, &self.params, FeatureSpace::Token)
    }
}
