//! Versioned JSON persistence for fingerprint libraries.
//!
//! ```text
//! {
//!   "format": "ffp-library",
//!   "format_version": 1,
//!   "feature_space": "activation",
//!   "dimension": 768,
//!   "k": 10,
//!   "a": 1.0,
//!   "ranking": "signed",
//!   "classes": [
//!     {"label": "anger", "elements": [8, 679, ...], "memberships": [1.0, 0.9, ...]}
//!   ]
//! }
//! ```
//!
//! Token libraries add a `"vocabulary"` array that element ids index into.
//! Classes are written in label order, so identical libraries serialize to
//! identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FfpError, Result};
use crate::fingerprint::{ElementId, FeatureSpace, Fingerprint, FuzzifyParams, RankingMode};
use crate::library::{FingerprintLibrary, Vocabulary};
use crate::scalar::Scalar;

pub const LIBRARY_FORMAT_VERSION: u32 = 1;
const FORMAT_TAG: &str = "ffp-library";

#[derive(Debug, Serialize, Deserialize)]
struct LibraryFile {
    format: String,
    format_version: u32,
    feature_space: FeatureSpace,
    dimension: usize,
    k: usize,
    a: f64,
    #[serde(default)]
    ranking: RankingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocabulary: Option<Vec<String>>,
    classes: Vec<ClassEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassEntry {
    label: String,
    elements: Vec<u32>,
    memberships: Vec<f64>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

pub fn library_to_json<T: Scalar>(lib: &FingerprintLibrary<T>) -> String {
    let file = LibraryFile {
        format: FORMAT_TAG.to_string(),
        format_version: LIBRARY_FORMAT_VERSION,
        feature_space: lib.feature_space(),
        dimension: lib.dimension(),
        k: lib.params().k(),
        a: lib.params().a().to_f64_value(),
        ranking: lib.ranking(),
        vocabulary: lib.vocabulary().map(|v| v.tokens().to_vec()),
        classes: lib
            .classes()
            .iter()
            .map(|(label, fp)| ClassEntry {
                label: label.clone(),
                elements: fp.elements().map(|e| e.0).collect(),
                memberships: fp.entries().iter().map(|e| e.mu.value().to_f64_value()).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("library serializes");
    s.push('\n');
    s
}

fn parse_err(e: serde_json::Error) -> FfpError {
    FfpError::Parse { path: "<library>".into(), line: e.line(), message: e.to_string() }
}

pub fn library_from_json<T: Scalar>(text: &str) -> Result<FingerprintLibrary<T>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    let probe: VersionProbe = serde_json::from_value(value.clone()).map_err(parse_err)?;
    if probe.format_version != LIBRARY_FORMAT_VERSION {
        return Err(FfpError::UnsupportedVersion { found: probe.format_version, supported: LIBRARY_FORMAT_VERSION });
    }
    let file: LibraryFile = serde_json::from_value(value).map_err(parse_err)?;
    if file.format != FORMAT_TAG {
        return Err(FfpError::Ingestion(format!("not a fingerprint library (format `{}`)", file.format)));
    }
    let scalar = |v: f64, what: &str| {
        T::from_f64_value(v).ok_or_else(|| FfpError::Ingestion(format!("{what} {v} is not representable")))
    };
    let params = FuzzifyParams::new(file.k, scalar(file.a, "slope")?)?;
    let mut classes = std::collections::BTreeMap::new();
    for c in file.classes {
        if c.elements.len() != c.memberships.len() {
            return Err(FfpError::Ingestion(format!(
                "class `{}` lists {} elements but {} memberships",
                c.label,
                c.elements.len(),
                c.memberships.len()
            )));
        }
        let pairs = c
            .elements
            .iter()
            .zip(&c.memberships)
            .map(|(&e, &m)| Ok((ElementId(e), scalar(m, "membership")?)))
            .collect::<Result<Vec<_>>>()?;
        let fp = Fingerprint::from_entries(pairs, file.k, file.feature_space)?;
        if classes.insert(c.label.clone(), fp).is_some() {
            return Err(FfpError::Ingestion(format!("duplicate class `{}`", c.label)));
        }
    }
    match (file.feature_space, file.vocabulary) {
        (FeatureSpace::Activation, None) => FingerprintLibrary::activation(classes, params, file.dimension, file.ranking),
        (FeatureSpace::Token, Some(tokens)) => {
            let vocab = Vocabulary::new(tokens.iter().cloned());
            if vocab.tokens() != tokens.as_slice() || vocab.len() != file.dimension {
                return Err(FfpError::Ingestion("vocabulary must be sorted, distinct, and match the dimension".into()));
            }
            FingerprintLibrary::token(classes, params, vocab)
        }
        (FeatureSpace::Activation, Some(_)) => Err(FfpError::Ingestion("activation library carries a vocabulary".into())),
        (FeatureSpace::Token, None) => Err(FfpError::Ingestion("token library is missing its vocabulary".into())),
    }
}

pub fn save_library<T: Scalar>(lib: &FingerprintLibrary<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, library_to_json(lib)).map_err(|e| FfpError::io(path, e))
}

pub fn load_library<T: Scalar>(path: impl AsRef<Path>) -> Result<FingerprintLibrary<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| FfpError::io(path, e))?;
    library_from_json(&text).map_err(|e| match e {
        FfpError::Parse { line, message, .. } => FfpError::Parse { path: path.to_path_buf(), line, message },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::build_library;
    use crate::dataset::{Dataset, LabeledTokenBag, TokenDataset};

    fn token_lib() -> FingerprintLibrary<f64> {
        let recs = vec![
            LabeledTokenBag::from_text("1", "A", "red red green blue").unwrap(),
            LabeledTokenBag::from_text("2", "B", "cat dog dog bird").unwrap(),
        ];
        let data: Dataset<f64> = TokenDataset::new(recs).unwrap().into();
        build_library(&data, &FuzzifyParams::new(3, 0.8).unwrap()).unwrap()
    }

    #[test]
    fn token_round_trip() {
        let lib = token_lib();
        let text = library_to_json(&lib);
        let back: FingerprintLibrary<f64> = library_from_json(&text).unwrap();
        assert_eq!(back, lib);
        assert_eq!(library_to_json(&back), text);
    }

    #[test]
    fn version_mismatch() {
        let text = library_to_json(&token_lib()).replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(library_from_json::<f64>(&text), Err(FfpError::UnsupportedVersion { found: 2, .. })));
    }

    #[test]
    fn truncated_is_parse_error() {
        let text = library_to_json(&token_lib());
        let cut = &text[..text.len() / 2];
        assert!(matches!(library_from_json::<f64>(cut), Err(FfpError::Parse { .. })));
    }

    #[test]
    fn rejects_inconsistent_content() {
        let text = library_to_json(&token_lib());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();

        let mut bad = v.clone();
        bad["vocabulary"] = serde_json::Value::Null;
        assert!(library_from_json::<f64>(&bad.to_string()).is_err());

        let mut bad = v.clone();
        bad["classes"][0]["memberships"][1] = serde_json::json!(1.0);
        bad["classes"][0]["memberships"][0] = serde_json::json!(0.5);
        assert!(library_from_json::<f64>(&bad.to_string()).is_err());

        let mut bad = v.clone();
        bad["format"] = serde_json::json!("other");
        assert!(library_from_json::<f64>(&bad.to_string()).is_err());
    }
}
