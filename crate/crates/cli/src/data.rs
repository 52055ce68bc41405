//! Dataset files as the commands see them: one file may hold several splits,
//! and the command picks the one matching its role.

use std::path::Path;

use clap::ValueEnum;
use serde::Deserialize;

use ffp::io::{load_corpus, load_embeddings, Splits};
use ffp::{ActivationDataset, Dataset, FeatureSpace, FfpError, Fingerprint, FingerprintLibrary, Split, TokenDataset};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Encoder activation vectors.
    Activation,
    /// Tokenized utterance text.
    Token,
}

impl Mode {
    pub fn of(lib: &FingerprintLibrary) -> Mode {
        match lib.feature_space() {
            FeatureSpace::Activation => Mode::Activation,
            FeatureSpace::Token => Mode::Token,
        }
    }
}

fn load_splits(path: &Path, mode: Mode) -> CliResult<Splits<Dataset>> {
    let splits = match mode {
        Mode::Activation => {
            let set = load_embeddings::<f64>(path)?;
            set.data.splits.into_iter().map(|(s, d)| (s, Dataset::from(d))).collect()
        }
        Mode::Token => load_corpus(path)?.splits.into_iter().map(|(s, d)| (s, Dataset::from(d))).collect(),
    };
    Ok(Splits { splits })
}

fn split_names(splits: &Splits<Dataset>) -> String {
    splits.available().iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
}

/// The split for `role`: the explicit `split` if given, the only split if the
/// file holds one, otherwise the split named after the role.
pub fn load_role(path: &Path, mode: Mode, role: Split, split: Option<Split>) -> CliResult<Dataset> {
    let mut splits = load_splits(path, mode)?;
    let names = split_names(&splits);
    let wanted = match split {
        Some(s) => s,
        None if splits.splits.len() == 1 => *splits.splits.keys().next().expect("one split"),
        None => role,
    };
    splits
        .take(wanted)
        .ok_or_else(|| CliError::Usage(format!("{} has no `{wanted}` split (found: {names}); pass --split", path.display())))
}

/// Every record of the file, split by split, or just `split` when given.
pub fn load_all(path: &Path, mode: Mode, split: Option<Split>) -> CliResult<Dataset> {
    if split.is_some() {
        return load_role(path, mode, Split::Test, split);
    }
    let splits = load_splits(path, mode)?;
    let mut parts = splits.splits.into_values();
    let first = parts.next().ok_or_else(|| FfpError::EmptyDataset(path.display().to_string()))?;
    let merged = match first {
        Dataset::Activation(d) => {
            let dim = d.dimension();
            let mut records = d.records().to_vec();
            for part in parts {
                if let Dataset::Activation(p) = part {
                    records.extend_from_slice(p.records());
                }
            }
            Dataset::Activation(ActivationDataset::new(dim, records)?)
        }
        Dataset::Token(d) => {
            let mut records = d.records().to_vec();
            for part in parts {
                if let Dataset::Token(p) = part {
                    records.extend_from_slice(p.records());
                }
            }
            Dataset::Token(TokenDataset::new(records)?)
        }
    };
    Ok(merged)
}

/// `(id, gold label, fingerprint)` for every record, failing on the first
/// record that cannot be fingerprinted.
pub fn fingerprints<'a>(lib: &FingerprintLibrary, data: &'a Dataset) -> CliResult<Vec<(&'a str, &'a str, Fingerprint)>> {
    let wrap = |id: &str, e| FfpError::Instance { id: id.to_string(), source: Box::new(e) };
    let out = match data {
        Dataset::Activation(d) => d
            .records()
            .iter()
            .map(|r| Ok((r.id.as_str(), r.label.as_str(), lib.fingerprint_vector(&r.vector).map_err(|e| wrap(&r.id, e))?)))
            .collect::<Result<Vec<_>, FfpError>>()?,
        Dataset::Token(d) => d
            .records()
            .iter()
            .map(|r| Ok((r.id.as_str(), r.label.as_str(), lib.fingerprint_tokens(&r.tokens).map_err(|e| wrap(&r.id, e))?)))
            .collect::<Result<Vec<_>, FfpError>>()?,
    };
    Ok(out)
}
