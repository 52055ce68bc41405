//! Dataset ingestion and library persistence.
//!
//! Datasets travel as line-delimited JSON so producers can append records
//! one at a time. Libraries are a single versioned JSON document.

pub mod corpus;
pub mod dailydialog;
pub mod embeddings;
pub mod library_file;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::dataset::Split;
use crate::error::{FfpError, Result};

pub use corpus::{load_corpus, write_corpus, CorpusRecord};
pub use dailydialog::{load_dailydialog, DailyDialog, Dialogue, Utterance};
pub use embeddings::{load_embeddings, load_embeddings_with, write_embeddings, EmbeddingRecord, EmbeddingSet, LoadOptions};
pub use library_file::{library_from_json, library_to_json, load_library, save_library, LIBRARY_FORMAT_VERSION};

/// Datasets keyed by split.
#[derive(Debug, Clone, PartialEq)]
pub struct Splits<D> {
    pub splits: BTreeMap<Split, D>,
}

impl<D> Splits<D> {
    pub fn get(&self, split: Split) -> Option<&D> {
        self.splits.get(&split)
    }

    pub fn take(&mut self, split: Split) -> Option<D> {
        self.splits.remove(&split)
    }

    pub fn available(&self) -> Vec<Split> {
        self.splits.keys().copied().collect()
    }
}

/// Calls `f(line_number, line)` for every non-blank line, 1-based.
pub(crate) fn for_each_line(path: &Path, mut f: impl FnMut(usize, &str) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| FfpError::io(path, e))?;
    let reader = BufReader::new(file);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FfpError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        f(i + 1, &line)?;
    }
    Ok(())
}

pub(crate) fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> FfpError {
    FfpError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

pub(crate) fn write_json_line<W: std::io::Write, S: serde::Serialize>(w: &mut W, value: &S) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}
