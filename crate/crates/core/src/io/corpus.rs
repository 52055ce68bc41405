//! Token corpus files: the embedding file shape with a `text` field in place
//! of `vector`. Dialogue position fields are optional.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{for_each_line, parse_error, write_json_line, Splits};
use crate::dataset::{LabeledTokenBag, Split, TokenDataset};
use crate::error::{FfpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub split: Split,
    pub label: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dialogue_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turn_index: Option<usize>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    split: String,
    label: String,
    text: String,
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Splits<TokenDataset>> {
    let path = path.as_ref();
    let mut groups: BTreeMap<Split, Vec<LabeledTokenBag>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for_each_line(path, |n, line| {
        let r: RawRecord = serde_json::from_str(line).map_err(|e| parse_error(path, n, e.to_string()))?;
        let split = Split::parse(&r.split).ok_or_else(|| parse_error(path, n, format!("unknown split `{}`", r.split)))?;
        if !seen.insert(r.id.clone()) {
            return Err(parse_error(path, n, format!("duplicate record id `{}`", r.id)));
        }
        let bag = LabeledTokenBag::from_text(r.id, r.label, &r.text).map_err(|e| parse_error(path, n, e.to_string()))?;
        groups.entry(split).or_default().push(bag);
        Ok(())
    })?;
    if groups.is_empty() {
        return Err(FfpError::EmptyDataset(format!("{} holds no corpus records", path.display())));
    }
    let splits = groups.into_iter().map(|(s, recs)| Ok((s, TokenDataset::new(recs)?))).collect::<Result<_>>()?;
    Ok(Splits { splits })
}

pub fn write_corpus<'a>(path: impl AsRef<Path>, records: impl IntoIterator<Item = &'a CorpusRecord>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| FfpError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        write_json_line(&mut w, r).map_err(|e| FfpError::io(path, e))?;
    }
    w.flush().map_err(|e| FfpError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_tokenize() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let recs = vec![
            CorpusRecord { id: "1".into(), split: Split::Train, label: "A".into(), text: "Hello, World!".into(), dialogue_id: Some("d".into()), turn_index: Some(0) },
            CorpusRecord { id: "2".into(), split: Split::Test, label: "B".into(), text: "bye".into(), dialogue_id: None, turn_index: None },
        ];
        write_corpus(&path, &recs).unwrap();
        let splits = load_corpus(&path).unwrap();
        assert_eq!(splits.get(Split::Train).unwrap().records()[0].tokens, ["hello", "world"]);
        assert_eq!(splits.get(Split::Test).unwrap().len(), 1);
    }

    #[test]
    fn errors_carry_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(&path, "{\"id\":\"1\",\"split\":\"train\",\"label\":\"A\",\"text\":\"ok\"}\n{\"id\":\"2\",\"split\":\"train\",\"label\":\"A\",\"text\":\"!!\"}\n").unwrap();
        assert!(matches!(load_corpus(&path), Err(FfpError::Parse { line: 2, .. })));
        std::fs::write(&path, "").unwrap();
        assert!(matches!(load_corpus(&path), Err(FfpError::EmptyDataset(_))));
    }
}
