//! Reader for the raw DailyDialog release.
//!
//! Each split has a text file with one dialogue per line, utterances
//! terminated by `__eou__`, and a parallel emotion file holding one integer
//! label per utterance. Both layouts of the public release are accepted:
//! `<dir>/<split>/dialogues_<split>.txt` and `<dir>/dialogues_<split>.txt`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::corpus::CorpusRecord;
use crate::dataset::Split;
use crate::error::{FfpError, Result};

pub const END_OF_UTTERANCE: &str = "__eou__";

/// Emotion names indexed by the integer label of the release.
pub const EMOTION_LABELS: [&str; 7] = ["neutral", "anger", "disgust", "fear", "happiness", "sadness", "surprise"];

pub fn emotion_label(code: u8) -> Option<&'static str> {
    EMOTION_LABELS.get(code as usize).copied()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub text: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DailyDialog {
    pub splits: BTreeMap<Split, Vec<Dialogue>>,
}

impl DailyDialog {
    pub fn dialogue_count(&self) -> usize {
        self.splits.values().map(Vec::len).sum()
    }

    pub fn utterance_count(&self) -> usize {
        self.utterances().count()
    }

    pub fn utterances(&self) -> impl Iterator<Item = &Utterance> {
        self.splits.values().flatten().flat_map(|d| d.utterances.iter())
    }

    /// Flattens to corpus records, ordered by split then dialogue then turn.
    pub fn to_corpus(&self) -> Vec<CorpusRecord> {
        self.splits
            .iter()
            .flat_map(|(&split, dialogues)| {
                dialogues.iter().flat_map(move |d| {
                    d.utterances.iter().map(move |u| CorpusRecord {
                        id: format!("{}-{}", u.dialogue_id, u.turn_index),
                        split,
                        label: u.label.clone(),
                        text: u.text.clone(),
                        dialogue_id: Some(u.dialogue_id.clone()),
                        turn_index: Some(u.turn_index),
                    })
                })
            })
            .collect()
    }
}

fn split_files(dir: &Path, split: Split) -> Option<(PathBuf, PathBuf)> {
    let name = split.as_str();
    [dir.join(name), dir.to_path_buf()].into_iter().find_map(|base| {
        let text = base.join(format!("dialogues_{name}.txt"));
        let labels = base.join(format!("dialogues_emotion_{name}.txt"));
        (text.is_file() && labels.is_file()).then_some((text, labels))
    })
}

/// Loads every split present under `dir`.
pub fn load_dailydialog(dir: impl AsRef<Path>) -> Result<DailyDialog> {
    let dir = dir.as_ref();
    let mut out = DailyDialog::default();
    for split in Split::ALL {
        if let Some((text, labels)) = split_files(dir, split) {
            out.splits.insert(split, load_split(split, &text, &labels)?);
        }
    }
    if out.splits.is_empty() {
        return Err(FfpError::Ingestion(format!("no DailyDialog split files under {}", dir.display())));
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| FfpError::io(path, e))
}

pub fn load_split(split: Split, text_path: &Path, label_path: &Path) -> Result<Vec<Dialogue>> {
    let text = read(text_path)?;
    let labels = read(label_path)?;
    let text_lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let label_lines: Vec<&str> = labels.lines().filter(|l| !l.trim().is_empty()).collect();
    if text_lines.len() != label_lines.len() {
        return Err(FfpError::Ingestion(format!(
            "{} has {} dialogues but {} has {}",
            text_path.display(),
            text_lines.len(),
            label_path.display(),
            label_lines.len()
        )));
    }
    text_lines
        .iter()
        .zip(&label_lines)
        .enumerate()
        .map(|(i, (t, l))| parse_dialogue(split, i, t, l, label_path))
        .collect()
}

fn parse_dialogue(split: Split, index: usize, text: &str, labels: &str, label_path: &Path) -> Result<Dialogue> {
    let line = index + 1;
    let utterances: Vec<&str> = text.split(END_OF_UTTERANCE).map(str::trim).collect();
    // The separator terminates every utterance, so the final piece is empty.
    let utterances = match utterances.split_last() {
        Some((&"", rest)) => rest,
        _ => &utterances[..],
    };
    let codes = labels
        .split_whitespace()
        .map(|c| {
            c.parse::<u8>()
                .ok()
                .and_then(emotion_label)
                .ok_or_else(|| FfpError::Ingestion(format!("{}: line {line}: unknown label `{c}`", label_path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    if codes.len() != utterances.len() {
        return Err(FfpError::Ingestion(format!(
            "{} split, line {line}: {} utterances but {} labels",
            split,
            utterances.len(),
            codes.len()
        )));
    }
    let id = format!("{split}-{index}");
    let utterances = utterances
        .iter()
        .zip(codes)
        .enumerate()
        .map(|(turn, (text, label))| Utterance { dialogue_id: id.clone(), turn_index: turn, text: text.to_string(), label: label.to_string() })
        .collect();
    Ok(Dialogue { id, utterances })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(dir: &Path) {
        let train = dir.join("train");
        fs::create_dir_all(&train).unwrap();
        fs::write(
            train.join("dialogues_train.txt"),
            "Say , Jim , how about going for a few beers after dinner ? __eou__ You know that is tempting but is really not good for our fitness . __eou__\nCan you do push-ups ? __eou__ Of course I can . __eou__ Really ? __eou__\n",
        )
        .unwrap();
        fs::write(train.join("dialogues_emotion_train.txt"), "0 0 \n0 4 6\n").unwrap();
    }

    #[test]
    fn parses_two_dialogue_fixture() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        let dd = load_dailydialog(dir.path()).unwrap();
        assert_eq!(dd.dialogue_count(), 2);
        assert_eq!(dd.utterance_count(), 5);
        let d = &dd.splits[&Split::Train][1];
        assert_eq!(d.id, "train-1");
        let got: Vec<(&str, &str)> = d.utterances.iter().map(|u| (u.text.as_str(), u.label.as_str())).collect();
        assert_eq!(got, [("Can you do push-ups ?", "neutral"), ("Of course I can .", "happiness"), ("Really ?", "surprise")]);
        let corpus = dd.to_corpus();
        assert_eq!(corpus[4].id, "train-1-2");
    }

    #[test]
    fn flat_layout_accepted() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("dialogues_test.txt"), "Hi . __eou__\n").unwrap();
        fs::write(dir.path().join("dialogues_emotion_test.txt"), "1\n").unwrap();
        let dd = load_dailydialog(dir.path()).unwrap();
        assert_eq!(dd.splits[&Split::Test][0].utterances[0].label, "anger");
    }

    #[test]
    fn count_mismatch_names_line() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("dialogues_test.txt"), "Hi . __eou__\nA . __eou__ B . __eou__\n").unwrap();
        fs::write(dir.path().join("dialogues_emotion_test.txt"), "1\n0\n").unwrap();
        let err = load_dailydialog(dir.path()).unwrap_err();
        assert!(matches!(err, FfpError::Ingestion(ref m) if m.contains("line 2")), "{err}");
    }

    #[test]
    fn unknown_label_rejected() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("dialogues_test.txt"), "Hi . __eou__\n").unwrap();
        fs::write(dir.path().join("dialogues_emotion_test.txt"), "7\n").unwrap();
        assert!(matches!(load_dailydialog(dir.path()), Err(FfpError::Ingestion(_))));
    }

    #[test]
    fn missing_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dailydialog(dir.path()), Err(FfpError::Ingestion(_))));
    }
}
