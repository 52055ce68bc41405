//! End-to-end checks over synthetic activations, token corpora and a small
//! DailyDialog-shaped directory.

use std::fs;

use ffp::io::{load_corpus, load_dailydialog, write_corpus};
use ffp::synth::{generate_set, SynthConfig};
use ffp::{
    build_library, evaluate, predict, sweep_k, ActivationDataset, Dataset, FfpError, FuzzifyParams, SimilarityParams, Split,
    TokenDataset,
};

fn small_config(seed: u64) -> SynthConfig {
    SynthConfig { dimension: 300, train_per_class: 30, validation_per_class: 10, test_per_class: 10, seed, ..SynthConfig::default() }
}

fn splits(seed: u64) -> (ActivationDataset, ActivationDataset, ActivationDataset) {
    let set = generate_set::<f64>(&small_config(seed)).unwrap();
    (
        set.split(Split::Train).unwrap().clone(),
        set.split(Split::Validation).unwrap().clone(),
        set.split(Split::Test).unwrap().clone(),
    )
}

#[test]
fn sweep_matches_rebuilding_per_k() {
    let (train, valid, _) = splits(3);
    let (train, valid) = (Dataset::from(train), Dataset::from(valid));
    let grid = [1, 2, 5, 10, 25, 50, 100, 150, 200, 300];
    let n = SimilarityParams::default();
    let sweep = sweep_k(&train, &valid, &grid, 0.8, &n).unwrap();
    assert_eq!(sweep.points.len(), grid.len());
    for point in &sweep.points {
        let lib = build_library(&train, &FuzzifyParams::new(point.k, 0.8).unwrap()).unwrap();
        let rebuilt = evaluate(&lib, &valid, &n).unwrap();
        assert_eq!(rebuilt.macro_f1.to_bits(), point.macro_f1.to_bits(), "K={}", point.k);
    }
}

#[test]
fn larger_k_separates_synthetic_classes() {
    let (train, valid, _) = splits(11);
    let sweep = sweep_k(&train.into(), &valid.into(), &[1, 50], 0.8, &SimilarityParams::default()).unwrap();
    let f1_1 = sweep.macro_f1_at(1).unwrap();
    let f1_50 = sweep.macro_f1_at(50).unwrap();
    assert!(f1_50 > f1_1, "{f1_1} -> {f1_50}");
    assert!(f1_50 > 0.9);
    assert_eq!(sweep.best_k, 50);
}

#[test]
fn sweep_rejects_k_beyond_dimension() {
    let (train, valid, _) = splits(1);
    let err = sweep_k(&train.into(), &valid.into(), &[10, 301], 0.8, &SimilarityParams::default()).unwrap_err();
    assert!(err.is_parameter_error(), "{err}");
}

#[test]
fn f32_and_f64_agree_on_predictions() {
    let cfg = small_config(5);
    let wide = generate_set::<f64>(&cfg).unwrap();
    let narrow = generate_set::<f32>(&cfg).unwrap();
    let lib64 = build_library(&wide.split(Split::Train).unwrap().clone().into(), &FuzzifyParams::new(50, 0.8).unwrap()).unwrap();
    let lib32 = build_library(
        &narrow.split(Split::Train).unwrap().clone().into(),
        &ffp::fingerprint::FuzzifyParams::<f32>::new(50, 0.8).unwrap(),
    )
    .unwrap();
    let p64 = predict(&lib64, &wide.split(Split::Test).unwrap().clone().into(), &SimilarityParams::default()).unwrap();
    let p32 = predict(
        &lib32,
        &narrow.split(Split::Test).unwrap().clone().into(),
        &ffp::fingerprint::SimilarityParams::<f32>::default(),
    )
    .unwrap();
    let agree = p64.iter().zip(&p32).filter(|(a, b)| a.predicted == b.predicted).count();
    assert!(agree as f64 >= 0.95 * p64.len() as f64);
}

#[test]
fn thread_count_does_not_change_results() {
    let (train, _, test) = splits(9);
    let (train, test) = (Dataset::from(train), Dataset::from(test));
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let lib = build_library(&train, &FuzzifyParams::new(40, 0.8).unwrap()).unwrap();
            evaluate(&lib, &test, &SimilarityParams::default()).unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}

fn token_bags(rows: &[(&str, &str, &str)]) -> Dataset {
    let bags = rows.iter().map(|(id, label, text)| ffp::LabeledTokenBag::from_text(*id, *label, text).unwrap()).collect();
    TokenDataset::new(bags).unwrap().into()
}

#[test]
fn token_pipeline_classifies_by_shared_words() {
    let train = token_bags(&[
        ("t1", "happiness", "great great wonderful day"),
        ("t2", "happiness", "wonderful great party"),
        ("t3", "sadness", "sorry sad loss"),
        ("t4", "sadness", "so sorry sad news"),
    ]);
    let test = token_bags(&[("e1", "happiness", "what a great party"), ("e2", "sadness", "i am sorry")]);
    let lib = build_library(&train, &FuzzifyParams::new(3, 0.8).unwrap()).unwrap();
    let report = evaluate(&lib, &test, &SimilarityParams::default()).unwrap();
    assert_eq!(report.macro_f1, 1.0);
}

#[test]
fn activation_library_rejects_token_data() {
    let (train, _, _) = splits(2);
    let lib = build_library(&train.into(), &FuzzifyParams::new(10, 0.8).unwrap()).unwrap();
    let err = predict(&lib, &token_bags(&[("x", "sadness", "sorry")]), &SimilarityParams::default()).unwrap_err();
    assert!(matches!(err, FfpError::Domain { .. }));
}

#[test]
fn dailydialog_directory_round_trips_through_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for split in ["train", "validation", "test"] {
        let sub = dir.path().join(split);
        fs::create_dir(&sub).unwrap();
        fs::write(
            sub.join(format!("dialogues_{split}.txt")),
            "Hello there . __eou__ Sorry , sir . __eou__\nI lost the files ! __eou__ That is awful . __eou__ Yes . __eou__\n",
        )
        .unwrap();
        fs::write(sub.join(format!("dialogues_emotion_{split}.txt")), "0 5\n1 2 0\n").unwrap();
    }
    let dd = load_dailydialog(dir.path()).unwrap();
    assert_eq!(dd.dialogue_count(), 6);
    assert_eq!(dd.utterance_count(), 15);
    let labels: Vec<&str> = dd.splits[&Split::Train].iter().flat_map(|d| d.utterances.iter().map(|u| u.label.as_str())).collect();
    assert_eq!(labels, ["neutral", "sadness", "anger", "disgust", "neutral"]);

    let records = dd.to_corpus();
    let path = dir.path().join("corpus.jsonl");
    write_corpus(&path, &records).unwrap();
    let corpus = load_corpus(&path).unwrap();
    let train = corpus.get(Split::Train).unwrap();
    assert_eq!(train.len(), 5);
    assert_eq!(train.records()[1].tokens, ["sorry", "sir"]);
}

#[test]
fn dailydialog_count_mismatch_names_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("dialogues_train.txt"), "A . __eou__ B . __eou__\n").unwrap();
    fs::write(dir.path().join("dialogues_emotion_train.txt"), "0\n").unwrap();
    let err = load_dailydialog(dir.path()).unwrap_err().to_string();
    assert!(err.contains("line 1"), "{err}");
}
