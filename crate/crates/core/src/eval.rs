//! Confusion matrices, per-class and macro F1, fingerprint-size sweeps.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::build::ClassRankings;
use crate::classify::{classify, ClassificationResult};
use crate::dataset::Dataset;
use crate::error::{FfpError, Result};
use crate::fingerprint::{fuzzify, rank, ElementId, FeatureSpace, Fingerprint, FuzzifyParams, RankingMode, SimilarityParams};
use crate::library::FingerprintLibrary;
use crate::scalar::Scalar;
use crate::token::rank_tokens;

/// Emotion labels in the column order used for per-class reporting, with
/// their short column headers.
pub const EMOTION_COLUMNS: [(&str, &str); 7] = [
    ("anger", "Ang"),
    ("disgust", "Disg"),
    ("fear", "Fear"),
    ("happiness", "Hap"),
    ("sadness", "Sad"),
    ("surprise", "Sur"),
    ("neutral", "Neu"),
];

/// Report order for a label set: the emotion column order when every label
/// is an emotion name, lexicographic otherwise.
pub fn report_order<'a>(labels: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut labels: Vec<String> = labels.into_iter().map(str::to_string).collect();
    labels.sort();
    labels.dedup();
    let pos = |l: &str| EMOTION_COLUMNS.iter().position(|(name, _)| *name == l);
    if labels.iter().all(|l| pos(l).is_some()) {
        labels.sort_by_key(|l| pos(l));
    }
    labels
}

fn column_header(label: &str) -> &str {
    EMOTION_COLUMNS.iter().find(|(name, _)| *name == label).map_or(label, |(_, short)| short)
}

/// Rows are gold labels, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix { labels, counts: vec![vec![0; n]; n] }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn true_positives(&self, i: usize) -> u64 {
        self.counts[i][i]
    }

    /// Instances whose gold label is `i`.
    pub fn support(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    /// Instances predicted as `i`.
    pub fn predicted(&self, i: usize) -> u64 {
        self.counts.iter().map(|row| row[i]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassScore>,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
}

impl EvalReport {
    pub fn f1(&self, label: &str) -> Option<f64> {
        self.per_class.iter().find(|c| c.label == label).map(|c| c.f1)
    }

    /// Per-class F1 and macro-F1 as percentages, one column per label.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        if let Some(k) = self.k {
            let _ = write!(out, "K={k}");
            if let Some(a) = self.a {
                let _ = write!(out, " a={a}");
            }
            if let Some(n) = self.n {
                let _ = write!(out, " N={n}");
            }
            out.push('\n');
        }
        for c in &self.per_class {
            let _ = write!(out, "{:>8}", column_header(&c.label));
        }
        let _ = writeln!(out, "{:>10}", "macro-F1");
        for c in &self.per_class {
            let _ = write!(out, "{:>8.2}", 100.0 * c.f1);
        }
        let _ = writeln!(out, "{:>10.2}", 100.0 * self.macro_f1);
        out
    }

    fn with_params<T: Scalar>(mut self, k: usize, a: T, n: T) -> Self {
        self.k = Some(k);
        self.a = Some(a.to_f64_value());
        self.n = Some(n.to_f64_value());
        self
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision/recall/F1 and their unweighted mean over `label_set`.
/// A class with no gold and no predicted instances scores F1 = 0.
pub fn macro_f1<G: AsRef<str>, P: AsRef<str>, L: AsRef<str>>(gold: &[G], predicted: &[P], label_set: &[L]) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(FfpError::Evaluation(format!("{} gold labels but {} predictions", gold.len(), predicted.len())));
    }
    if label_set.is_empty() {
        return Err(FfpError::Evaluation("empty label set".into()));
    }
    let labels: Vec<String> = label_set.iter().map(|l| l.as_ref().to_string()).collect();
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    if index.len() != labels.len() {
        return Err(FfpError::Evaluation("duplicate label in label set".into()));
    }
    let lookup = |l: &str, what: &str| {
        index.get(l).copied().ok_or_else(|| FfpError::Evaluation(format!("{what} label `{l}` is not in the label set")))
    };
    let mut confusion = ConfusionMatrix::new(labels.clone());
    for (g, p) in gold.iter().zip(predicted) {
        let gi = lookup(g.as_ref(), "gold")?;
        let pi = lookup(p.as_ref(), "predicted")?;
        confusion.counts[gi][pi] += 1;
    }
    let per_class: Vec<ClassScore> = labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let tp = confusion.true_positives(i);
            let precision = ratio(tp, confusion.predicted(i));
            let recall = ratio(tp, confusion.support(i));
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassScore { label: label.clone(), precision, recall, f1, support: confusion.support(i) }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / per_class.len() as f64;
    Ok(EvalReport { per_class, macro_f1, confusion, k: None, a: None, n: None })
}

fn wrap_instance(id: &str, e: FfpError) -> FfpError {
    FfpError::Instance { id: id.to_string(), source: Box::new(e) }
}

/// Fingerprints and classifies every instance of `data` against `library`.
pub fn predict<T: Scalar>(
    library: &FingerprintLibrary<T>,
    data: &Dataset<T>,
    params: &SimilarityParams<T>,
) -> Result<Vec<ClassificationResult<T>>> {
    if data.feature_space() != library.feature_space() {
        return Err(FfpError::Domain { expected: library.feature_space(), found: data.feature_space() });
    }
    match data {
        Dataset::Activation(d) => d
            .records()
            .par_iter()
            .map(|r| {
                library
                    .fingerprint_vector(&r.vector)
                    .and_then(|fp| classify(&fp, library, params))
                    .map_err(|e| wrap_instance(&r.id, e))
            })
            .collect(),
        Dataset::Token(d) => d
            .records()
            .par_iter()
            .map(|r| {
                library
                    .fingerprint_tokens(&r.tokens)
                    .and_then(|fp| classify(&fp, library, params))
                    .map_err(|e| wrap_instance(&r.id, e))
            })
            .collect(),
    }
}

/// Classifies `test` and scores it over the library's label set.
pub fn evaluate<T: Scalar>(library: &FingerprintLibrary<T>, test: &Dataset<T>, params: &SimilarityParams<T>) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(FfpError::Evaluation("empty test set".into()));
    }
    let results = predict(library, test, params)?;
    let predicted: Vec<&str> = results.iter().map(|r| r.predicted.as_str()).collect();
    let labels = report_order(library.labels());
    let report = macro_f1(&test.gold_labels(), &predicted, &labels)?;
    Ok(report.with_params(library.params().k(), library.params().a(), params.n()))
}

/// Averages reports over several runs (e.g. embedding sets from different
/// seeds). Confusion counts are summed.
pub fn aggregate_reports(reports: &[EvalReport]) -> Result<EvalReport> {
    let first = reports.first().ok_or_else(|| FfpError::Evaluation("no reports to aggregate".into()))?;
    let labels: Vec<&str> = first.per_class.iter().map(|c| c.label.as_str()).collect();
    let runs = reports.len() as f64;
    let mut confusion = ConfusionMatrix::new(first.confusion.labels.clone());
    for r in reports {
        let these: Vec<&str> = r.per_class.iter().map(|c| c.label.as_str()).collect();
        if these != labels || r.confusion.labels != first.confusion.labels {
            return Err(FfpError::Evaluation("reports cover different label sets".into()));
        }
        for (row, other) in confusion.counts.iter_mut().zip(&r.confusion.counts) {
            for (c, o) in row.iter_mut().zip(other) {
                *c += o;
            }
        }
    }
    let mean = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / runs;
    let per_class = (0..labels.len())
        .map(|i| ClassScore {
            label: labels[i].to_string(),
            precision: mean(&|r| r.per_class[i].precision),
            recall: mean(&|r| r.per_class[i].recall),
            f1: mean(&|r| r.per_class[i].f1),
            support: first.per_class[i].support,
        })
        .collect::<Vec<_>>();
    let macro_f1 = per_class.iter().map(|c| c.f1).sum::<f64>() / per_class.len() as f64;
    let same = |f: &dyn Fn(&EvalReport) -> Option<f64>| {
        let v = f(first);
        reports.iter().all(|r| f(r) == v).then_some(v).flatten()
    };
    Ok(EvalReport {
        per_class,
        macro_f1,
        confusion,
        k: reports.iter().all(|r| r.k == first.k).then_some(first.k).flatten(),
        a: same(&|r| r.a),
        n: same(&|r| r.n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub k: usize,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepReport {
    /// Ascending by `k`.
    pub points: Vec<KPoint>,
    pub best_k: usize,
    pub a: f64,
    pub n: f64,
}

impl KSweepReport {
    pub fn new(mut points: Vec<KPoint>, a: f64, n: f64) -> Result<Self> {
        points.sort_by_key(|p| p.k);
        let best_k = best_point(&points)?.k;
        Ok(KSweepReport { points, best_k, a, n })
    }

    pub fn macro_f1_at(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|p| p.k == k).map(|p| p.macro_f1)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>6}  {:>8}", "K", "macro-F1");
        for p in &self.points {
            let mark = if p.k == self.best_k { " *" } else { "" };
            let _ = writeln!(out, "{:>6}  {:>8.2}{mark}", p.k, 100.0 * p.macro_f1);
        }
        out
    }
}

fn best_point(points: &[KPoint]) -> Result<KPoint> {
    let mut best: Option<KPoint> = None;
    for &p in points {
        best = match best {
            None => Some(p),
            Some(b) if p.macro_f1 > b.macro_f1 || (p.macro_f1 == b.macro_f1 && p.k < b.k) => Some(p),
            keep => keep,
        };
    }
    best.ok_or_else(|| FfpError::Evaluation("empty K sweep".into()))
}

/// Highest macro-F1 point; equal scores prefer the smaller K.
pub fn select_k(report: &KSweepReport) -> Result<usize> {
    Ok(best_point(&report.points)?.k)
}

/// Pre-ranked evaluation instances, so each K only truncates.
enum RankedInstances {
    Activation(Vec<Vec<ElementId>>),
    Token(Vec<Vec<String>>),
}

impl RankedInstances {
    fn new<T: Scalar>(data: &Dataset<T>, ranking: RankingMode) -> Result<Self> {
        Ok(match data {
            Dataset::Activation(d) => RankedInstances::Activation(
                d.records().par_iter().map(|r| rank(&r.vector, ranking).map_err(|e| wrap_instance(&r.id, e))).collect::<Result<_>>()?,
            ),
            Dataset::Token(d) => RankedInstances::Token(
                d.records().iter().map(|r| rank_tokens(&r.tokens).into_iter().map(|(t, _)| t).collect()).collect(),
            ),
        })
    }

    fn fingerprints<T: Scalar>(&self, library: &FingerprintLibrary<T>) -> Result<Vec<Fingerprint<T>>> {
        match self {
            RankedInstances::Activation(all) => {
                all.par_iter().map(|ranked| fuzzify(ranked, library.params(), FeatureSpace::Activation)).collect()
            }
            RankedInstances::Token(all) => all.par_iter().map(|ranked| library.fingerprint_tokens(ranked)).collect(),
        }
    }
}

pub fn sweep_k<T: Scalar>(
    train: &Dataset<T>,
    eval_split: &Dataset<T>,
    k_values: &[usize],
    a: T,
    params: &SimilarityParams<T>,
) -> Result<KSweepReport> {
    sweep_k_with(train, eval_split, k_values, a, params, RankingMode::Signed)
}

/// Evaluates `eval_split` at every K in `k_values`. Each class and each
/// evaluation instance is ranked once; every K reuses those rankings.
pub fn sweep_k_with<T: Scalar>(
    train: &Dataset<T>,
    eval_split: &Dataset<T>,
    k_values: &[usize],
    a: T,
    params: &SimilarityParams<T>,
    ranking: RankingMode,
) -> Result<KSweepReport> {
    if k_values.is_empty() {
        return Err(FfpError::Parameter("empty K grid".into()));
    }
    if eval_split.is_empty() {
        return Err(FfpError::Evaluation("empty evaluation split".into()));
    }
    if train.feature_space() != eval_split.feature_space() {
        return Err(FfpError::Domain { expected: train.feature_space(), found: eval_split.feature_space() });
    }
    if let (Dataset::Activation(t), Dataset::Activation(e)) = (train, eval_split) {
        if t.dimension() != e.dimension() {
            return Err(FfpError::Dimension(format!(
                "training dimension {} differs from evaluation dimension {}",
                t.dimension(),
                e.dimension()
            )));
        }
    }
    let train_ids: HashSet<&str> = train.ids().into_iter().collect();
    if let Some(id) = eval_split.ids().into_iter().find(|id| train_ids.contains(id)) {
        return Err(FfpError::Evaluation(format!("instance `{id}` appears in both training and evaluation splits")));
    }
    let rankings = ClassRankings::from_dataset(train, ranking)?;
    let mut ks: Vec<usize> = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if let Some(&k) = ks.iter().find(|&&k| k > rankings.max_k()) {
        return Err(FfpError::Parameter(format!("K={k} exceeds the largest supported size {}", rankings.max_k())));
    }
    let instances = RankedInstances::new(eval_split, ranking)?;
    let gold = eval_split.gold_labels();
    let ids = eval_split.ids();
    let mut points = Vec::with_capacity(ks.len());
    for k in ks {
        let fparams = FuzzifyParams::new(k, a)?;
        let library = rankings.library(&fparams)?;
        let labels = report_order(library.labels());
        let fps = instances.fingerprints(&library)?;
        let predicted = fps
            .par_iter()
            .zip(ids.par_iter())
            .map(|(fp, id)| classify(fp, &library, params).map(|r| r.predicted).map_err(|e| wrap_instance(id, e)))
            .collect::<Result<Vec<_>>>()?;
        let report = macro_f1(&gold, &predicted, &labels)?;
        points.push(KPoint { k, macro_f1: report.macro_f1 });
    }
    KSweepReport::new(points, a.to_f64_value(), params.n().to_f64_value())
}

/// Label frequencies as fractions of the total.
pub fn label_proportions<'a>(labels: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
    for l in labels {
        *counts.entry(l.to_string()).or_default() += 1;
        total += 1;
    }
    counts.into_iter().map(|(l, c)| (l, ratio(c, total))).collect()
}
