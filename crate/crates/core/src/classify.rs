//! Nearest-fingerprint classification and per-element explanations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FfpError, Result};
use crate::fingerprint::{similarity, ElementId, Fingerprint, SimilarityParams};
use crate::library::FingerprintLibrary;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult<T> {
    pub predicted: String,
    pub scores: BTreeMap<String, T>,
    pub instance_fp: Fingerprint<T>,
}

impl<T: Scalar> ClassificationResult<T> {
    /// True when the instance shares no element with any class.
    pub fn no_evidence(&self) -> bool {
        self.scores.values().all(|s| s.is_zero())
    }
}

fn check_compatible<T: Scalar>(instance_fp: &Fingerprint<T>, library: &FingerprintLibrary<T>) -> Result<()> {
    if library.is_empty() {
        return Err(FfpError::Classification("empty fingerprint library".into()));
    }
    if instance_fp.feature_space() != library.feature_space() {
        return Err(FfpError::Domain { expected: library.feature_space(), found: instance_fp.feature_space() });
    }
    Ok(())
}

/// Scores the instance against every class; the highest score wins, ties go
/// to the lexicographically smallest label.
pub fn classify<T: Scalar>(
    instance_fp: &Fingerprint<T>,
    library: &FingerprintLibrary<T>,
    params: &SimilarityParams<T>,
) -> Result<ClassificationResult<T>> {
    check_compatible(instance_fp, library)?;
    let unit = SimilarityParams::default();
    let mut scores = BTreeMap::new();
    let mut best: Option<(&str, T)> = None;
    for (label, class_fp) in library.classes() {
        // The argmax runs on the raw sum: dividing by N can merge two sums an
        // ulp apart and flip the tie-break.
        let raw = similarity(instance_fp, class_fp, &unit)?;
        // BTreeMap iterates labels ascending, so strict `>` keeps the smallest on ties.
        if best.is_none_or(|(_, b)| raw > b) {
            best = Some((label, raw));
        }
        scores.insert(label.clone(), raw / params.n());
    }
    let (predicted, _) = best.expect("library is non-empty");
    Ok(ClassificationResult { predicted: predicted.to_string(), scores, instance_fp: instance_fp.clone() })
}

/// Classifies many instance fingerprints in parallel, preserving input order.
pub fn classify_batch<T: Scalar>(
    instances: &[Fingerprint<T>],
    library: &FingerprintLibrary<T>,
    params: &SimilarityParams<T>,
) -> Result<Vec<ClassificationResult<T>>> {
    instances.par_iter().map(|fp| classify(fp, library, params)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contribution<T> {
    pub element: ElementId,
    pub mu_instance: T,
    pub mu_class: T,
    pub contribution: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassEvidence<T> {
    pub label: String,
    /// Shared elements, largest contribution first.
    pub rows: Vec<Contribution<T>>,
    /// Sum of contributions before dividing by `N`.
    pub total: T,
    /// `total / N`, the similarity score.
    pub score: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation<T> {
    pub n: T,
    pub predicted: String,
    /// Set when every class scored zero; `predicted` is then only the tie-break winner.
    pub no_evidence: bool,
    pub per_class: Vec<ClassEvidence<T>>,
}

impl<T: Scalar> Explanation<T> {
    pub fn class(&self, label: &str) -> Option<&ClassEvidence<T>> {
        self.per_class.iter().find(|c| c.label == label)
    }
}

/// Lists, for each class, the shared elements with both memberships and
/// their minimum.
pub fn explain<T: Scalar>(
    instance_fp: &Fingerprint<T>,
    library: &FingerprintLibrary<T>,
    params: &SimilarityParams<T>,
) -> Result<Explanation<T>> {
    let result = classify(instance_fp, library, params)?;
    let rank_of: BTreeMap<ElementId, usize> = instance_fp.elements().enumerate().map(|(i, e)| (e, i)).collect();
    let per_class = library
        .classes()
        .iter()
        .map(|(label, class_fp)| {
            let mut rows: Vec<Contribution<T>> = instance_fp
                .overlap(class_fp)
                .map(|(element, mu_instance, mu_class)| Contribution {
                    element,
                    mu_instance,
                    mu_class,
                    contribution: mu_instance.min_value(mu_class),
                })
                .collect();
            rows.sort_by(|a, b| {
                b.contribution
                    .partial_cmp(&a.contribution)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| rank_of[&a.element].cmp(&rank_of[&b.element]))
            });
            let total = rows.iter().fold(T::zero(), |acc, r| acc + r.contribution);
            ClassEvidence { label: label.clone(), rows, total, score: result.scores[label] }
        })
        .collect();
    Ok(Explanation { n: params.n(), no_evidence: result.no_evidence(), predicted: result.predicted, per_class })
}

/// Serializable form of an [`Explanation`] with element names resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub n: f64,
    pub predicted: String,
    pub no_evidence: bool,
    pub classes: Vec<ClassEvidenceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEvidenceReport {
    pub label: String,
    pub score: f64,
    pub total: f64,
    pub shared: Vec<ContributionReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionReport {
    pub element: u32,
    pub name: String,
    pub mu_instance: f64,
    pub mu_class: f64,
    pub contribution: f64,
}

impl<T: Scalar> Explanation<T> {
    pub fn to_report(&self, library: &FingerprintLibrary<T>) -> ExplanationReport {
        ExplanationReport {
            n: self.n.to_f64_value(),
            predicted: self.predicted.clone(),
            no_evidence: self.no_evidence,
            classes: self
                .per_class
                .iter()
                .map(|c| ClassEvidenceReport {
                    label: c.label.clone(),
                    score: c.score.to_f64_value(),
                    total: c.total.to_f64_value(),
                    shared: c
                        .rows
                        .iter()
                        .map(|r| ContributionReport {
                            element: r.element.0,
                            name: library.element_name(r.element),
                            mu_instance: r.mu_instance.to_f64_value(),
                            mu_class: r.mu_class.to_f64_value(),
                            contribution: r.contribution.to_f64_value(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Plain-text rendering of an explanation report.
pub fn render_explanation(id: &str, report: &ExplanationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance {id}: predicted {}{}", report.predicted, if report.no_evidence { " (no evidence)" } else { "" });
    let _ = writeln!(out, "  class similarity (N={}):", fmt_num(report.n));
    for c in &report.classes {
        let marker = if c.label == report.predicted { "*" } else { " " };
        let _ = writeln!(out, "  {marker} {:<12} {:>8}", c.label, fmt_num(c.score));
        for r in &c.shared {
            let _ = writeln!(
                out,
                "      {:<14} instance {:<6} class {:<6} min {}",
                r.name,
                fmt_num(r.mu_instance),
                fmt_num(r.mu_class),
                fmt_num(r.contribution)
            );
        }
    }
    out
}

/// Shortest decimal that survives typical rounding noise (e.g. 0.30000000000000004 -> 0.3).
pub fn fmt_num(v: f64) -> String {
    let s = format!("{:.10}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::{fuzzify, FeatureSpace, FuzzifyParams, RankingMode};

    fn fp(ids: &[u32]) -> Fingerprint<f64> {
        let ranked: Vec<ElementId> = ids.iter().copied().map(ElementId).collect();
        fuzzify(&ranked, &FuzzifyParams::new(ids.len(), 1.0).unwrap(), FeatureSpace::Activation).unwrap()
    }

    fn lib(classes: &[(&str, &[u32])]) -> FingerprintLibrary<f64> {
        let k = classes[0].1.len();
        let map = classes.iter().map(|(l, ids)| (l.to_string(), fp(ids))).collect();
        FingerprintLibrary::activation(map, FuzzifyParams::new(k, 1.0).unwrap(), 100, RankingMode::Signed).unwrap()
    }

    #[test]
    fn argmax_and_tie_break() {
        let l = lib(&[("B", &[1, 2]), ("A", &[1, 2]), ("C", &[3, 4])]);
        let r = classify(&fp(&[1, 2]), &l, &SimilarityParams::default()).unwrap();
        assert_eq!(r.predicted, "A");
        assert_eq!(r.scores.len(), 3);
        assert_eq!(r.scores["C"], 0.0);
        assert!(!r.no_evidence());

        let r = classify(&fp(&[3, 9]), &l, &SimilarityParams::default()).unwrap();
        assert_eq!(r.predicted, "C");
    }

    #[test]
    fn no_evidence_still_predicts() {
        let l = lib(&[("b", &[1, 2]), ("a", &[3, 4])]);
        let e = explain(&fp(&[7, 8]), &l, &SimilarityParams::default()).unwrap();
        assert_eq!(e.predicted, "a");
        assert!(e.no_evidence);
        assert!(e.per_class.iter().all(|c| c.rows.is_empty() && c.total == 0.0));
    }

    #[test]
    fn explain_self_gives_ladder() {
        let ids = [5, 9, 2, 7];
        let l = lib(&[("self", &ids)]);
        let e = explain(&fp(&ids), &l, &SimilarityParams::default()).unwrap();
        let rows = &e.class("self").unwrap().rows;
        assert_eq!(rows.len(), 4);
        let got: Vec<(u32, f64)> = rows.iter().map(|r| (r.element.0, r.contribution)).collect();
        assert_eq!(got, vec![(5, 1.0), (9, 0.75), (2, 0.5), (7, 0.25)]);
    }

    #[test]
    fn explanation_totals_match_scores() {
        let l = lib(&[("x", &[1, 2, 3, 4]), ("y", &[4, 3, 9, 8])]);
        let n = SimilarityParams::new(3.0).unwrap();
        let inst = fp(&[3, 4, 1, 0]);
        let r = classify(&inst, &l, &n).unwrap();
        let e = explain(&inst, &l, &n).unwrap();
        for c in &e.per_class {
            assert!((c.total / 3.0 - r.scores[&c.label]).abs() < 1e-9);
        }
    }

    #[test]
    fn errors() {
        let l = lib(&[("x", &[1, 2])]);
        let tok = fuzzify(&[ElementId(1)], &FuzzifyParams::new(1, 1.0).unwrap(), FeatureSpace::Token).unwrap();
        assert!(matches!(classify(&tok, &l, &SimilarityParams::default()), Err(FfpError::Domain { .. })));
    }

    #[test]
    fn batch_preserves_order() {
        let l = lib(&[("x", &[1, 2]), ("y", &[3, 4])]);
        let inst = vec![fp(&[3, 0]), fp(&[1, 0]), fp(&[4, 3])];
        let labels: Vec<String> =
            classify_batch(&inst, &l, &SimilarityParams::default()).unwrap().into_iter().map(|r| r.predicted).collect();
        assert_eq!(labels, ["y", "x", "y"]);
    }

    #[test]
    fn render_marks_winner() {
        let l = lib(&[("x", &[1, 2]), ("y", &[3, 4])]);
        let e = explain(&fp(&[1, 3]), &l, &SimilarityParams::default()).unwrap();
        let text = render_explanation("u1", &e.to_report(&l));
        assert!(text.contains("predicted x"));
        assert!(text.contains("* x"));
        assert_eq!(fmt_num(0.30000000000000004), "0.3");
        assert_eq!(fmt_num(1.0), "1");
    }
}
