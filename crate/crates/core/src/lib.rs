//! Fuzzy fingerprint classification.
//!
//! Each class is summarized by the top-K elements of its ranked feature
//! profile (accumulated encoder activations or token counts), each carrying
//! a membership that decreases with rank. Instances are fingerprinted the
//! same way and assigned to the class whose fingerprint shares the most
//! membership mass under the min t-norm.
//!
//! All numeric types are generic over [`Scalar`]; the aliases below fix the
//! common choices. `f64` is the default working type and [`Exact`] gives
//! rational arithmetic for bit-exact fixtures.

pub mod build;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fingerprint;
pub mod io;
pub mod library;
pub mod scalar;
pub mod synth;
pub mod token;

pub use build::{
    accumulate_class, build_activation_fingerprint, build_activation_fingerprint_with, build_library, build_library_with,
    build_token_fingerprint, instance_fingerprint, ClassRankings, TokenFingerprint,
};
pub use classify::{classify, classify_batch, explain, fmt_num, render_explanation, ExplanationReport};
pub use dataset::{tokenize, LabeledTokenBag, Split, TokenDataset};
pub use error::{FfpError, Result};
pub use eval::{aggregate_reports, evaluate, macro_f1, predict, select_k, sweep_k, sweep_k_with, ConfusionMatrix, EvalReport, KPoint, KSweepReport};
pub use fingerprint::{fuzzify, fuzzify_partial, rank, rank_by_value, similarity, ElementId, FeatureSpace, RankingMode};
pub use library::Vocabulary;
pub use scalar::{Exact, Scalar};

pub type Membership = fingerprint::Membership<f64>;
pub type Fingerprint = fingerprint::Fingerprint<f64>;
pub type FuzzifyParams = fingerprint::FuzzifyParams<f64>;
pub type SimilarityParams = fingerprint::SimilarityParams<f64>;
pub type FingerprintLibrary = library::FingerprintLibrary<f64>;
pub type LabeledVector = dataset::LabeledVector<f64>;
pub type ActivationDataset = dataset::ActivationDataset<f64>;
pub type Dataset = dataset::Dataset<f64>;
pub type ClassAccumulator = build::ClassAccumulator<f64>;
pub type ClassificationResult = classify::ClassificationResult<f64>;
pub type Explanation = classify::Explanation<f64>;

pub type FingerprintF32 = fingerprint::Fingerprint<f32>;
pub type FingerprintLibraryF32 = library::FingerprintLibrary<f32>;
pub type ActivationDatasetF32 = dataset::ActivationDataset<f32>;

pub type ExactFingerprint = fingerprint::Fingerprint<Exact>;
pub type ExactFuzzifyParams = fingerprint::FuzzifyParams<Exact>;
pub type ExactSimilarityParams = fingerprint::SimilarityParams<Exact>;
pub type ExactFingerprintLibrary = library::FingerprintLibrary<Exact>;
