//! Fingerprint values, rank fuzzification and the min-based fuzzy similarity.
//!
//! A fingerprint is the top-K of a ranked feature list, each element carrying
//! a membership that decreases linearly with rank:
//!
//! ```text
//! mu(i) = 1 - a * i / K        i = 0 .. K-1
//! ```
//!
//! Similarity between two fingerprints sums `min(mu_a(v), mu_b(v))` over the
//! shared elements and divides by a normalization constant `N`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FfpError, Result};
use crate::scalar::Scalar;

/// Index into the feature universe: an encoder output coordinate or a
/// vocabulary entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for ElementId {
    fn from(v: u32) -> Self {
        ElementId(v)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Membership degree in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Membership<T>(T);

impl<T: Scalar> Membership<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_finite_value() && value >= T::zero() && value <= T::one() {
            Ok(Membership(value))
        } else {
            Err(FfpError::Parameter(format!("membership {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSpace {
    Activation,
    Token,
}

impl fmt::Display for FeatureSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSpace::Activation => "activation",
            FeatureSpace::Token => "token",
        })
    }
}

/// How accumulated values are ordered before truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingMode {
    /// Descending signed value.
    #[default]
    Signed,
    /// Descending absolute value.
    Magnitude,
}

/// Fingerprint size `k` and membership slope `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzifyParams<T> {
    k: usize,
    a: T,
}

impl<T: Scalar> FuzzifyParams<T> {
    pub const DEFAULT_SLOPE: f64 = 0.8;

    pub fn new(k: usize, a: T) -> Result<Self> {
        if k == 0 {
            return Err(FfpError::Parameter("fingerprint size k must be at least 1".into()));
        }
        if !a.is_finite_value() || a < T::zero() || a > T::one() {
            return Err(FfpError::Parameter(format!("slope a = {a} outside [0, 1]")));
        }
        Ok(FuzzifyParams { k, a })
    }

    /// `k` with the default slope `a = 0.8`.
    pub fn with_default_slope(k: usize) -> Result<Self> {
        let a = T::from_f64_value(Self::DEFAULT_SLOPE)
            .ok_or_else(|| FfpError::Parameter("default slope not representable".into()))?;
        Self::new(k, a)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(k, self.a)
    }

    /// Membership of the element at zero-based rank `i`.
    pub fn membership(&self, rank: usize) -> T {
        // (K - a*i) / K: with a = 1 the numerator is an integer, so floats
        // land on the nearest value to the decimal ladder (0.3, not 0.30000000000000004).
        let k = T::from_usize(self.k).expect("k representable");
        let i = T::from_usize(rank).expect("rank representable");
        (k - self.a * i) / k
    }
}

/// Normalization constant `N` of the similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams<T> {
    n: T,
}

impl<T: Scalar> SimilarityParams<T> {
    pub fn new(n: T) -> Result<Self> {
        if !n.is_finite_value() || n <= T::zero() {
            return Err(FfpError::Parameter(format!("normalization N = {n} must be positive")));
        }
        Ok(SimilarityParams { n })
    }

    pub fn n(&self) -> T {
        self.n
    }
}

impl<T: Scalar> Default for SimilarityParams<T> {
    fn default() -> Self {
        SimilarityParams { n: T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry<T> {
    pub element: ElementId,
    pub mu: Membership<T>,
}

/// Ranked fuzzy set of at most `k` elements.
///
/// Class fingerprints are always complete (exactly `k` entries). Instance
/// fingerprints over short texts may hold fewer distinct tokens than `k`; the
/// memberships still follow the size-`k` ladder.
#[derive(Debug, Clone)]
pub struct Fingerprint<T> {
    entries: Vec<Entry<T>>,
    k: usize,
    feature_space: FeatureSpace,
    // (id, mu) sorted by id, for the merge in `similarity`.
    by_id: Vec<(ElementId, T)>,
}

impl<T: PartialEq> PartialEq for Fingerprint<T> {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.feature_space == other.feature_space && self.entries == other.entries
    }
}

impl<T: Scalar> Fingerprint<T> {
    /// Builds a fingerprint from explicit `(element, membership)` pairs in rank
    /// order, checking every structural invariant.
    pub fn from_entries(
        pairs: impl IntoIterator<Item = (ElementId, T)>,
        k: usize,
        feature_space: FeatureSpace,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for (element, mu) in pairs {
            entries.push(Entry { element, mu: Membership::new(mu)? });
        }
        if k == 0 {
            return Err(FfpError::Parameter("fingerprint size k must be at least 1".into()));
        }
        if entries.is_empty() || entries.len() > k {
            return Err(FfpError::Dimension(format!(
                "fingerprint holds {} entries, expected 1..={k}",
                entries.len()
            )));
        }
        if entries[0].mu.value() != T::one() {
            return Err(FfpError::Parameter(format!(
                "top-ranked membership is {}, expected 1",
                entries[0].mu.value()
            )));
        }
        for w in entries.windows(2) {
            if w[1].mu.value() > w[0].mu.value() {
                return Err(FfpError::Parameter(format!(
                    "memberships increase along the ranking at element {}",
                    w[1].element
                )));
            }
        }
        Self::assemble(entries, k, feature_space)
    }

    fn assemble(entries: Vec<Entry<T>>, k: usize, feature_space: FeatureSpace) -> Result<Self> {
        let mut by_id: Vec<(ElementId, T)> = entries.iter().map(|e| (e.element, e.mu.value())).collect();
        by_id.sort_unstable_by_key(|&(id, _)| id);
        if let Some(w) = by_id.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(FfpError::Dimension(format!("duplicate element {} in fingerprint", w[0].0)));
        }
        Ok(Fingerprint { entries, k, feature_space, by_id })
    }

    pub fn entries(&self) -> &[Entry<T>] {
        &self.entries
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when the fingerprint holds exactly `k` entries.
    pub fn is_complete(&self) -> bool {
        self.entries.len() == self.k
    }

    pub fn feature_space(&self) -> FeatureSpace {
        self.feature_space
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.entries.iter().map(|e| e.element)
    }

    /// Membership of `element`, zero when absent.
    pub fn membership_of(&self, element: ElementId) -> T {
        match self.by_id.binary_search_by_key(&element, |&(id, _)| id) {
            Ok(pos) => self.by_id[pos].1,
            Err(_) => T::zero(),
        }
    }

    /// Sum of all memberships (the self-similarity at `N = 1`).
    pub fn membership_sum(&self) -> T {
        self.by_id.iter().fold(T::zero(), |acc, &(_, mu)| acc + mu)
    }

    /// Shared elements as `(element, mu_self, mu_other)`, ascending by id.
    pub fn overlap<'a>(&'a self, other: &'a Fingerprint<T>) -> impl Iterator<Item = (ElementId, T, T)> + 'a {
        MergeShared { a: &self.by_id, b: &other.by_id, i: 0, j: 0 }
    }
}

struct MergeShared<'a, T> {
    a: &'a [(ElementId, T)],
    b: &'a [(ElementId, T)],
    i: usize,
    j: usize,
}

impl<T: Copy> Iterator for MergeShared<'_, T> {
    type Item = (ElementId, T, T);

    fn next(&mut self) -> Option<Self::Item> {
        while self.i < self.a.len() && self.j < self.b.len() {
            let (ia, ma) = self.a[self.i];
            let (ib, mb) = self.b[self.j];
            match ia.cmp(&ib) {
                Ordering::Less => self.i += 1,
                Ordering::Greater => self.j += 1,
                Ordering::Equal => {
                    self.i += 1;
                    self.j += 1;
                    return Some((ia, ma, mb));
                }
            }
        }
        None
    }
}

/// Keeps the first `k` ranked elements and assigns the linear membership ladder.
pub fn fuzzify<T: Scalar>(
    ranked: &[ElementId],
    params: &FuzzifyParams<T>,
    feature_space: FeatureSpace,
) -> Result<Fingerprint<T>> {
    if ranked.len() < params.k {
        return Err(FfpError::Dimension(format!(
            "ranking holds {} elements, fingerprint size is {}",
            ranked.len(),
            params.k
        )));
    }
    fuzzify_prefix(ranked, params, feature_space)
}

/// Like [`fuzzify`] but accepts rankings shorter than `k`, producing an
/// incomplete fingerprint with the same size-`k` ladder.
pub fn fuzzify_partial<T: Scalar>(
    ranked: &[ElementId],
    params: &FuzzifyParams<T>,
    feature_space: FeatureSpace,
) -> Result<Fingerprint<T>> {
    if ranked.is_empty() {
        return Err(FfpError::Dimension("cannot fingerprint an empty ranking".into()));
    }
    fuzzify_prefix(ranked, params, feature_space)
}

fn fuzzify_prefix<T: Scalar>(
    ranked: &[ElementId],
    params: &FuzzifyParams<T>,
    feature_space: FeatureSpace,
) -> Result<Fingerprint<T>> {
    let entries = ranked
        .iter()
        .take(params.k)
        .enumerate()
        .map(|(i, &element)| Entry { element, mu: Membership(params.membership(i)) })
        .collect();
    Fingerprint::assemble(entries, params.k, feature_space)
}

/// All ids `0..D` ordered by value descending, ties by ascending id.
pub fn rank_by_value<T: Scalar>(values: &[T]) -> Result<Vec<ElementId>> {
    rank(values, RankingMode::Signed)
}

pub fn rank<T: Scalar>(values: &[T], mode: RankingMode) -> Result<Vec<ElementId>> {
    if values.is_empty() {
        return Err(FfpError::Dimension("cannot rank an empty vector".into()));
    }
    if values.len() > u32::MAX as usize {
        return Err(FfpError::Dimension("vector exceeds the element id range".into()));
    }
    if let Some(d) = values.iter().position(|v| !v.is_finite_value()) {
        return Err(FfpError::Build(format!("non-finite value at coordinate {d}")));
    }
    let key = |v: T| match mode {
        RankingMode::Signed => v,
        RankingMode::Magnitude => v.abs(),
    };
    let mut ids: Vec<u32> = (0..values.len() as u32).collect();
    ids.sort_by(|&x, &y| {
        let (vx, vy) = (key(values[x as usize]), key(values[y as usize]));
        vy.partial_cmp(&vx).unwrap_or(Ordering::Equal).then(x.cmp(&y))
    });
    Ok(ids.into_iter().map(ElementId).collect())
}

/// Fuzzy-AND similarity: `sum over shared v of min(mu_a(v), mu_b(v)) / N`.
///
/// Terms are accumulated in ascending element order, so the result is
/// bit-for-bit symmetric in its arguments.
pub fn similarity<T: Scalar>(fa: &Fingerprint<T>, fb: &Fingerprint<T>, params: &SimilarityParams<T>) -> Result<T> {
    if fa.feature_space != fb.feature_space {
        return Err(FfpError::Domain { expected: fa.feature_space, found: fb.feature_space });
    }
    let sum = fa.overlap(fb).fold(T::zero(), |acc, (_, ma, mb)| acc + ma.min_value(mb));
    Ok(sum / params.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn ids(v: &[u32]) -> Vec<ElementId> {
        v.iter().copied().map(ElementId).collect()
    }

    fn mus<T: Scalar>(fp: &Fingerprint<T>) -> Vec<T> {
        fp.entries().iter().map(|e| e.mu.value()).collect()
    }

    #[test]
    fn ladder_with_full_slope() {
        let ranked = ids(&[217, 644, 541, 718, 401, 330, 426, 78, 580, 114]);
        let p = FuzzifyParams::new(10, Ratio::from_integer(1)).unwrap();
        let fp: Fingerprint<Exact> = fuzzify(&ranked, &p, FeatureSpace::Activation).unwrap();
        let expected: Vec<Exact> = (0..10).map(|i| Ratio::new(10 - i, 10)).collect();
        assert_eq!(mus(&fp), expected);
        assert_eq!(fp.elements().collect::<Vec<_>>(), ranked);
    }

    #[test]
    fn zero_slope_is_flat() {
        let ranked = ids(&[9, 8, 7, 6, 5, 4, 3, 2, 1, 0]);
        let fp = fuzzify(&ranked, &FuzzifyParams::new(10, 0.0).unwrap(), FeatureSpace::Activation).unwrap();
        assert!(mus(&fp).iter().all(|&m| m == 1.0));
    }

    #[test]
    fn default_slope_tail() {
        let p = FuzzifyParams::<f64>::with_default_slope(300).unwrap();
        assert_eq!(p.membership(0), 1.0);
        assert!((p.membership(299) - 0.202_666_666_666_666_7).abs() < 1e-12);
    }

    #[test]
    fn fuzzify_errors() {
        let ranked = ids(&[0, 1]);
        let p = FuzzifyParams::new(3, 1.0).unwrap();
        assert!(matches!(fuzzify(&ranked, &p, FeatureSpace::Activation), Err(FfpError::Dimension(_))));
        assert!(matches!(FuzzifyParams::new(3, 1.5), Err(FfpError::Parameter(_))));
        assert!(matches!(FuzzifyParams::new(3, -0.1), Err(FfpError::Parameter(_))));
        assert!(matches!(FuzzifyParams::new(0, 0.5), Err(FfpError::Parameter(_))));
        let dup = ids(&[1, 1, 2]);
        assert!(fuzzify(&dup, &FuzzifyParams::new(3, 1.0).unwrap(), FeatureSpace::Activation).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_by_value(&[0.5, 2.0, 1.0]).unwrap(), ids(&[1, 2, 0]));
        assert_eq!(rank_by_value(&[1.0, 1.0, 0.0]).unwrap(), ids(&[0, 1, 2]));
        assert_eq!(rank_by_value(&[-1.0, -2.0, 3.0]).unwrap(), ids(&[2, 0, 1]));
        assert!(matches!(rank_by_value::<f64>(&[]), Err(FfpError::Dimension(_))));
        assert!(rank_by_value(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn rank_by_magnitude() {
        assert_eq!(rank(&[-3.0, 2.0, 1.0], RankingMode::Magnitude).unwrap(), ids(&[0, 1, 2]));
        assert_eq!(rank(&[-3.0, 2.0, 1.0], RankingMode::Signed).unwrap(), ids(&[1, 2, 0]));
    }

    #[test]
    fn self_similarity_is_membership_sum() {
        let ranked: Vec<ElementId> = (0..10).map(ElementId).collect();
        let fp = fuzzify(&ranked, &FuzzifyParams::new(10, 1.0).unwrap(), FeatureSpace::Activation).unwrap();
        let s: f64 = similarity(&fp, &fp, &SimilarityParams::default()).unwrap();
        assert!((s - 5.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_similarity_is_zero() {
        let p = FuzzifyParams::new(3, 1.0).unwrap();
        let a = fuzzify(&ids(&[0, 1, 2]), &p, FeatureSpace::Activation).unwrap();
        let b = fuzzify(&ids(&[3, 4, 5]), &p, FeatureSpace::Activation).unwrap();
        assert_eq!(similarity(&a, &b, &SimilarityParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let p = FuzzifyParams::new(1, 1.0).unwrap();
        let a = fuzzify(&ids(&[0]), &p, FeatureSpace::Activation).unwrap();
        let b = fuzzify(&ids(&[0]), &p, FeatureSpace::Token).unwrap();
        assert!(matches!(similarity(&a, &b, &SimilarityParams::default()), Err(FfpError::Domain { .. })));
    }

    #[test]
    fn from_entries_validates() {
        let ok = Fingerprint::from_entries([(ElementId(3), 1.0), (ElementId(1), 0.5)], 2, FeatureSpace::Activation);
        assert!(ok.is_ok());
        let not_top = Fingerprint::from_entries([(ElementId(3), 0.9)], 1, FeatureSpace::Activation);
        assert!(not_top.is_err());
        let rising = Fingerprint::from_entries([(ElementId(3), 1.0), (ElementId(1), 0.5), (ElementId(2), 0.7)], 3, FeatureSpace::Activation);
        assert!(rising.is_err());
        let dup = Fingerprint::from_entries([(ElementId(3), 1.0), (ElementId(3), 0.5)], 2, FeatureSpace::Activation);
        assert!(dup.is_err());
        let too_long = Fingerprint::from_entries([(ElementId(3), 1.0), (ElementId(1), 0.5)], 1, FeatureSpace::Activation);
        assert!(too_long.is_err());
        let out_of_range = Fingerprint::from_entries([(ElementId(3), 1.0), (ElementId(1), -0.5)], 2, FeatureSpace::Activation);
        assert!(out_of_range.is_err());
    }

    #[test]
    fn partial_fingerprint_keeps_ladder() {
        let p = FuzzifyParams::new(4, 1.0).unwrap();
        let fp = fuzzify_partial(&ids(&[7, 3]), &p, FeatureSpace::Token).unwrap();
        assert_eq!(mus(&fp), vec![1.0, 0.75]);
        assert!(!fp.is_complete());
        assert!(fuzzify_partial::<f64>(&[], &p, FeatureSpace::Token).is_err());
    }

    #[test]
    fn similarity_params_reject_nonpositive() {
        assert!(SimilarityParams::new(0.0).is_err());
        assert!(SimilarityParams::new(-1.0).is_err());
        assert!(SimilarityParams::new(f64::INFINITY).is_err());
    }

    fn arb_fingerprint(max_k: usize, universe: u32) -> impl Strategy<Value = Fingerprint<f64>> {
        (1..=max_k, 0.0f64..=1.0)
            .prop_flat_map(move |(k, a)| {
                (Just(k), Just(a), proptest::sample::subsequence((0..universe).collect::<Vec<_>>(), k).prop_shuffle())
            })
            .prop_map(|(k, a, ids)| {
                let ranked: Vec<ElementId> = ids.into_iter().map(ElementId).collect();
                fuzzify(&ranked, &FuzzifyParams::new(k, a).unwrap(), FeatureSpace::Activation).unwrap()
            })
    }

    proptest! {
        #[test]
        fn ladder_bounds(k in 1usize..200, a in 0.0f64..=1.0) {
            let p = FuzzifyParams::new(k, a).unwrap();
            prop_assert_eq!(p.membership(0), 1.0);
            for i in 0..k {
                let m = p.membership(i);
                prop_assert!(m >= 1.0 - a - 1e-12 && m <= 1.0);
                if a > 0.0 && i > 0 {
                    prop_assert!(m < p.membership(i - 1));
                }
            }
        }

        #[test]
        fn symmetric_and_bounded_by_self(fa in arb_fingerprint(32, 64), fb in arb_fingerprint(32, 64)) {
            let n = SimilarityParams::default();
            let ab = similarity(&fa, &fb, &n).unwrap();
            let ba = similarity(&fb, &fa, &n).unwrap();
            prop_assert_eq!(ab.to_bits(), ba.to_bits());
            prop_assert!(ab >= 0.0);
            prop_assert!(ab <= similarity(&fa, &fa, &n).unwrap() + 1e-12);
        }

        #[test]
        fn rank_is_permutation(values in proptest::collection::vec(-1e3f64..1e3, 1..100)) {
            let r = rank_by_value(&values).unwrap();
            let mut sorted: Vec<u32> = r.iter().map(|e| e.0).collect();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..values.len() as u32).collect::<Vec<_>>());
            for w in r.windows(2) {
                let (x, y) = (values[w[0].index()], values[w[1].index()]);
                prop_assert!(x > y || (x == y && w[0] < w[1]));
            }
        }
    }
}
