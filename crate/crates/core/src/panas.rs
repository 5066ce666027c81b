//! Affect scoring and score discretization.
//!
//! `score` turns a self-report into positive/negative affect sums and the
//! balance score `pa - na` in `[-20, 20]`. `discretize` splits observed
//! balance scores into three classes (negative / neutral / positive) by
//! picking the pair of cut points that minimizes the size-weighted entropy
//! of the resulting bins, where every distinct score value acts as its own
//! label. Candidate cuts sit midway between adjacent distinct values; ties
//! resolve to the smallest cut pair, so the fit is deterministic.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ingest::PanasEntry;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PanasError {
    #[error("entropy of an empty distribution is undefined")]
    EmptyDistribution,
    #[error("discretization needs at least 3 distinct score values, got {0}")]
    TooFewDistinctValues(usize),
    #[error("empty input")]
    EmptyInput,
    #[error("bad discretization model text: {0}")]
    BadModelText(String),
}

/// Positive affect, negative affect and their balance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffectScore {
    /// Sum of the five positive items, in `[5, 25]`.
    pub pa: i32,
    /// Sum of the five negative items, in `[5, 25]`.
    pub na: i32,
    /// `pa - na`, in `[-20, 20]`.
    pub balance: i32,
}

/// Sum the positive items (Determined, Attentive, Alert, Inspired,
/// Active) and the negative items (Upset, Ashamed, Nervous, Afraid,
/// Hostile).
pub fn score(entry: &PanasEntry) -> AffectScore {
    let it = &entry.items;
    let pa = [it.determined, it.attentive, it.alert, it.inspired, it.active]
        .iter()
        .map(|&v| v as i32)
        .sum();
    let na = [it.upset, it.ashamed, it.nervous, it.afraid, it.hostile]
        .iter()
        .map(|&v| v as i32)
        .sum();
    AffectScore {
        pa,
        na,
        balance: pa - na,
    }
}

/// The three affect classes, ordered negative < neutral < positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AffectClass {
    Negative,
    Neutral,
    Positive,
}

impl AffectClass {
    pub const ALL: [AffectClass; 3] = [
        AffectClass::Negative,
        AffectClass::Neutral,
        AffectClass::Positive,
    ];

    pub fn as_i8(self) -> i8 {
        match self {
            AffectClass::Negative => -1,
            AffectClass::Neutral => 0,
            AffectClass::Positive => 1,
        }
    }

    pub fn from_i8(v: i8) -> Option<AffectClass> {
        match v {
            -1 => Some(AffectClass::Negative),
            0 => Some(AffectClass::Neutral),
            1 => Some(AffectClass::Positive),
            _ => None,
        }
    }

    /// Dense index 0..3 in class order.
    pub fn index(self) -> usize {
        match self {
            AffectClass::Negative => 0,
            AffectClass::Neutral => 1,
            AffectClass::Positive => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<AffectClass> {
        Self::ALL.get(i).copied()
    }
}

/// Two ordered cut points mapping scores to classes:
/// `score <= c1` is negative, `c1 < score <= c2` neutral, above positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationModel {
    cut_low: f64,
    cut_high: f64,
}

impl DiscretizationModel {
    pub fn new(cut_low: f64, cut_high: f64) -> Option<Self> {
        (cut_low < cut_high).then_some(DiscretizationModel { cut_low, cut_high })
    }

    pub fn cuts(&self) -> (f64, f64) {
        (self.cut_low, self.cut_high)
    }

    /// Total over all integers; a cut boundary belongs to the lower class.
    pub fn classify(&self, score: i32) -> AffectClass {
        let s = score as f64;
        if s <= self.cut_low {
            AffectClass::Negative
        } else if s <= self.cut_high {
            AffectClass::Neutral
        } else {
            AffectClass::Positive
        }
    }

    /// Two-line text form: `cut1 <value>` / `cut2 <value>`.
    pub fn to_text(&self) -> String {
        format!("cut1 {}\ncut2 {}\n", self.cut_low, self.cut_high)
    }

    pub fn parse_text(text: &str) -> Result<Self, PanasError> {
        let mut cuts = [None::<f64>; 2];
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| PanasError::BadModelText(line.to_string()))?;
            let slot = match key {
                "cut1" => 0,
                "cut2" => 1,
                _ => return Err(PanasError::BadModelText(line.to_string())),
            };
            cuts[slot] = Some(
                value
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| PanasError::BadModelText(line.to_string()))?,
            );
        }
        match cuts {
            [Some(c1), Some(c2)] => DiscretizationModel::new(c1, c2)
                .ok_or_else(|| PanasError::BadModelText("cut1 must be below cut2".to_string())),
            _ => Err(PanasError::BadModelText("missing cut line".to_string())),
        }
    }
}

/// Shannon entropy in bits of a label count distribution, with
/// `0 * log 0 = 0`.
pub fn entropy(label_counts: &[u64]) -> Result<f64, PanasError> {
    let total: u64 = label_counts.iter().sum();
    if total == 0 {
        return Err(PanasError::EmptyDistribution);
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in label_counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Objective differences below this are treated as ties. Genuine ties
/// (identical bin-size multisets) differ only by rounding noise around
/// 1e-15, while distinct partitions of realistic samples differ by far
/// more than 1e-9.
pub const ENTROPY_TIE_EPS: f64 = 1e-9;

/// Fit the three-class discretization for a score multiset.
///
/// Minimizes the size-weighted sum of bin entropies over all ordered
/// pairs of candidate cuts (midpoints between adjacent distinct values),
/// with each distinct score value acting as a label. Ties break to the
/// smallest cut pair.
pub fn discretize(scores: &[i32]) -> Result<DiscretizationModel, PanasError> {
    let mut counts: BTreeMap<i32, u64> = BTreeMap::new();
    for &s in scores {
        *counts.entry(s).or_insert(0) += 1;
    }
    let values: Vec<i32> = counts.keys().copied().collect();
    let bin_counts: Vec<u64> = counts.values().copied().collect();
    let d = values.len();
    if d < 3 {
        return Err(PanasError::TooFewDistinctValues(d));
    }

    // Prefix sums of counts and of c*log2(c) let each bin entropy be
    // evaluated in O(1): H = log2(N) - sum(c log2 c) / N.
    let mut pre_n = vec![0.0f64; d + 1];
    let mut pre_clog = vec![0.0f64; d + 1];
    for (i, &c) in bin_counts.iter().enumerate() {
        let c = c as f64;
        pre_n[i + 1] = pre_n[i] + c;
        pre_clog[i + 1] = pre_clog[i] + c * c.log2();
    }
    let total = pre_n[d];
    let bin_entropy_n = |lo: usize, hi: usize| -> (f64, f64) {
        let n = pre_n[hi] - pre_n[lo];
        let s = pre_clog[hi] - pre_clog[lo];
        (n, n.log2() - s / n)
    };

    // Cut index a means a split between distinct values a and a+1.
    // Candidates are scanned in ascending cut order and a later candidate
    // must win by more than the tie band, so exactly tied partitions
    // (e.g. mirror images) resolve to the smallest cut pair regardless of
    // floating-point noise.
    let mut best: Option<(f64, usize, usize)> = None;
    for a in 0..d - 1 {
        for b in a + 1..d - 1 {
            let (n1, h1) = bin_entropy_n(0, a + 1);
            let (n2, h2) = bin_entropy_n(a + 1, b + 1);
            let (n3, h3) = bin_entropy_n(b + 1, d);
            let weighted = (n1 * h1 + n2 * h2 + n3 * h3) / total;
            if best.is_none_or(|(w, _, _)| weighted < w - ENTROPY_TIE_EPS) {
                best = Some((weighted, a, b));
            }
        }
    }
    let (_, a, b) = best.expect("d >= 3 guarantees at least one cut pair");
    let cut = |i: usize| (values[i] as f64 + values[i + 1] as f64) / 2.0;
    Ok(DiscretizationModel {
        cut_low: cut(a),
        cut_high: cut(b),
    })
}

/// Summary statistics of a score sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator; 0 for a single score).
    pub std: f64,
    /// Fraction of scores strictly above zero.
    pub frac_positive: f64,
    /// Fraction of scores strictly below zero.
    pub frac_negative: f64,
    pub min: i32,
    pub max: i32,
}

pub fn distribution_report(scores: &[i32]) -> Result<DistributionSummary, PanasError> {
    if scores.is_empty() {
        return Err(PanasError::EmptyInput);
    }
    let n = scores.len();
    let mean = scores.iter().map(|&s| s as f64).sum::<f64>() / n as f64;
    let std = if n < 2 {
        0.0
    } else {
        let ss: f64 = scores.iter().map(|&s| (s as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    Ok(DistributionSummary {
        n,
        mean,
        std,
        frac_positive: scores.iter().filter(|&&s| s > 0).count() as f64 / n as f64,
        frac_negative: scores.iter().filter(|&&s| s < 0).count() as f64 / n as f64,
        min: *scores.iter().min().expect("non-empty"),
        max: *scores.iter().max().expect("non-empty"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PanasItems;
    use chrono::TimeZone;

    fn entry(values: [u8; 10]) -> PanasEntry {
        let [determined, attentive, alert, inspired, active, upset, ashamed, nervous, afraid, hostile] =
            values;
        PanasEntry {
            timestamp: chrono::Utc.with_ymd_and_hms(2016, 4, 12, 9, 0, 0).unwrap(),
            user_id: "u01".to_string(),
            items: PanasItems {
                determined,
                attentive,
                alert,
                inspired,
                active,
                upset,
                ashamed,
                nervous,
                afraid,
                hostile,
            },
        }
    }

    #[test]
    fn score_sums_and_balance() {
        let s = score(&entry([1; 10]));
        assert_eq!((s.pa, s.na, s.balance), (5, 5, 0));

        let s = score(&entry([5, 5, 5, 5, 5, 1, 1, 1, 1, 1]));
        assert_eq!((s.pa, s.na, s.balance), (25, 5, 20));

        let s = score(&entry([3, 2, 4, 1, 5, 2, 1, 3, 1, 1]));
        assert_eq!((s.pa, s.na, s.balance), (15, 8, 7));
    }

    #[test]
    fn entropy_known_values() {
        assert_eq!(entropy(&[1, 1]).unwrap(), 1.0);
        assert_eq!(entropy(&[4, 0]).unwrap(), 0.0);
        assert_eq!(entropy(&[1, 1, 1, 1]).unwrap(), 2.0);
        assert_eq!(entropy(&[]), Err(PanasError::EmptyDistribution));
        assert_eq!(entropy(&[0, 0]), Err(PanasError::EmptyDistribution));
    }

    #[test]
    fn entropy_scale_and_permutation_invariance() {
        let a = entropy(&[3, 5, 9]).unwrap();
        assert!((entropy(&[30, 50, 90]).unwrap() - a).abs() < 1e-12);
        assert!((entropy(&[9, 3, 5]).unwrap() - a).abs() < 1e-12);
        assert!(a >= 0.0 && a <= 3f64.log2() + 1e-12);
    }

    #[test]
    fn discretize_separates_three_clusters() {
        let mut scores = Vec::new();
        scores.extend(std::iter::repeat_n(-10, 50));
        scores.extend(std::iter::repeat_n(0, 50));
        scores.extend(std::iter::repeat_n(10, 50));
        let model = discretize(&scores).unwrap();
        assert_eq!(model.cuts(), (-5.0, 5.0));
        assert_eq!(model.classify(-10), AffectClass::Negative);
        assert_eq!(model.classify(0), AffectClass::Neutral);
        assert_eq!(model.classify(10), AffectClass::Positive);
    }

    #[test]
    fn discretize_three_singletons() {
        let model = discretize(&[1, 2, 3]).unwrap();
        assert_eq!(model.cuts(), (1.5, 2.5));
    }

    #[test]
    fn discretize_rejects_too_few_distinct() {
        assert_eq!(
            discretize(&[5, 5, 5]),
            Err(PanasError::TooFewDistinctValues(1))
        );
    }

    /// Independent oracle: enumerate every ordered cut pair and recompute
    /// the weighted entropy from the raw scores with the direct
    /// -sum(p log2 p) formula.
    fn brute_force_cuts(scores: &[i32]) -> (f64, f64) {
        let mut distinct: Vec<i32> = scores.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let cuts: Vec<f64> = distinct
            .windows(2)
            .map(|w| (w[0] as f64 + w[1] as f64) / 2.0)
            .collect();
        let entropy_of = |bin: &[i32]| -> f64 {
            let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
            for &s in bin {
                *counts.entry(s).or_insert(0) += 1;
            }
            let n = bin.len() as f64;
            counts
                .values()
                .map(|&c| {
                    let p = c as f64 / n;
                    -p * p.log2()
                })
                .sum()
        };
        let mut best: Option<(f64, (f64, f64))> = None;
        for (i, &c1) in cuts.iter().enumerate() {
            for &c2 in &cuts[i + 1..] {
                let lo: Vec<i32> = scores.iter().copied().filter(|&s| (s as f64) <= c1).collect();
                let mid: Vec<i32> = scores
                    .iter()
                    .copied()
                    .filter(|&s| (s as f64) > c1 && (s as f64) <= c2)
                    .collect();
                let hi: Vec<i32> = scores.iter().copied().filter(|&s| (s as f64) > c2).collect();
                let n = scores.len() as f64;
                let w = (lo.len() as f64 * entropy_of(&lo)
                    + mid.len() as f64 * entropy_of(&mid)
                    + hi.len() as f64 * entropy_of(&hi))
                    / n;
                if best.is_none_or(|(bw, _)| w < bw - ENTROPY_TIE_EPS) {
                    best = Some((w, (c1, c2)));
                }
            }
        }
        best.expect("at least one pair").1
    }

    #[test]
    fn discretize_matches_brute_force_on_random_multisets() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xD15C);
        for _ in 0..60 {
            let distinct = rng.random_range(3..=12usize);
            let n = rng.random_range(distinct..=120usize);
            let mut pool: Vec<i32> = Vec::new();
            while pool.len() < distinct {
                let v = rng.random_range(-20..=20);
                if !pool.contains(&v) {
                    pool.push(v);
                }
            }
            let mut scores: Vec<i32> = pool.clone();
            for _ in scores.len()..n {
                scores.push(*pool.choose(&mut rng).unwrap());
            }
            let model = discretize(&scores).unwrap();
            assert_eq!(model.cuts(), brute_force_cuts(&scores), "scores {scores:?}");
        }
    }

    #[test]
    fn classify_is_total_and_monotone() {
        let model = DiscretizationModel::new(-5.0, 5.0).unwrap();
        assert_eq!(model.classify(20), AffectClass::Positive);
        assert_eq!(model.classify(-5), AffectClass::Negative);
        assert_eq!(model.classify(-20), AffectClass::Negative);
        let mut last = model.classify(-20);
        for s in -20..=20 {
            let c = model.classify(s);
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn model_text_round_trip() {
        let model = discretize(&[-10, -10, 0, 0, 3, 9]).unwrap();
        let back = DiscretizationModel::parse_text(&model.to_text()).unwrap();
        assert_eq!(model, back);
        assert!(DiscretizationModel::parse_text("cut1 2\ncut2 1\n").is_err());
        assert!(DiscretizationModel::parse_text("cut1 2\n").is_err());
    }

    #[test]
    fn distribution_summary_values() {
        let s = distribution_report(&[0, 0, 0]).unwrap();
        assert_eq!((s.mean, s.std, s.frac_positive), (0.0, 0.0, 0.0));

        let s = distribution_report(&[-5, 18]).unwrap();
        assert_eq!((s.min, s.max), (-5, 18));

        let s = distribution_report(&[1, 2, 3, 4]).unwrap();
        assert_eq!(s.mean, 2.5);

        assert_eq!(distribution_report(&[]), Err(PanasError::EmptyInput));
    }

    #[test]
    fn score_is_monotone_in_items() {
        let base = entry([3, 3, 3, 3, 3, 3, 3, 3, 3, 3]);
        let s0 = score(&base);
        let mut up = base.clone();
        up.items.determined += 1;
        let s1 = score(&up);
        assert_eq!(s1.pa, s0.pa + 1);
        assert_eq!(s1.balance, s0.balance + 1);
        let mut down = base.clone();
        down.items.hostile += 1;
        let s2 = score(&down);
        assert_eq!(s2.balance, s0.balance - 1);
    }
}
