//! ROC AUC for relative comparison, Pearson correlation for absolute
//! prediction, and within-viewpoint pair sampling.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::PropertyKind;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("need at least one positive and one negative label")]
    SingleClass,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("log-domain correlation needs positive values")]
    NonPositive,
    #[error("non-finite value in input")]
    NonFinite,
    #[error("no viewpoint group has two or more samples")]
    InsufficientSamples,
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Computed from midranks (Mann–Whitney U).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(MetricsError::NonFinite);
    }
    let positives = labels.iter().filter(|l| **l).count() as u64;
    let negatives = labels.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the positive rank sum stays integral under midranks.
    let mut twice_rank_sum: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1, midrank (i + j + 2) / 2
        let twice_mid = (i + j + 2) as u64;
        let pos_in_tie = order[i..=j].iter().filter(|&&k| labels[k]).count() as u64;
        twice_rank_sum += twice_mid * pos_in_tie;
        i = j + 1;
    }
    let twice_u = twice_rank_sum - positives * (positives + 1);
    Ok(twice_u as f64 / (2 * positives * negatives) as f64)
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(MetricsError::TooFewSamples(a.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    Ok(())
}

/// Centered Pearson correlation coefficient.
pub fn pearson(pred: &[f64], gt: &[f64]) -> Result<f64, MetricsError> {
    check_pair(pred, gt)?;
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mg = gt.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (p, g) in pred.iter().zip(gt) {
        let (dp, dg) = (p - mp, g - mg);
        sxy += dp * dg;
        sxx += dp * dp;
        syy += dg * dg;
    }
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(MetricsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of natural logs.
pub fn pearson_log(pred: &[f64], gt: &[f64]) -> Result<f64, MetricsError> {
    check_pair(pred, gt)?;
    if pred.iter().chain(gt).any(|v| !(*v > 0.0)) {
        return Err(MetricsError::NonPositive);
    }
    let lp: Vec<f64> = pred.iter().map(|v| v.ln()).collect();
    let lg: Vec<f64> = gt.iter().map(|v| v.ln()).collect();
    pearson(&lp, &lg)
}

/// A sample eligible for relative comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewpointSample {
    pub group: u64,
    pub truth: f64,
}

/// Ordered pair of sample indices; `label` is true when the first sample's
/// true value exceeds the second's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativePair {
    pub first: usize,
    pub second: usize,
    pub label: bool,
}

/// Pairs samples only within their viewpoint group.
///
/// All `m·(m−1)` ordered pairs of every group are enumerated (groups in
/// first-appearance order). With `max_pairs` set, that many are drawn
/// without replacement using a ChaCha8 stream seeded with `seed` and kept in
/// enumeration order.
pub fn build_relative_pairs(
    samples: &[ViewpointSample],
    max_pairs: Option<usize>,
    seed: u64,
) -> Result<Vec<RelativePair>, MetricsError> {
    let mut groups: Vec<(u64, Vec<usize>)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == s.group) {
            Some((_, members)) => members.push(i),
            None => groups.push((s.group, vec![i])),
        }
    }
    let mut all = Vec::new();
    for (_, members) in &groups {
        for &a in members {
            for &b in members {
                if a != b {
                    all.push(RelativePair {
                        first: a,
                        second: b,
                        label: samples[a].truth > samples[b].truth,
                    });
                }
            }
        }
    }
    if all.is_empty() {
        return Err(MetricsError::InsufficientSamples);
    }
    match max_pairs {
        Some(k) if k < all.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = sample(&mut rng, all.len(), k).into_vec();
            picked.sort_unstable();
            Ok(picked.into_iter().map(|i| all[i]).collect())
        }
        _ => Ok(all),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    RocAuc,
    Pearson,
    PearsonLog,
}

/// One metric on one split, with the raw pairs behind it.
///
/// For AUC the pairs are `(score, label)`; for correlations
/// `(prediction, ground truth)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub property: PropertyKind,
    pub split: String,
    pub metric: MetricKind,
    pub value: f64,
    pub sample_count: usize,
    pub pairs: Vec<(f64, f64)>,
}

impl EvalReport {
    pub fn new(
        property: PropertyKind,
        split: impl Into<String>,
        metric: MetricKind,
        pairs: Vec<(f64, f64)>,
    ) -> Result<Self, MetricsError> {
        if pairs.len() < 2 {
            return Err(MetricsError::TooFewSamples(pairs.len()));
        }
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let value = match metric {
            MetricKind::RocAuc => {
                let labels: Vec<bool> = b.iter().map(|l| *l > 0.5).collect();
                roc_auc(&a, &labels)?
            }
            MetricKind::Pearson => pearson(&a, &b)?,
            MetricKind::PearsonLog => pearson_log(&a, &b)?,
        };
        Ok(Self {
            property,
            split: split.into(),
            metric,
            value,
            sample_count: pairs.len(),
            pairs,
        })
    }
}
