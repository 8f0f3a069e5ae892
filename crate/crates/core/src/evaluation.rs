//! Offline evaluation: ranking metrics, forward selection over feature
//! families, hold-out MRR of interest models, and the detection precision
//! sample with its tally.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::interest::{interest_vector, EditHistory, InterestError, InterestMethod};
use crate::matching::PoolEntry;
use crate::ranking::{cross_validate, train_forest, FeatureFamily, ForestConfig, RankingError};
use crate::seeds::derive_seed;
use crate::topics::TopicVector;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("no editor has two or more usable history entries")]
    NoEligibleEditors,
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("pool of {0} is smaller than one stratum")]
    PoolTooSmall(usize),
    #[error("malformed precision sheet line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Ranking(#[from] RankingError),
    #[error(transparent)]
    Interest(#[from] InterestError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    /// Absent when either series is constant.
    pub spearman: Option<f64>,
    pub n: usize,
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    (saa > 0.0 && sbb > 0.0).then(|| (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    (pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / pred.len() as f64).sqrt()
}

pub fn rmse_spearman(pred: &[f64], truth: &[f64]) -> Result<MetricReport, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.len() < 2 {
        return Err(EvalError::TooFewPoints(pred.len()));
    }
    Ok(MetricReport {
        rmse: rmse(pred, truth),
        spearman: spearman(pred, truth),
        n: pred.len(),
    })
}

/// A named group of feature columns added or left out as a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub name: String,
    pub columns: Vec<usize>,
}

/// One set per family present in `families`, in family order.
pub fn family_sets(families: &[FeatureFamily]) -> Vec<FeatureSet> {
    FeatureFamily::ALL
        .iter()
        .filter_map(|f| {
            let columns: Vec<usize> = families
                .iter()
                .enumerate()
                .filter(|(_, g)| *g == f)
                .map(|(i, _)| i)
                .collect();
            (!columns.is_empty()).then(|| FeatureSet {
                name: f.to_string(),
                columns,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub added: String,
    /// Best cross-validated RMSE over the grid with the sets chosen so far.
    pub cv_rmse: f64,
    pub test: MetricReport,
}

fn project(rows: &[Vec<f64>], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect()
}

/// Greedy forward selection over feature sets. Each step adds the set with
/// the lowest cross-validated RMSE on the training rows, then reports
/// held-out metrics of a forest refitted on the chosen sets.
pub fn stepwise_feature_selection(
    sets: &[FeatureSet],
    train: (&[Vec<f64>], &[f64]),
    test: (&[Vec<f64>], &[f64]),
    config: &ForestConfig,
) -> Result<Vec<SelectionStep>, EvalError> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..sets.len()).collect();
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        let mut best: Option<(f64, usize)> = None;
        for (pos, &s) in remaining.iter().enumerate() {
            let mut cols: Vec<usize> = chosen.iter().chain([&s]).flat_map(|&i| sets[i].columns.clone()).collect();
            cols.sort_unstable();
            cols.dedup();
            let cv = cross_validate(&project(train.0, &cols), train.1, config);
            let score = cv.iter().map(|c| c.rmse).fold(f64::INFINITY, f64::min);
            if best.is_none_or(|b| score < b.0) {
                best = Some((score, pos));
            }
        }
        let (cv_rmse, pos) = best.expect("remaining is non-empty");
        chosen.push(remaining.remove(pos));
        let mut cols: Vec<usize> = chosen.iter().flat_map(|&i| sets[i].columns.clone()).collect();
        cols.sort_unstable();
        cols.dedup();
        let names: Vec<String> = cols.iter().map(|c| format!("c{c}")).collect();
        let model = train_forest(&project(train.0, &cols), train.1, &names, config)?;
        let pred = model.predict_rows(&project(test.0, &cols))?;
        steps.push(SelectionStep {
            added: sets[chosen[chosen.len() - 1]].name.clone(),
            cv_rmse,
            test: rmse_spearman(&pred, test.1)?,
        });
    }
    Ok(steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 1000,
            seed: 0,
        }
    }
}

/// Percentile 95% interval of the mean. Resample `r` draws from its own
/// derived seed.
pub fn bootstrap_mean_ci(values: &[f64], config: &BootstrapConfig) -> (f64, f64) {
    let n = values.len();
    let mut means: Vec<f64> = (0..config.resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, r as u64));
            (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let at = |q: f64| means[((q * means.len() as f64) as usize).min(means.len() - 1)];
    (at(0.025), at(0.975))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrrReport {
    pub method: InterestMethod,
    pub w: usize,
    pub mrr: f64,
    pub n_editors: usize,
    pub n_candidates: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bootstrap: BootstrapConfig,
}

impl MrrReport {
    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// Reciprocal rank of each eligible editor's most recent article among all
/// candidates, ranked by closeness to the interest vector built from the rest
/// of the history. Ties with the held-out article do not push it down.
pub fn reciprocal_ranks(
    histories: &BTreeMap<String, EditHistory>,
    topic_vectors: &BTreeMap<String, TopicVector>,
    method: InterestMethod,
    w: usize,
) -> Result<Vec<f64>, EvalError> {
    let candidates: Vec<&TopicVector> = topic_vectors.values().filter(|v| !v.is_zero()).collect();
    let eligible: Vec<(EditHistory, &TopicVector)> = histories
        .values()
        .filter_map(|h| {
            let mut usable = h.clone();
            usable
                .entries
                .retain(|e| topic_vectors.get(&e.title).is_some_and(|v| !v.is_zero()));
            if usable.entries.len() < 2 {
                return None;
            }
            let held = usable.entries.remove(0);
            Some((usable, &topic_vectors[&held.title]))
        })
        .collect();
    if eligible.is_empty() {
        return Err(EvalError::NoEligibleEditors);
    }
    eligible
        .par_iter()
        .map(|(h, held)| {
            let iv = interest_vector(h, topic_vectors, method, w)?;
            let target = iv.values.dot(held);
            let closer = candidates.iter().filter(|c| iv.values.dot(c) > target).count();
            Ok(1.0 / (closer + 1) as f64)
        })
        .collect()
}

pub fn mrr_holdout(
    histories: &BTreeMap<String, EditHistory>,
    topic_vectors: &BTreeMap<String, TopicVector>,
    method: InterestMethod,
    w: usize,
    bootstrap: &BootstrapConfig,
) -> Result<MrrReport, EvalError> {
    let rr = reciprocal_ranks(histories, topic_vectors, method, w)?;
    let (ci_low, ci_high) = bootstrap_mean_ci(&rr, bootstrap);
    Ok(MrrReport {
        method,
        w,
        mrr: rr.iter().sum::<f64>() / rr.len() as f64,
        n_editors: rr.len(),
        n_candidates: topic_vectors.values().filter(|v| !v.is_zero()).count(),
        ci_low,
        ci_high,
        bootstrap: *bootstrap,
    })
}

/// Expected reciprocal rank of a uniformly random ranking: `H_n / n`.
pub fn random_mrr(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum::<f64>() / n as f64
}

pub fn mrr_sweep_tsv(reports: &[MrrReport]) -> String {
    let mut s = String::from("method\tw\tmrr\tci_low\tci_high\tn_editors\n");
    for r in reports {
        writeln!(s, "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}", r.method, r.w, r.mrr, r.ci_low, r.ci_high, r.n_editors).unwrap();
    }
    s
}

/// First ranks of the sampled windows; each window holds `WINDOW` ranks.
pub const PRECISION_STRATA: [usize; 5] = [1, 101, 1_001, 10_001, 100_001];
pub const WINDOW: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRow {
    pub stratum: usize,
    pub rank: usize,
    pub concept_id: String,
    pub source_title: String,
    pub y_pred: f64,
}

/// Rows at the fixed rank windows of an importance-sorted pool; windows past
/// the end of the pool are cut short or dropped.
pub fn precision_sample(pool: &[PoolEntry]) -> Result<Vec<PrecisionRow>, EvalError> {
    if pool.is_empty() {
        return Err(EvalError::EmptyPool);
    }
    if pool.len() < WINDOW {
        return Err(EvalError::PoolTooSmall(pool.len()));
    }
    let mut rows = Vec::new();
    for &start in &PRECISION_STRATA {
        for rank in start..(start + WINDOW).min(pool.len() + 1) {
            let p = &pool[rank - 1];
            rows.push(PrecisionRow {
                stratum: start,
                rank,
                concept_id: p.concept_id.clone(),
                source_title: p.source_title.clone(),
                y_pred: p.y_pred,
            });
        }
    }
    Ok(rows)
}

pub fn precision_sheet_tsv(rows: &[PrecisionRow]) -> String {
    let mut s = String::from("stratum\trank\tconcept_id\tsource_title\ty_pred\tstrict\tlenient\n");
    for r in rows {
        writeln!(s, "{}\t{}\t{}\t{}\t{:.6}\t\t", r.stratum, r.rank, r.concept_id, r.source_title, r.y_pred).unwrap();
    }
    s
}

/// Prior of the Beta posterior used for precision intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaPrior {
    /// Beta(1, 1).
    Uniform,
    /// Beta(1/2, 1/2).
    Jeffreys,
}

impl BetaPrior {
    fn pseudo_count(self) -> f64 {
        match self {
            BetaPrior::Uniform => 1.0,
            BetaPrior::Jeffreys => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionEstimate {
    pub correct: usize,
    pub n: usize,
    pub precision: f64,
    /// Equal-tailed 95% credible interval.
    pub low: f64,
    pub high: f64,
}

pub fn precision_interval(correct: usize, n: usize, prior: BetaPrior) -> PrecisionEstimate {
    let a = prior.pseudo_count();
    let beta = Beta::new(correct as f64 + a, (n - correct) as f64 + a).expect("positive shape parameters");
    PrecisionEstimate {
        correct,
        n,
        precision: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        low: beta.inverse_cdf(0.025),
        high: beta.inverse_cdf(0.975),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumTally {
    pub stratum: usize,
    pub strict: PrecisionEstimate,
    pub lenient: PrecisionEstimate,
}

fn parse_label(s: &str) -> Option<Option<bool>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" => Some(None),
        "1" | "y" | "yes" | "true" => Some(Some(true)),
        "0" | "n" | "no" | "false" => Some(Some(false)),
        _ => None,
    }
}

/// Per-stratum precision of a labelled sheet. Blank labels are skipped.
pub fn tally_precision(sheet: &str, prior: BetaPrior) -> Result<Vec<StratumTally>, EvalError> {
    let mut counts: BTreeMap<usize, [usize; 4]> = BTreeMap::new();
    for (i, line) in sheet.lines().enumerate().skip(1) {
        let bad = |reason: &str| EvalError::Malformed {
            line: i + 1,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(bad("expected 7 columns"));
        }
        let stratum: usize = f[0].parse().map_err(|_| bad("bad stratum"))?;
        let c = counts.entry(stratum).or_default();
        for (slot, field) in [(0, f[5]), (2, f[6])] {
            match parse_label(field).ok_or_else(|| bad("label must be 0/1, yes/no or blank"))? {
                Some(ok) => {
                    c[slot] += usize::from(ok);
                    c[slot + 1] += 1;
                }
                None => {}
            }
        }
    }
    Ok(counts
        .into_iter()
        .map(|(stratum, c)| StratumTally {
            stratum,
            strict: precision_interval(c[0], c[1], prior),
            lenient: precision_interval(c[2], c[3], prior),
        })
        .collect())
}
