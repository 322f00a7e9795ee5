//! Rank correlation between computed scores and human cloze-test results.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::aggregate::IntelligibilityMatrix;
use crate::dli::ChannelConfig;
use crate::error::{Error, Result};
use crate::lang::LanguageId;

pub const DEFAULT_PERMUTATIONS: usize = 100_000;
pub const MIN_PERMUTATIONS: usize = 1000;
pub const DEFAULT_SEED: u64 = 20_240_611;

/// 1-based ranks, ties sharing the average of the ranks they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1 ..= end.
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewObservations(x.len()));
    }
    Ok(())
}

fn rank_correlation(rx: &[f64], ry: &[f64]) -> Result<f64> {
    if rx.iter().all(|&r| r == rx[0]) {
        return Err(Error::ConstantInput("first"));
    }
    pearson(rx, ry).ok_or(Error::ConstantInput("second"))
}

/// Spearman's rho: the Pearson correlation of the average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_inputs(x, y)?;
    rank_correlation(&average_ranks(x), &average_ranks(y))
}

/// One-sided permutation p-value for a positive association:
/// `(1 + #{permutations of y with rho ≥ observed}) / (1 + n_perm)`.
/// Permutation `i` draws from its own ChaCha stream, so the result does not
/// depend on how work is split across threads.
pub fn permutation_p_value(x: &[f64], y: &[f64], n_perm: usize, seed: u64) -> Result<f64> {
    check_inputs(x, y)?;
    if n_perm < MIN_PERMUTATIONS {
        return Err(Error::InsufficientPermutations(n_perm));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let observed = rank_correlation(&rx, &ry)?;
    // Guard against rounding making an equal statistic look smaller.
    let threshold = observed - 1e-12;
    let hits = (0..n_perm as u64)
        .into_par_iter()
        .map_init(
            || ry.clone(),
            |perm, i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                perm.copy_from_slice(&ry);
                perm.shuffle(&mut rng);
                pearson(&rx, perm).is_some_and(|r| r >= threshold)
            },
        )
        .filter(|&hit| hit)
        .count();
    Ok((1 + hits) as f64 / (1 + n_perm) as f64)
}

/// Two-sided p-value from the t approximation with `n − 2` degrees of freedom.
pub fn t_approx_p_value(rho: f64, n: usize) -> f64 {
    if n < 3 {
        return f64::NAN;
    }
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid degrees of freedom");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Human cloze-test accuracies per (speaker, listener) pair, in percent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClozeResults {
    pub scores: BTreeMap<(LanguageId, LanguageId), f64>,
}

impl ClozeResults {
    pub fn insert(&mut self, speaker: LanguageId, listener: LanguageId, score: f64) -> Result<()> {
        if speaker == listener {
            return Err(Error::Invalid(format!(
                "diagonal cloze entry {speaker}-{listener}"
            )));
        }
        if !(0.0..=100.0).contains(&score) {
            return Err(Error::Invalid(format!(
                "cloze score {score} outside [0, 100]"
            )));
        }
        self.scores.insert((speaker, listener), score);
        Ok(())
    }
}

/// Reads a `speaker,listener,score` CSV with a header row.
pub fn load_cloze(path: &Path) -> Result<ClozeResults> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cloze = ClozeResults::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() || (line_no == 1 && line.starts_with("speaker")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let mut row = || -> Result<()> {
            let [speaker, listener, score] = fields[..] else {
                return Err(Error::Invalid(format!(
                    "expected 3 columns, found {}",
                    fields.len()
                )));
            };
            let score: f64 = score
                .parse()
                .map_err(|_| Error::Invalid(format!("bad score {score:?}")))?;
            cloze.insert(LanguageId::new(speaker)?, LanguageId::new(listener)?, score)
        };
        row().map_err(|e| Error::parse(path, line_no, e.to_string()))?;
    }
    Ok(cloze)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub configuration: String,
    pub rho: f64,
    pub p_value: f64,
    pub p_value_t: f64,
    pub n: usize,
    pub n_permutations: usize,
    pub seed: u64,
    /// Matrix pairs without a cloze score, as `speaker-listener`.
    pub dropped: Vec<String>,
    /// Cloze pairs absent from the matrix.
    pub unmatched_cloze: Vec<String>,
}

/// Correlates one channel configuration of `matrix` with `cloze`, over the
/// ordered pairs both contain (sorted by speaker, then listener).
pub fn evaluate_against_cloze(
    matrix: &IntelligibilityMatrix,
    config: ChannelConfig,
    cloze: &ClozeResults,
    n_perm: usize,
    seed: u64,
) -> Result<CorrelationReport> {
    let scores = matrix
        .scores(config)
        .ok_or_else(|| Error::MissingResource(format!("no matrix for {config}")))?;
    let mut computed = Vec::new();
    let mut human = Vec::new();
    let mut dropped = Vec::new();
    for (&(speaker, listener), score) in scores {
        match cloze.scores.get(&(speaker, listener)) {
            Some(&h) => {
                computed.push(score.score);
                human.push(h);
            }
            None => dropped.push(format!("{speaker}-{listener}")),
        }
    }
    let unmatched_cloze: Vec<String> = cloze
        .scores
        .keys()
        .filter(|k| !scores.contains_key(k))
        .map(|(s, l)| format!("{s}-{l}"))
        .collect();
    if !dropped.is_empty() {
        log::warn!(
            "{} matrix pairs have no cloze score: {}",
            dropped.len(),
            dropped.join(", ")
        );
    }
    if computed.len() < 3 {
        return Err(Error::TooFewObservations(computed.len()));
    }
    let rho = spearman(&computed, &human)?;
    let p_value = permutation_p_value(&computed, &human, n_perm, seed)?;
    Ok(CorrelationReport {
        configuration: config.label(),
        rho,
        p_value,
        p_value_t: t_approx_p_value(rho, computed.len()),
        n: computed.len(),
        n_permutations: n_perm,
        seed,
        dropped,
        unmatched_cloze,
    })
}
