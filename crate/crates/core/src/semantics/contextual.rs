//! Per-occurrence contextual vectors, clustered into sense centers.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::affinity::{negative_squared_euclidean, AffinityPropagation};
use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::surface::strip_accents;

/// Cap on sampled occurrences per word.
pub const MAX_OCCURRENCES: usize = 200;

/// One record of the contextual-vector interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceRecord {
    pub lang: LanguageId,
    pub word: String,
    pub sent_id: u64,
    pub token_index: u32,
    pub vector: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceVectors {
    pub lang: LanguageId,
    pub word: String,
    pub entries: Vec<(u64, u32, Vec<f64>)>,
}

/// Contextual vectors of every word found in one JSON-lines file.
#[derive(Debug, Clone, Default)]
pub struct ContextualVectors {
    pub dim: usize,
    words: HashMap<(LanguageId, String), OccurrenceVectors>,
}

impl ContextualVectors {
    pub fn get(&self, lang: LanguageId, word: &str) -> Option<&OccurrenceVectors> {
        self.words.get(&(lang, word.to_string()))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &OccurrenceVectors> {
        self.words.values()
    }

    pub fn from_records(records: impl IntoIterator<Item = OccurrenceRecord>) -> Result<Self> {
        let mut out = ContextualVectors::default();
        for (idx, rec) in records.into_iter().enumerate() {
            out.push(rec)
                .map_err(|e| Error::Invalid(format!("record {}: {e}", idx + 1)))?;
        }
        Ok(out)
    }

    fn push(&mut self, rec: OccurrenceRecord) -> Result<()> {
        if rec.vector.is_empty() {
            return Err(Error::Invalid("empty vector".into()));
        }
        if self.words.is_empty() {
            self.dim = rec.vector.len();
        } else if rec.vector.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, rec.vector.len()));
        }
        let word = strip_accents(&rec.word);
        let occ = self
            .words
            .entry((rec.lang, word.clone()))
            .or_insert_with(|| OccurrenceVectors {
                lang: rec.lang,
                word,
                entries: Vec::new(),
            });
        if occ.entries.len() == MAX_OCCURRENCES {
            return Err(Error::Invalid(format!(
                "more than {MAX_OCCURRENCES} occurrences for {} {:?}",
                occ.lang, occ.word
            )));
        }
        occ.entries.push((
            rec.sent_id,
            rec.token_index,
            rec.vector.iter().map(|&x| f64::from(x)).collect(),
        ));
        Ok(())
    }
}

/// Reads the JSON-lines occurrence file produced by the exporter.
pub fn load_contextual_vectors(path: &Path) -> Result<ContextualVectors> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = ContextualVectors::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: OccurrenceRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        out.push(rec)
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub lang: LanguageId,
    pub word: String,
    /// Mean of the member vectors of each cluster.
    pub centers: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    /// Cluster of each input occurrence, in input order.
    pub labels: Vec<usize>,
    /// True when clustering did not converge and all occurrences were
    /// merged into one cluster.
    pub fallback: bool,
}

fn mean<'a>(vectors: impl Iterator<Item = &'a Vec<f64>>, dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        n += 1;
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    sum
}

/// Clusters a word's occurrence vectors with Affinity Propagation
/// (negative squared Euclidean similarity, median preference, damping 0.5,
/// 200 iterations, 15-iteration convergence window). Non-convergence
/// yields a single cluster centered on the global mean.
pub fn cluster_occurrences(occ: &OccurrenceVectors) -> Result<ClusterSet> {
    cluster_with(occ, &AffinityPropagation::default())
}

pub fn cluster_with(occ: &OccurrenceVectors, ap: &AffinityPropagation) -> Result<ClusterSet> {
    if occ.entries.is_empty() {
        return Err(Error::EmptyOccurrences);
    }
    let points: Vec<Vec<f64>> = occ.entries.iter().map(|(_, _, v)| v.clone()).collect();
    let n = points.len();
    let dim = points[0].len();
    let clustering = ap.fit(&negative_squared_euclidean(&points), n);

    let (labels, k, fallback) = if clustering.converged && !clustering.exemplars.is_empty() {
        let k = clustering.exemplars.len();
        (clustering.labels, k, false)
    } else {
        (vec![0; n], 1, true)
    };
    let centers = (0..k)
        .map(|c| {
            mean(
                points
                    .iter()
                    .zip(&labels)
                    .filter(|(_, &l)| l == c)
                    .map(|(p, _)| p),
                dim,
            )
        })
        .collect();
    let sizes = (0..k)
        .map(|c| labels.iter().filter(|&&l| l == c).count())
        .collect();
    Ok(ClusterSet {
        lang: occ.lang,
        word: occ.word.clone(),
        centers,
        sizes,
        labels,
        fallback,
    })
}
