//! Semantic similarity from static and contextual embeddings.

pub mod affinity;
pub mod contextual;
pub mod embeddings;

pub use affinity::{AffinityPropagation, Clustering};
pub use contextual::{
    cluster_occurrences, load_contextual_vectors, ClusterSet, ContextualVectors, OccurrenceRecord,
    OccurrenceVectors, MAX_OCCURRENCES,
};
pub use embeddings::{load_static_embeddings, Coverage, EmbeddingStore, Resolution, Resolved};

use crate::error::{Error, Result};

/// Raw cosine of the angle between two vectors, in [-1, 1].
pub fn cosine<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b): (f64, f64) = (a.into(), b.into());
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine similarity clamped to [0, 1]; negative cosines mean no relation.
pub fn cosine_similarity<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64> {
    Ok(cosine(u, v)?.max(0.0))
}

/// Mean cosine over all (center of `a`, center of `b`) pairs, clamped to
/// [0, 1].
pub fn contextual_similarity(a: &ClusterSet, b: &ClusterSet) -> Result<f64> {
    if a.centers.is_empty() || b.centers.is_empty() {
        return Err(Error::EmptyOccurrences);
    }
    let mut sum = 0.0;
    for ca in &a.centers {
        for cb in &b.centers {
            sum += cosine(ca, cb)?;
        }
    }
    let mean = sum / (a.centers.len() * b.centers.len()) as f64;
    Ok(mean.clamp(0.0, 1.0))
}

/// The candidate word (from the target store) closest in meaning to `word`
/// from the source store, with its cosine. Ties go to the lexicographically
/// smallest candidate; candidates without a vector are skipped.
pub fn nearest_semantic_neighbor<S: AsRef<str>>(
    source: &EmbeddingStore,
    word: &str,
    target: &EmbeddingStore,
    candidates: &[S],
) -> Result<(String, f64)> {
    let query = source.resolve(word).ok_or_else(|| Error::Unresolvable {
        lang: source.lang().to_string(),
        word: word.to_string(),
    })?;
    let mut best: Option<(String, f64)> = None;
    for cand in candidates {
        let cand = cand.as_ref();
        let Some(resolved) = target.resolve(cand) else {
            continue;
        };
        let score = match cosine(query.vector, resolved.vector) {
            Ok(s) => s,
            Err(Error::ZeroNorm) => continue,
            Err(e) => return Err(e),
        };
        let better = match &best {
            None => true,
            Some((w, s)) => score > *s || (score == *s && cand < w.as_str()),
        };
        if better {
            best = Some((cand.to_string(), score));
        }
    }
    best.ok_or(Error::NoCandidates)
}
