use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dli::{ChannelConfig, PairSimilarity};
use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::lexicon::{Lexicon, PairId};
use crate::semantics::{
    cluster_occurrences, contextual_similarity, cosine_similarity, ClusterSet, ContextualVectors,
    Coverage, EmbeddingStore,
};
use crate::surface::{orthographic_similarity, PhoneticLexicon};

/// Optional resources backing the non-orthographic channels. Contextual
/// vectors are keyed by language pair with the smaller code first.
#[derive(Debug, Default, Clone, Copy)]
pub struct PairSimResources<'a> {
    pub static_vectors: Option<&'a HashMap<LanguageId, EmbeddingStore>>,
    pub phonetic: Option<&'a PhoneticLexicon>,
    pub contextual: Option<&'a HashMap<(LanguageId, LanguageId), ContextualVectors>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextualCoverage {
    pub covered: usize,
    pub missing: usize,
    /// Words whose clustering did not converge.
    pub fallback_clusterings: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Per language, distinct lexicon words found in the static vectors.
    pub static_vectors: BTreeMap<String, Coverage>,
    /// Pairs with a transcription for both words / without.
    pub phonetic_pairs: usize,
    pub phonetic_skipped: usize,
    /// Per language pair (`es-ro`), pair words with contextual vectors.
    pub contextual: BTreeMap<String, ContextualCoverage>,
}

/// Channel scores of every lexicon pair, indexed by pair id.
#[derive(Debug, Clone, Default)]
pub struct PairSimTable {
    sims: Vec<Option<PairSimilarity>>,
    pub coverage: CoverageReport,
}

impl PairSimTable {
    pub fn from_similarities(sims: impl IntoIterator<Item = PairSimilarity>) -> Self {
        let mut table = PairSimTable::default();
        for s in sims {
            let idx = s.pair_id.index();
            if table.sims.len() <= idx {
                table.sims.resize(idx + 1, None);
            }
            table.sims[idx] = Some(s);
        }
        table
    }

    pub fn get(&self, id: PairId) -> Option<&PairSimilarity> {
        self.sims.get(id.index()).and_then(Option::as_ref)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PairSimilarity> {
        self.sims.iter().flatten()
    }

    pub const CSV_HEADER: &'static str = "pair_id,lang_a,lang_b,word_a,word_b,relation,surface_channel,semantic_channel,s_l,s_s,d_li,available";

    /// One row per pair and configuration; unavailable scores are empty.
    pub fn write_csv<W: Write>(
        &self,
        lexicon: &Lexicon,
        configs: &[ChannelConfig],
        mut out: W,
    ) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        for sim in self.iter() {
            let p = lexicon.pair(sim.pair_id);
            for config in configs {
                let s_l = sim.surface(config.surface);
                let s_s = sim.semantic(config.semantic);
                let d = sim.dli(*config);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    p.pair_id,
                    p.lang_a,
                    p.lang_b,
                    p.word_a,
                    p.word_b,
                    p.relation.as_str(),
                    config.surface.as_str(),
                    config.semantic.as_str(),
                    fmt(s_l),
                    fmt(s_s),
                    fmt(d),
                    d.is_some()
                )?;
            }
        }
        Ok(())
    }
}

pub(crate) fn ordered(a: LanguageId, b: LanguageId) -> (LanguageId, LanguageId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

type WordKey = (LanguageId, String);
type ResolvedVectors<'s> = HashMap<WordKey, Option<&'s [f32]>>;

fn resolve_static<'s>(
    stores: &'s HashMap<LanguageId, EmbeddingStore>,
    lexicon: &Lexicon,
) -> Result<(ResolvedVectors<'s>, BTreeMap<String, Coverage>)> {
    let words = lexicon.words();
    for (lang, _) in &words {
        if !stores.contains_key(lang) {
            return Err(Error::MissingResource(format!(
                "static embeddings for {lang}"
            )));
        }
    }
    let resolved: Vec<_> = words
        .into_par_iter()
        .map(|(lang, word)| {
            let r = stores[&lang]
                .resolve(&word)
                .map(|r| (r.vector, r.resolution));
            ((lang, word), r)
        })
        .collect();
    let mut coverage: BTreeMap<String, Coverage> = BTreeMap::new();
    let mut map = HashMap::with_capacity(resolved.len());
    for ((lang, word), r) in resolved {
        coverage
            .entry(lang.to_string())
            .or_default()
            .record(r.map(|(_, res)| res));
        map.insert((lang, word), r.map(|(v, _)| v));
    }
    Ok((map, coverage))
}

type ClusterMap = HashMap<(LanguageId, LanguageId), HashMap<(LanguageId, String), ClusterSet>>;

fn cluster_contextual(
    contextual: &HashMap<(LanguageId, LanguageId), ContextualVectors>,
    lexicon: &Lexicon,
) -> Result<ClusterMap> {
    let mut out = ClusterMap::new();
    let mut keys: Vec<_> = contextual.keys().copied().collect();
    keys.sort();
    for key in keys {
        let vectors = &contextual[&key];
        // Only words of pairs between these two languages are needed.
        let mut needed: Vec<(LanguageId, String)> = lexicon
            .pairs_for_language_pair(key.0, key.1)
            .into_iter()
            .flat_map(|p| [(p.lang_a, p.word_a), (p.lang_b, p.word_b)])
            .filter(|(l, w)| vectors.get(*l, w).is_some())
            .collect();
        needed.sort();
        needed.dedup();
        let clusters = needed
            .into_par_iter()
            .map(|(lang, word)| {
                let occ = vectors.get(lang, &word).expect("filtered above");
                cluster_occurrences(occ).map(|c| ((lang, word), c))
            })
            .collect::<Result<HashMap<_, _>>>()?;
        out.insert(key, clusters);
    }
    Ok(out)
}

/// Computes every channel available for every lexicon pair. Orthographic
/// similarity is always present; other channels are `None` when their
/// resource is absent or lacks either word.
pub fn build_pair_similarities(lexicon: &Lexicon, res: &PairSimResources) -> Result<PairSimTable> {
    let (static_map, static_coverage) = match res.static_vectors {
        Some(stores) => {
            let (m, c) = resolve_static(stores, lexicon)?;
            (Some(m), c)
        }
        None => (None, BTreeMap::new()),
    };
    let clusters = match res.contextual {
        Some(ctx) => Some(cluster_contextual(ctx, lexicon)?),
        None => None,
    };

    let sims: Vec<PairSimilarity> = lexicon
        .pairs()
        .par_iter()
        .map(|p| {
            let s_l_orthographic = orthographic_similarity(&p.word_a, &p.word_b).ok();
            let s_l_phonetic = res
                .phonetic
                .and_then(|ph| ph.similarity(p.lang_a, &p.word_a, p.lang_b, &p.word_b));
            let s_s_static = static_map.as_ref().and_then(|m| {
                let u = m.get(&(p.lang_a, p.word_a.clone())).copied().flatten()?;
                let v = m.get(&(p.lang_b, p.word_b.clone())).copied().flatten()?;
                cosine_similarity(u, v).ok()
            });
            let s_s_contextual = clusters.as_ref().and_then(|c| {
                let by_word = c.get(&ordered(p.lang_a, p.lang_b))?;
                let ca = by_word.get(&(p.lang_a, p.word_a.clone()))?;
                let cb = by_word.get(&(p.lang_b, p.word_b.clone()))?;
                contextual_similarity(ca, cb).ok()
            });
            PairSimilarity {
                pair_id: p.pair_id,
                s_l_orthographic,
                s_l_phonetic,
                s_s_static,
                s_s_contextual,
            }
        })
        .collect();

    let mut coverage = CoverageReport {
        static_vectors: static_coverage,
        ..Default::default()
    };
    if res.phonetic.is_some() {
        coverage.phonetic_pairs = sims.iter().filter(|s| s.s_l_phonetic.is_some()).count();
        coverage.phonetic_skipped = sims.len() - coverage.phonetic_pairs;
    }
    if let (Some(ctx), Some(clusters)) = (res.contextual, &clusters) {
        for key in ctx.keys() {
            let by_word = &clusters[key];
            let mut words: Vec<(LanguageId, String)> = lexicon
                .pairs_for_language_pair(key.0, key.1)
                .into_iter()
                .flat_map(|p| [(p.lang_a, p.word_a), (p.lang_b, p.word_b)])
                .collect();
            words.sort();
            words.dedup();
            let covered = words.iter().filter(|w| by_word.contains_key(*w)).count();
            coverage.contextual.insert(
                format!("{}-{}", key.0, key.1),
                ContextualCoverage {
                    covered,
                    missing: words.len() - covered,
                    fallback_clusterings: by_word.values().filter(|c| c.fallback).count(),
                },
            );
        }
    }

    let mut table = PairSimTable::from_similarities(sims);
    table.coverage = coverage;
    Ok(table)
}
