use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::matrix::IntelligibilityMatrix;
use super::pairsim::{ordered, PairSimTable};
use super::{sentence_score, CorpusAccumulator, DirectionalScore, SentenceTally};
use crate::corpus::{
    match_occurrences, CorpusStats, MatchedOccurrence, ParallelCorpus, SentencePair,
    SentenceProcessor, Side, SideProcessor, StopWords,
};
use crate::dli::ChannelConfig;
use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::lexicon::Lexicon;

/// A sentence-aligned corpus for one language pair: line `i` of `path_a`
/// translates line `i` of `path_b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSource {
    pub lang_a: LanguageId,
    pub lang_b: LanguageId,
    pub path_a: PathBuf,
    pub path_b: PathBuf,
}

/// Shared read-only inputs of a scoring run.
#[derive(Debug, Clone, Copy)]
pub struct PipelineContext<'a> {
    pub lexicon: &'a Lexicon,
    pub sims: &'a PairSimTable,
    pub stopwords: &'a HashMap<LanguageId, StopWords>,
    pub configs: &'a [ChannelConfig],
    pub pool: &'a rayon::ThreadPool,
    pub batch_size: usize,
}

/// Everything one sentence pair contributes to a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceResult {
    pub stats: CorpusStats,
    pub occurrences: Vec<MatchedOccurrence>,
    /// Per configuration, tallies for side A and side B as speaker.
    pub tallies: Vec<[SentenceTally; 2]>,
}

pub fn score_sentence_pair(
    sp: &SentencePair,
    lexicon: &Lexicon,
    sims: &PairSimTable,
    configs: &[ChannelConfig],
) -> SentenceResult {
    let occurrences = match_occurrences(sp, lexicon);
    let mut stats = CorpusStats::default();
    stats.add(sp, &occurrences);
    let tallies = configs
        .iter()
        .map(|&c| {
            [
                sentence_score(sp, Side::A, &occurrences, sims, c),
                sentence_score(sp, Side::B, &occurrences, sims, c),
            ]
        })
        .collect();
    SentenceResult {
        stats,
        occurrences,
        tallies,
    }
}

/// Results of one corpus: its statistics and both directions for every
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRun {
    pub lang_a: LanguageId,
    pub lang_b: LanguageId,
    pub stats: CorpusStats,
    pub scores: Vec<DirectionalScore>,
}

pub fn side_processor(
    stopwords: &HashMap<LanguageId, StopWords>,
    lang: LanguageId,
) -> Result<SideProcessor> {
    let sw = stopwords
        .get(&lang)
        .ok_or_else(|| Error::MissingResource(format!("stop words for {lang}")))?;
    Ok(SideProcessor::new(lang, sw.clone()))
}

/// Streams a corpus once, accumulating statistics and directional scores
/// in corpus order.
pub fn process_corpus(source: &CorpusSource, ctx: &PipelineContext) -> Result<CorpusRun> {
    let corpus = ParallelCorpus::open(&source.path_a, &source.path_b)?;
    let processor = SentenceProcessor::new(
        side_processor(ctx.stopwords, source.lang_a)?,
        side_processor(ctx.stopwords, source.lang_b)?,
    );
    let mut stats = CorpusStats::default();
    let mut acc = vec![[CorpusAccumulator::default(); 2]; ctx.configs.len()];
    corpus.map_batches(
        &processor,
        ctx.pool,
        ctx.batch_size,
        |sp, _, _| score_sentence_pair(&sp, ctx.lexicon, ctx.sims, ctx.configs),
        |r| {
            stats.merge(&r.stats);
            for (a, t) in acc.iter_mut().zip(&r.tallies) {
                a[0].add(&t[0]);
                a[1].add(&t[1]);
            }
        },
    )?;
    if stats.n_sentences == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut scores = Vec::with_capacity(2 * ctx.configs.len());
    for (a, &config) in acc.iter().zip(ctx.configs) {
        scores.push(a[0].finish(source.lang_a, source.lang_b, config)?);
        scores.push(a[1].finish(source.lang_b, source.lang_a, config)?);
    }
    Ok(CorpusRun {
        lang_a: source.lang_a,
        lang_b: source.lang_b,
        stats,
        scores,
    })
}

/// Finds the corpus of every unordered pair of `languages` and scores both
/// directions. Fails before reading any corpus if one is missing.
pub fn build_matrix(
    languages: &[LanguageId],
    sources: &[CorpusSource],
    ctx: &PipelineContext,
) -> Result<(IntelligibilityMatrix, Vec<CorpusRun>)> {
    let mut langs = languages.to_vec();
    langs.sort();
    langs.dedup();
    let by_pair: HashMap<_, _> = sources
        .iter()
        .map(|s| (ordered(s.lang_a, s.lang_b), s))
        .collect();
    let mut selected = Vec::new();
    for (i, &a) in langs.iter().enumerate() {
        for &b in &langs[i + 1..] {
            let source = by_pair
                .get(&(a, b))
                .ok_or_else(|| Error::MissingResource(format!("parallel corpus for {a}-{b}")))?;
            selected.push(*source);
        }
    }
    for lang in &langs {
        if !ctx.stopwords.contains_key(lang) {
            return Err(Error::MissingResource(format!("stop words for {lang}")));
        }
    }
    let runs = selected
        .into_iter()
        .map(|s| process_corpus(s, ctx))
        .collect::<Result<Vec<_>>>()?;
    let matrix = IntelligibilityMatrix::from_runs(&langs, ctx.configs, &runs)?;
    Ok((matrix, runs))
}
