//! Sentence- and corpus-level directional intelligibility scores.
//!
//! A sentence in the speaker language scores the sum of the indices of its
//! related tokens divided by its number of content tokens. The corpus score
//! pools all sentences as one text: total index mass over total content
//! tokens, not the mean of sentence scores.

mod matrix;
mod pairsim;
mod pipeline;

pub use matrix::{AsymmetryEntry, IntelligibilityMatrix, PhoneticExcess, MATRIX_CSV_HEADER};
pub use pairsim::{
    build_pair_similarities, ContextualCoverage, CoverageReport, PairSimResources, PairSimTable,
};
pub use pipeline::{
    build_matrix, process_corpus, score_sentence_pair, side_processor, CorpusRun, CorpusSource,
    PipelineContext, SentenceResult,
};

use serde::{Deserialize, Serialize};

use crate::corpus::{MatchedOccurrence, SentencePair, Side};
use crate::dli::{ChannelConfig, SemanticChannel, SurfaceChannel};
use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::lexicon::PairId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenScore {
    pub value: f64,
    /// False when none of the token's pairs has data for the configuration.
    pub scored: bool,
}

/// Index of a token matched by `pairs`: the largest index among pairs that
/// have data for `config`.
pub fn token_index(pairs: &[PairId], sims: &PairSimTable, config: ChannelConfig) -> TokenScore {
    pairs
        .iter()
        .filter_map(|&id| sims.get(id).and_then(|p| p.dli(config)))
        .fold(
            TokenScore {
                value: 0.0,
                scored: false,
            },
            |acc, d| TokenScore {
                value: if acc.scored { acc.value.max(d) } else { d },
                scored: true,
            },
        )
}

/// Per-sentence sums for one side and one channel configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SentenceTally {
    pub index_sum: f64,
    pub n_content: u64,
    pub n_related: u64,
    pub n_scored: u64,
}

impl SentenceTally {
    /// The sentence score; 0 for a sentence without content tokens.
    pub fn score(&self) -> f64 {
        if self.n_content == 0 {
            0.0
        } else {
            self.index_sum / self.n_content as f64
        }
    }
}

/// Scores the `speaker` side of a sentence pair. `occurrences` are the
/// matches of that sentence pair, grouped by token as produced by
/// [`crate::corpus::match_occurrences`].
pub fn sentence_score(
    sp: &SentencePair,
    speaker: Side,
    occurrences: &[MatchedOccurrence],
    sims: &PairSimTable,
    config: ChannelConfig,
) -> SentenceTally {
    let mut tally = SentenceTally {
        n_content: sp.tokens(speaker).len() as u64,
        ..Default::default()
    };
    let mut pairs = Vec::new();
    for group in occurrences
        .chunk_by(|x, y| (x.side, x.token_index) == (y.side, y.token_index))
        .filter(|g| g[0].side == speaker)
    {
        pairs.clear();
        pairs.extend(group.iter().map(|o| o.pair_id));
        let t = token_index(&pairs, sims, config);
        tally.n_related += 1;
        if t.scored {
            tally.n_scored += 1;
            tally.index_sum += t.value;
        }
    }
    tally
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalScore {
    pub speaker: LanguageId,
    pub listener: LanguageId,
    pub surface_channel: SurfaceChannel,
    pub semantic_channel: SemanticChannel,
    /// Pooled score in [0, 1].
    pub score: f64,
    pub n_sentences: u64,
    /// Sentences without content tokens on the speaker side.
    pub n_empty_sentences: u64,
    pub n_content_tokens: u64,
    pub n_related_tokens: u64,
    pub n_scored_tokens: u64,
}

impl DirectionalScore {
    pub fn score_pct(&self) -> f64 {
        self.score * 100.0
    }

    pub fn config(&self) -> ChannelConfig {
        ChannelConfig::new(self.surface_channel, self.semantic_channel)
    }
}

/// Running single-text pooling of sentence tallies, summed in the order
/// they are added.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CorpusAccumulator {
    pub index_sum: f64,
    pub n_sentences: u64,
    pub n_empty_sentences: u64,
    pub n_content: u64,
    pub n_related: u64,
    pub n_scored: u64,
}

impl CorpusAccumulator {
    pub fn add(&mut self, t: &SentenceTally) {
        self.n_sentences += 1;
        if t.n_content == 0 {
            self.n_empty_sentences += 1;
            return;
        }
        self.index_sum += t.index_sum;
        self.n_content += t.n_content;
        self.n_related += t.n_related;
        self.n_scored += t.n_scored;
    }

    pub fn finish(
        &self,
        speaker: LanguageId,
        listener: LanguageId,
        config: ChannelConfig,
    ) -> Result<DirectionalScore> {
        if self.n_sentences == 0 || self.n_content == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(DirectionalScore {
            speaker,
            listener,
            surface_channel: config.surface,
            semantic_channel: config.semantic,
            score: self.index_sum / self.n_content as f64,
            n_sentences: self.n_sentences,
            n_empty_sentences: self.n_empty_sentences,
            n_content_tokens: self.n_content,
            n_related_tokens: self.n_related,
            n_scored_tokens: self.n_scored,
        })
    }
}

/// Pools sentence tallies of one direction and configuration into a
/// corpus-level score.
pub fn corpus_score<'a>(
    tallies: impl IntoIterator<Item = &'a SentenceTally>,
    speaker: LanguageId,
    listener: LanguageId,
    config: ChannelConfig,
) -> Result<DirectionalScore> {
    let mut acc = CorpusAccumulator::default();
    tallies.into_iter().for_each(|t| acc.add(t));
    acc.finish(speaker, listener, config)
}
