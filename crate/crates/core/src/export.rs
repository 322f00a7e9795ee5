//! Occurrence requests for the external contextual-vector exporter.
//!
//! For one parallel corpus, every matched occurrence of a lexicon word is a
//! candidate; at most [`MAX_OCCURRENCES`] are kept per (language, word). The
//! kept set is the one with the smallest seeded hash keys, so it does not
//! depend on the order or batching of the corpus.

use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregate::CorpusSource;
use crate::corpus::{match_occurrences, ParallelCorpus, SentenceProcessor, Side, StopWords};
use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::lexicon::Lexicon;
pub use crate::semantics::MAX_OCCURRENCES;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExportRequest {
    pub lang: LanguageId,
    pub word: String,
    pub sent_id: u64,
    /// Index among the content tokens of the sentence.
    pub token_index: u32,
    pub sentence: String,
}

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

fn sample_key(seed: u64, r: &ExportRequest) -> u64 {
    let mut h = fnv1a(&seed.to_le_bytes(), 0xcbf2_9ce4_8422_2325);
    h = fnv1a(r.lang.as_str().as_bytes(), h);
    h = fnv1a(r.word.as_bytes(), h);
    h = fnv1a(&[0xff], h);
    h = fnv1a(&r.sent_id.to_le_bytes(), h);
    fnv1a(&r.token_index.to_le_bytes(), h)
}

/// Samples occurrence requests from one corpus. Output is sorted by
/// language, word, sentence and token.
pub fn collect_export_requests(
    source: &CorpusSource,
    lexicon: &Lexicon,
    stopwords: &HashMap<LanguageId, StopWords>,
    pool: &rayon::ThreadPool,
    batch_size: usize,
    cap: usize,
    seed: u64,
) -> Result<Vec<ExportRequest>> {
    let corpus = ParallelCorpus::open(&source.path_a, &source.path_b)?;
    let processor = SentenceProcessor::new(
        crate::aggregate::side_processor(stopwords, source.lang_a)?,
        crate::aggregate::side_processor(stopwords, source.lang_b)?,
    );
    // Max-heap on the sample key: the top is the first to be evicted.
    let mut kept: HashMap<(LanguageId, String), BinaryHeap<(u64, ExportRequest)>> = HashMap::new();
    corpus.map_batches(
        &processor,
        pool,
        batch_size,
        |sp, line_a, line_b| {
            let mut out: Vec<ExportRequest> = match_occurrences(&sp, lexicon)
                .into_iter()
                .filter_map(|o| {
                    let lang = sp.lang(o.side);
                    let word = lexicon.pair(o.pair_id).word_for(lang)?.to_string();
                    let sentence = match o.side {
                        Side::A => line_a,
                        Side::B => line_b,
                    };
                    Some(ExportRequest {
                        lang,
                        word,
                        sent_id: o.sent_id,
                        token_index: o.token_index,
                        sentence: sentence.to_string(),
                    })
                })
                .collect();
            out.sort();
            out.dedup();
            out
        },
        |requests| {
            for r in requests {
                let key = sample_key(seed, &r);
                let heap = kept.entry((r.lang, r.word.clone())).or_default();
                if heap.len() < cap {
                    heap.push((key, r));
                } else if heap.peek().is_some_and(|(top, _)| key < *top) {
                    heap.pop();
                    heap.push((key, r));
                }
            }
        },
    )?;
    let mut out: Vec<ExportRequest> = kept
        .into_values()
        .flat_map(|h| h.into_iter().map(|(_, r)| r))
        .collect();
    out.sort();
    Ok(out)
}

/// Counts per (language, word).
pub fn request_counts(requests: &[ExportRequest]) -> BTreeMap<(LanguageId, String), usize> {
    let mut counts = BTreeMap::new();
    for r in requests {
        *counts.entry((r.lang, r.word.clone())).or_insert(0) += 1;
    }
    counts
}

pub fn write_export_requests<W: Write>(requests: &[ExportRequest], mut out: W) -> io::Result<()> {
    for r in requests {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_export_requests(path: &Path) -> Result<Vec<ExportRequest>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: ExportRequest =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        if r.sentence.trim().is_empty() {
            return Err(Error::parse(path, idx + 1, "empty sentence"));
        }
        out.push(r);
    }
    Ok(out)
}
