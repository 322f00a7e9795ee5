//! Parallel corpus ingestion: tokenization, stop-word removal, stemming and
//! matching of tokens against the lexicon.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::lexicon::{Lexicon, PairId};
use crate::stem::Stemmer;
use crate::surface::strip_accents;

/// Sentence pairs handed to workers at a time when processing a corpus.
pub const DEFAULT_BATCH_SIZE: usize = 4096;

fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}' | '\u{2010}' | '\u{2011}')
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || unicode_normalization::char::is_combining_mark(c)
}

/// Token spans as `(char offset, byte range)`. A token is a maximal run of
/// letters, possibly joined by a single hyphen or apostrophe between two
/// letters. Combining marks continue a word but never start one.
fn token_spans(text: &str) -> Vec<(usize, std::ops::Range<usize>)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphabetic() {
            i += 1;
            continue;
        }
        let start = i;
        let mut end = i + 1;
        loop {
            if end < chars.len() && is_word_char(chars[end].1) {
                end += 1;
            } else if end + 1 < chars.len()
                && is_joiner(chars[end].1)
                && chars[end + 1].1.is_alphabetic()
            {
                end += 2;
            } else {
                break;
            }
        }
        let byte_end = chars.get(end).map_or(text.len(), |&(b, _)| b);
        spans.push((start, chars[start].0..byte_end));
        i = end;
    }
    spans
}

/// Splits text into lowercase word tokens, discarding punctuation, digits
/// and whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text)
        .into_iter()
        .map(|(_, r)| text[r].to_lowercase())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub stem: String,
    /// Offset in characters from the start of the sentence.
    pub offset: usize,
}

/// Stop-word list for one language, stored in normalized form.
#[derive(Debug, Clone, Default)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopWords {
            words: words
                .into_iter()
                .map(|w| strip_accents(w.as_ref().trim()))
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.words.contains(normalized)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// One word per line; `#` starts a comment.
    pub fn load(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        Ok(StopWords::new(
            text.lines().map(|l| l.split('#').next().unwrap_or("")),
        ))
    }
}

/// Loads `<dir>/<lang>.txt`.
pub fn load_stopwords(dir: &Path, lang: LanguageId) -> Result<StopWords> {
    StopWords::load(&dir.join(format!("{lang}.txt")))
}

/// Tokenizes, normalizes, filters and stems the sentences of one language.
#[derive(Debug)]
pub struct SideProcessor {
    lang: LanguageId,
    stemmer: Stemmer,
    stopwords: StopWords,
}

impl SideProcessor {
    pub fn new(lang: LanguageId, stopwords: StopWords) -> Self {
        SideProcessor {
            lang,
            stemmer: Stemmer::for_language(lang),
            stopwords,
        }
    }

    pub fn lang(&self) -> LanguageId {
        self.lang
    }

    pub fn content_tokens(&self, text: &str) -> Vec<Token> {
        token_spans(text)
            .into_iter()
            .filter_map(|(offset, range)| {
                let surface = &text[range];
                let normalized = strip_accents(surface);
                if self.stopwords.contains(&normalized) {
                    return None;
                }
                let stem = self.stemmer.stem(&normalized).into_owned();
                Some(Token {
                    surface: surface.to_string(),
                    normalized,
                    stem,
                    offset,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub sent_id: u64,
    pub lang_a: LanguageId,
    pub lang_b: LanguageId,
    pub tokens_a: Vec<Token>,
    pub tokens_b: Vec<Token>,
}

impl SentencePair {
    pub fn tokens(&self, side: Side) -> &[Token] {
        match side {
            Side::A => &self.tokens_a,
            Side::B => &self.tokens_b,
        }
    }

    pub fn lang(&self, side: Side) -> LanguageId {
        match side {
            Side::A => self.lang_a,
            Side::B => self.lang_b,
        }
    }
}

/// Turns aligned raw lines into [`SentencePair`]s.
#[derive(Debug)]
pub struct SentenceProcessor {
    a: SideProcessor,
    b: SideProcessor,
}

impl SentenceProcessor {
    pub fn new(a: SideProcessor, b: SideProcessor) -> Self {
        SentenceProcessor { a, b }
    }

    pub fn process(&self, sent_id: u64, line_a: &str, line_b: &str) -> SentencePair {
        SentencePair {
            sent_id,
            lang_a: self.a.lang,
            lang_b: self.b.lang,
            tokens_a: self.a.content_tokens(line_a),
            tokens_b: self.b.content_tokens(line_b),
        }
    }
}

/// Two line-aligned files, validated to have the same number of lines.
#[derive(Debug, Clone)]
pub struct ParallelCorpus {
    pub path_a: PathBuf,
    pub path_b: PathBuf,
    n_lines: usize,
}

fn count_lines(path: &Path) -> Result<usize> {
    let mut reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut count = 0;
    let mut last = b'\n';
    loop {
        let buf = reader.fill_buf().map_err(|e| Error::io(path, e))?;
        if buf.is_empty() {
            break;
        }
        count += buf.iter().filter(|&&b| b == b'\n').count();
        last = buf[buf.len() - 1];
        let n = buf.len();
        reader.consume(n);
    }
    if last != b'\n' {
        count += 1;
    }
    Ok(count)
}

impl ParallelCorpus {
    pub fn open(path_a: &Path, path_b: &Path) -> Result<Self> {
        let n_a = count_lines(path_a)?;
        let n_b = count_lines(path_b)?;
        if n_a != n_b {
            return Err(Error::LineCountMismatch(n_a, n_b));
        }
        Ok(ParallelCorpus {
            path_a: path_a.to_path_buf(),
            path_b: path_b.to_path_buf(),
            n_lines: n_a,
        })
    }

    pub fn len(&self) -> usize {
        self.n_lines
    }

    pub fn is_empty(&self) -> bool {
        self.n_lines == 0
    }

    /// Streams `(sent_id, line_a, line_b)` in file order.
    pub fn lines(&self) -> Result<RawLines> {
        Ok(RawLines {
            a: LineReader::open(&self.path_a)?,
            b: LineReader::open(&self.path_b)?,
            next_id: 0,
        })
    }

    /// Processes every sentence pair with `map` on the workers of `pool`,
    /// handing results to `sink` in corpus order. `map` also receives the
    /// raw lines of both sides. At most `batch_size` sentence pairs are held
    /// in memory at once.
    pub fn map_batches<T, M, S>(
        &self,
        processor: &SentenceProcessor,
        pool: &rayon::ThreadPool,
        batch_size: usize,
        map: M,
        mut sink: S,
    ) -> Result<()>
    where
        T: Send,
        M: Fn(SentencePair, &str, &str) -> T + Sync,
        S: FnMut(T),
    {
        let batch_size = batch_size.max(1);
        let mut lines = self.lines()?;
        let mut batch = Vec::with_capacity(batch_size);
        loop {
            batch.clear();
            for item in lines.by_ref().take(batch_size) {
                batch.push(item?);
            }
            if batch.is_empty() {
                break;
            }
            let results: Vec<T> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|(id, a, b)| map(processor.process(*id, a, b), a, b))
                    .collect()
            });
            results.into_iter().for_each(&mut sink);
        }
        Ok(())
    }
}

struct LineReader {
    path: PathBuf,
    reader: BufReader<File>,
    line_no: usize,
    buf: Vec<u8>,
}

impl LineReader {
    fn open(path: &Path) -> Result<Self> {
        Ok(LineReader {
            path: path.to_path_buf(),
            reader: BufReader::with_capacity(
                1 << 16,
                File::open(path).map_err(|e| Error::io(path, e))?,
            ),
            line_no: 0,
            buf: Vec::new(),
        })
    }

    fn next_line(&mut self) -> Option<Result<String>> {
        self.buf.clear();
        match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => None,
            Ok(_) => {
                self.line_no += 1;
                while matches!(self.buf.last(), Some(b'\n' | b'\r')) {
                    self.buf.pop();
                }
                Some(
                    String::from_utf8(std::mem::take(&mut self.buf))
                        .map_err(|_| Error::parse(&self.path, self.line_no, "invalid UTF-8")),
                )
            }
            Err(e) => Some(Err(Error::io(&self.path, e))),
        }
    }
}

pub struct RawLines {
    a: LineReader,
    b: LineReader,
    next_id: u64,
}

impl Iterator for RawLines {
    type Item = Result<(u64, String, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        let a = self.a.next_line()?;
        let b = self.b.next_line()?;
        let id = self.next_id;
        self.next_id += 1;
        Some(a.and_then(|a| b.map(|b| (id, a, b))))
    }
}

/// Opens a parallel corpus and streams processed sentence pairs in file order.
pub fn load_parallel(
    path_a: &Path,
    path_b: &Path,
    lang_a: LanguageId,
    lang_b: LanguageId,
    stop_a: StopWords,
    stop_b: StopWords,
) -> Result<impl Iterator<Item = Result<SentencePair>>> {
    let corpus = ParallelCorpus::open(path_a, path_b)?;
    let processor = SentenceProcessor::new(
        SideProcessor::new(lang_a, stop_a),
        SideProcessor::new(lang_b, stop_b),
    );
    let lines = corpus.lines()?;
    Ok(lines.map(move |item| item.map(|(id, a, b)| processor.process(id, &a, &b))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedOccurrence {
    pub sent_id: u64,
    pub side: Side,
    pub token_index: u32,
    pub pair_id: PairId,
    /// The pair's word on the other side occurs in the opposite sentence.
    pub aligned: bool,
}

/// Matches every token of both sides against the lexicon. Only pairs
/// connecting the sentence pair's two languages are considered. Output is
/// ordered by side, then token, then pair id.
pub fn match_occurrences(sp: &SentencePair, lex: &Lexicon) -> Vec<MatchedOccurrence> {
    let mut out = Vec::new();
    for side in [Side::A, Side::B] {
        let lang = sp.lang(side);
        let other_lang = sp.lang(side.opposite());
        let other = sp.tokens(side.opposite());
        for (idx, tok) in sp.tokens(side).iter().enumerate() {
            for &pair_id in lex.stem_lookup(lang, &tok.stem) {
                if !lex.pair(pair_id).connects(lang, other_lang) {
                    continue;
                }
                let counterpart = lex.stem_for(pair_id, other_lang).unwrap_or_default();
                out.push(MatchedOccurrence {
                    sent_id: sp.sent_id,
                    side,
                    token_index: idx as u32,
                    pair_id,
                    aligned: other.iter().any(|t| t.stem == counterpart),
                });
            }
        }
    }
    out
}

/// Corpus statistics. `related_words` counts content tokens (both sides)
/// matching at least one pair, `aligned_pairs` those with at least one
/// aligned match; `matched_occurrences` is the raw per-pair count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_sentences: u64,
    pub total_words_a: u64,
    pub total_words_b: u64,
    pub related_words: u64,
    pub aligned_pairs: u64,
    pub matched_occurrences: u64,
}

impl CorpusStats {
    /// Adds one sentence pair and its occurrences (as produced by
    /// [`match_occurrences`], i.e. grouped by token).
    pub fn add(&mut self, sp: &SentencePair, occurrences: &[MatchedOccurrence]) {
        self.n_sentences += 1;
        self.total_words_a += sp.tokens_a.len() as u64;
        self.total_words_b += sp.tokens_b.len() as u64;
        self.matched_occurrences += occurrences.len() as u64;
        for group in occurrences.chunk_by(|x, y| (x.side, x.token_index) == (y.side, y.token_index))
        {
            self.related_words += 1;
            if group.iter().any(|o| o.aligned) {
                self.aligned_pairs += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.n_sentences += other.n_sentences;
        self.total_words_a += other.total_words_a;
        self.total_words_b += other.total_words_b;
        self.related_words += other.related_words;
        self.aligned_pairs += other.aligned_pairs;
        self.matched_occurrences += other.matched_occurrences;
    }

    pub fn check(&self) {
        assert!(self.aligned_pairs <= self.related_words);
        assert!(self.related_words <= self.total_words_a + self.total_words_b);
    }
}

/// Statistics over sentence pairs and the occurrences matched in them.
pub fn corpus_stats<'a>(
    sentence_pairs: impl IntoIterator<Item = &'a SentencePair>,
    occurrences: impl IntoIterator<Item = &'a MatchedOccurrence>,
) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for sp in sentence_pairs {
        stats.n_sentences += 1;
        stats.total_words_a += sp.tokens_a.len() as u64;
        stats.total_words_b += sp.tokens_b.len() as u64;
    }
    let mut tokens = HashSet::new();
    let mut aligned = HashSet::new();
    for o in occurrences {
        stats.matched_occurrences += 1;
        let key = (o.sent_id, o.side, o.token_index);
        tokens.insert(key);
        if o.aligned {
            aligned.insert(key);
        }
    }
    stats.related_words = tokens.len() as u64;
    stats.aligned_pairs = aligned.len() as u64;
    stats.check();
    stats
}
