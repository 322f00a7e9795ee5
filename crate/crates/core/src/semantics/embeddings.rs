//! Cross-lingually aligned static word vectors in word2vec text format,
//! with form-based lookup for words missing from the vocabulary.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::stem::Stemmer;
use crate::surface::{char_levenshtein, strip_accents};

/// Maximum edit distance accepted by the prefix fallback.
pub const PREFIX_MAX_DISTANCE: usize = 3;
/// Number of leading characters shared by prefix-fallback candidates.
pub const PREFIX_LEN: usize = 3;

#[derive(Debug)]
pub struct EmbeddingStore {
    lang: LanguageId,
    dim: usize,
    words: Vec<String>,
    data: Vec<f32>,
    exact: HashMap<String, usize>,
    normalized: HashMap<String, usize>,
    by_stem: HashMap<String, Vec<usize>>,
    by_prefix: HashMap<String, Vec<usize>>,
    stemmer: Stemmer,
    /// Rows dropped because their word already appeared earlier.
    pub duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Exact,
    Fallback,
}

#[derive(Debug, Clone, Copy)]
pub struct Resolved<'a> {
    pub vector: &'a [f32],
    /// The store key whose vector was used.
    pub word: &'a str,
    pub resolution: Resolution,
}

fn prefix(word: &str) -> String {
    word.chars().take(PREFIX_LEN).collect()
}

impl EmbeddingStore {
    pub fn new(lang: LanguageId, dim: usize) -> Self {
        EmbeddingStore {
            lang,
            dim,
            words: Vec::new(),
            data: Vec::new(),
            exact: HashMap::new(),
            normalized: HashMap::new(),
            by_stem: HashMap::new(),
            by_prefix: HashMap::new(),
            stemmer: Stemmer::for_language(lang),
            duplicates: 0,
        }
    }

    /// Builds a store from in-memory entries; the first occurrence of a
    /// word wins.
    pub fn from_entries<I, S>(lang: LanguageId, dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let mut store = EmbeddingStore::new(lang, dim);
        for (word, vector) in entries {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch(dim, vector.len()));
            }
            store.push(word.into(), &vector);
        }
        store.build_buckets();
        Ok(store)
    }

    fn push(&mut self, word: String, vector: &[f32]) {
        if self.exact.contains_key(&word) {
            self.duplicates += 1;
            return;
        }
        let idx = self.words.len();
        self.exact.insert(word.clone(), idx);
        self.normalized.entry(strip_accents(&word)).or_insert(idx);
        self.data.extend_from_slice(vector);
        self.words.push(word);
    }

    fn build_buckets(&mut self) {
        let mut keys: Vec<(&String, &usize)> = self.normalized.iter().collect();
        keys.sort();
        for (key, &idx) in keys {
            self.by_stem
                .entry(self.stemmer.stem(key).into_owned())
                .or_default()
                .push(idx);
            self.by_prefix.entry(prefix(key)).or_default().push(idx);
        }
    }

    pub fn lang(&self) -> LanguageId {
        self.lang
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vector(&self, idx: usize) -> &[f32] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Exact lookup by original key, then by normalized key.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.exact_index(word).map(|i| self.vector(i))
    }

    fn exact_index(&self, word: &str) -> Option<usize> {
        self.exact
            .get(word)
            .or_else(|| self.normalized.get(word))
            .copied()
    }

    fn closest(&self, query: &str, bucket: &[usize], max_distance: usize) -> Option<usize> {
        bucket
            .iter()
            .map(|&idx| {
                let key = strip_accents(&self.words[idx]);
                (char_levenshtein(query, &key), key, idx)
            })
            .filter(|(d, _, _)| *d <= max_distance)
            .min_by(|x, y| (x.0, &x.1).cmp(&(y.0, &y.1)))
            .map(|(_, _, idx)| idx)
    }

    /// Looks up a normalized word. Falls back to the closest-in-form word
    /// with the same stem, then to words sharing the first three
    /// characters within edit distance 3. Ties go to the
    /// lexicographically smallest key.
    pub fn resolve(&self, word: &str) -> Option<Resolved<'_>> {
        if let Some(idx) = self.exact_index(word) {
            return Some(Resolved {
                vector: self.vector(idx),
                word: &self.words[idx],
                resolution: Resolution::Exact,
            });
        }
        let stem = self.stemmer.stem(word);
        let idx = self
            .by_stem
            .get(stem.as_ref())
            .and_then(|bucket| self.closest(word, bucket, usize::MAX))
            .or_else(|| {
                self.by_prefix
                    .get(&prefix(word))
                    .and_then(|bucket| self.closest(word, bucket, PREFIX_MAX_DISTANCE))
            })?;
        Some(Resolved {
            vector: self.vector(idx),
            word: &self.words[idx],
            resolution: Resolution::Fallback,
        })
    }

    pub fn write_word2vec<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.words.len(), self.dim)?;
        for (idx, word) in self.words.iter().enumerate() {
            write!(out, "{word}")?;
            for x in self.vector(idx) {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Reads a word2vec text file: a `<count> <dim>` header, then one
/// `word v1 … v<dim>` row per word.
pub fn load_static_embeddings(path: &Path, lang: LanguageId) -> Result<EmbeddingStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::with_capacity(1 << 20, file);
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::parse(path, 1, e.to_string()))?,
        None => return Err(Error::parse(path, 1, "missing header")),
    };
    let parsed: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(path, 1, format!("bad header {header:?}")))?;
    let (count, dim) = match parsed[..] {
        [count, dim] if dim > 0 => (count, dim),
        _ => return Err(Error::parse(path, 1, format!("bad header {header:?}"))),
    };

    let mut store = EmbeddingStore::new(lang, dim);
    store.data.reserve(count.saturating_mul(dim).min(1 << 28));
    let mut vector = Vec::with_capacity(dim);
    let mut rows = 0;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        vector.clear();
        for f in fields {
            let x: f32 = f
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("bad value {f:?}")))?;
            vector.push(x);
        }
        if vector.len() != dim {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {dim} values, found {}", vector.len()),
            ));
        }
        rows += 1;
        store.push(word.to_string(), &vector);
    }
    if rows != count {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {count} vectors, found {rows}"),
        ));
    }
    if store.duplicates > 0 {
        log::warn!(
            "{}: {} duplicate rows ignored",
            path.display(),
            store.duplicates
        );
    }
    store.build_buckets();
    Ok(store)
}

/// How many words resolved exactly, through the fallback, or not at all.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub exact: usize,
    pub fallback: usize,
    pub missing: usize,
}

impl Coverage {
    pub fn record(&mut self, resolved: Option<Resolution>) {
        match resolved {
            Some(Resolution::Exact) => self.exact += 1,
            Some(Resolution::Fallback) => self.fallback += 1,
            None => self.missing += 1,
        }
    }
}
