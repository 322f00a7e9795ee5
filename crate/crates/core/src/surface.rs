//! Surface (orthographic and phonetic) similarity and the text
//! normalization shared by the whole pipeline.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::lang::LanguageId;

/// Lowercases, applies canonical decomposition and drops every combining
/// mark: `"Azúcar"` becomes `"azucar"`.
pub fn strip_accents(s: &str) -> String {
    let lower = s.to_lowercase();
    lower.nfd().filter(|c| !is_combining_mark(*c)).collect()
}

/// Unit-cost edit distance between two sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(x != y);
            curr[j + 1] = substitution.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// `levenshtein` over the characters of two strings.
pub fn char_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein(&a, &b)
}

/// One minus the edit distance normalized by the longer length.
pub fn surface_similarity<T: PartialEq>(a: &[T], b: &[T]) -> Result<f64> {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(1.0 - levenshtein(a, b) as f64 / longest as f64)
}

/// Orthographic similarity of two words, compared on their normalized forms.
pub fn orthographic_similarity(a: &str, b: &str) -> Result<f64> {
    let a: Vec<char> = strip_accents(a).chars().collect();
    let b: Vec<char> = strip_accents(b).chars().collect();
    surface_similarity(&a, &b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhonemeSequence {
    pub lang: LanguageId,
    pub word: String,
    pub units: Vec<String>,
}

/// Transcriptions keyed by language and normalized word.
#[derive(Debug, Clone, Default)]
pub struct PhoneticLexicon {
    entries: HashMap<(LanguageId, String), PhonemeSequence>,
}

impl PhoneticLexicon {
    pub fn get(&self, lang: LanguageId, word: &str) -> Option<&PhonemeSequence> {
        self.entries.get(&(lang, word.to_string()))
    }

    pub fn contains(&self, lang: LanguageId, word: &str) -> bool {
        self.entries.contains_key(&(lang, word.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, seq: PhonemeSequence) {
        self.entries.insert((seq.lang, seq.word.clone()), seq);
    }

    /// Phonetic similarity of two words, `None` when either lacks a transcription.
    pub fn similarity(
        &self,
        lang_a: LanguageId,
        word_a: &str,
        lang_b: LanguageId,
        word_b: &str,
    ) -> Option<f64> {
        let a = self.get(lang_a, word_a)?;
        let b = self.get(lang_b, word_b)?;
        // Transcriptions are never empty, so the similarity is defined.
        surface_similarity(&a.units, &b.units).ok()
    }
}

/// Reads a `lang<TAB>word<TAB>phonemes` file where phonemes are
/// space-separated symbols. A header row starting with `lang` is skipped.
pub fn load_phonetic_lexicon(path: &Path) -> Result<PhoneticLexicon> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lexicon = PhoneticLexicon::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || (line_no == 1 && line.starts_with("lang\t")) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 3 tab-separated columns, found {}", fields.len()),
            ));
        }
        let lang = LanguageId::new(fields[0].trim())
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let word = strip_accents(fields[1].trim());
        if word.is_empty() {
            return Err(Error::parse(path, line_no, "empty word"));
        }
        let units: Vec<String> = fields[2].split_whitespace().map(str::to_string).collect();
        if units.is_empty() {
            return Err(Error::parse(path, line_no, "empty phoneme field"));
        }
        lexicon.insert(PhonemeSequence { lang, word, units });
    }
    Ok(lexicon)
}
