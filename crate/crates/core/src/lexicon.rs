//! The related-word lexicon: cognate and borrowing pairs with a stem index
//! used to match corpus tokens.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguageId;
use crate::stem::Stemmer;
use crate::surface::strip_accents;

pub const LEXICON_HEADER: &str = "lang_a\tlang_b\tword_a\tword_b\trelation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PairId(pub u32);

impl PairId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Cognate,
    Borrowing,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Cognate => "cognate",
            Relation::Borrowing => "borrowing",
        }
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cognate" => Ok(Relation::Cognate),
            "borrowing" => Ok(Relation::Borrowing),
            other => Err(Error::Invalid(format!("unknown relation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelatedPair {
    pub pair_id: PairId,
    pub lang_a: LanguageId,
    pub lang_b: LanguageId,
    pub word_a: String,
    pub word_b: String,
    pub relation: Relation,
}

impl RelatedPair {
    /// The same pair with its two sides swapped.
    pub fn flipped(&self) -> RelatedPair {
        RelatedPair {
            pair_id: self.pair_id,
            lang_a: self.lang_b,
            lang_b: self.lang_a,
            word_a: self.word_b.clone(),
            word_b: self.word_a.clone(),
            relation: self.relation,
        }
    }

    pub fn connects(&self, x: LanguageId, y: LanguageId) -> bool {
        (self.lang_a == x && self.lang_b == y) || (self.lang_a == y && self.lang_b == x)
    }

    /// The word this pair holds for `lang`, if `lang` is one of its sides.
    pub fn word_for(&self, lang: LanguageId) -> Option<&str> {
        if lang == self.lang_a {
            Some(&self.word_a)
        } else if lang == self.lang_b {
            Some(&self.word_b)
        } else {
            None
        }
    }
}

/// An immutable set of related pairs indexed by `(language, stem)`.
///
/// `PairId`s are dense: `pairs()[id.index()]` is the pair with that id.
#[derive(Debug)]
pub struct Lexicon {
    pairs: Vec<RelatedPair>,
    stems: Vec<(String, String)>,
    stem_index: HashMap<LanguageId, HashMap<String, Vec<PairId>>>,
}

impl Lexicon {
    /// Builds a lexicon from raw `(lang_a, lang_b, word_a, word_b, relation)`
    /// rows, normalizing words and dropping duplicates. Duplicate detection
    /// ignores orientation.
    pub fn from_rows<I, S>(rows: I) -> Result<Lexicon>
    where
        I: IntoIterator<Item = (LanguageId, LanguageId, S, S, Relation)>,
        S: AsRef<str>,
    {
        let mut builder = Builder::default();
        for (lang_a, lang_b, word_a, word_b, relation) in rows {
            builder.push(lang_a, lang_b, word_a.as_ref(), word_b.as_ref(), relation)?;
        }
        Ok(builder.finish())
    }

    pub fn pairs(&self) -> &[RelatedPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, id: PairId) -> &RelatedPair {
        &self.pairs[id.index()]
    }

    /// Stem of the word on the `lang` side of pair `id`.
    pub fn stem_for(&self, id: PairId, lang: LanguageId) -> Option<&str> {
        let pair = &self.pairs[id.index()];
        let (stem_a, stem_b) = &self.stems[id.index()];
        if lang == pair.lang_a {
            Some(stem_a)
        } else if lang == pair.lang_b {
            Some(stem_b)
        } else {
            None
        }
    }

    /// Pair ids whose `lang` word has exactly this stem, in ascending order.
    pub fn stem_lookup(&self, lang: LanguageId, stem: &str) -> &[PairId] {
        self.stem_index
            .get(&lang)
            .and_then(|by_stem| by_stem.get(stem))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All pairs between `a` and `b`, oriented so that `lang_a == a`.
    pub fn pairs_for_language_pair(&self, a: LanguageId, b: LanguageId) -> Vec<RelatedPair> {
        self.pairs
            .iter()
            .filter(|p| p.connects(a, b))
            .map(|p| {
                if p.lang_a == a {
                    p.clone()
                } else {
                    p.flipped()
                }
            })
            .collect()
    }

    /// Distinct `(language, word)` entries across all pairs, sorted.
    pub fn words(&self) -> Vec<(LanguageId, String)> {
        let mut set: Vec<(LanguageId, String)> = self
            .pairs
            .iter()
            .flat_map(|p| [(p.lang_a, p.word_a.clone()), (p.lang_b, p.word_b.clone())])
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        set.sort();
        set
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{LEXICON_HEADER}")?;
        for p in &self.pairs {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                p.lang_a,
                p.lang_b,
                p.word_a,
                p.word_b,
                p.relation.as_str()
            )?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Builder {
    pairs: Vec<RelatedPair>,
    seen: HashSet<(LanguageId, String, LanguageId, String, Relation)>,
    stemmers: HashMap<LanguageId, Stemmer>,
    stems: Vec<(String, String)>,
    stem_index: HashMap<LanguageId, HashMap<String, Vec<PairId>>>,
}

impl Builder {
    fn push(
        &mut self,
        lang_a: LanguageId,
        lang_b: LanguageId,
        word_a: &str,
        word_b: &str,
        relation: Relation,
    ) -> Result<bool> {
        if lang_a == lang_b {
            return Err(Error::Invalid(format!(
                "pair within a single language ({lang_a})"
            )));
        }
        let word_a = strip_accents(word_a.trim());
        let word_b = strip_accents(word_b.trim());
        if word_a.is_empty() || word_b.is_empty() {
            return Err(Error::Invalid("empty word after normalization".into()));
        }
        let key = if lang_a <= lang_b {
            (lang_a, word_a.clone(), lang_b, word_b.clone(), relation)
        } else {
            (lang_b, word_b.clone(), lang_a, word_a.clone(), relation)
        };
        if !self.seen.insert(key) {
            return Ok(false);
        }

        let pair_id = PairId(self.pairs.len() as u32);
        let stem_a = self.stem(lang_a, &word_a);
        let stem_b = self.stem(lang_b, &word_b);
        for (lang, stem) in [(lang_a, &stem_a), (lang_b, &stem_b)] {
            self.stem_index
                .entry(lang)
                .or_default()
                .entry(stem.clone())
                .or_default()
                .push(pair_id);
        }
        self.stems.push((stem_a, stem_b));
        self.pairs.push(RelatedPair {
            pair_id,
            lang_a,
            lang_b,
            word_a,
            word_b,
            relation,
        });
        Ok(true)
    }

    fn stem(&mut self, lang: LanguageId, word: &str) -> String {
        self.stemmers
            .entry(lang)
            .or_insert_with(|| Stemmer::for_language(lang))
            .stem(word)
            .into_owned()
    }

    fn finish(self) -> Lexicon {
        Lexicon {
            pairs: self.pairs,
            stems: self.stems,
            stem_index: self.stem_index,
        }
    }
}

/// Loads a lexicon TSV, keeping only rows whose two languages are both in
/// `languages`.
pub fn load_lexicon(path: &Path, languages: &[LanguageId]) -> Result<Lexicon> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut builder = Builder::default();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf)
            .map_err(|_| Error::parse(path, line_no, "invalid UTF-8"))?
            .trim_end_matches(['\n', '\r']);
        if line_no == 1 {
            if line
                .split('\t')
                .map(str::trim)
                .ne(LEXICON_HEADER.split('\t'))
            {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected header {LEXICON_HEADER:?}"),
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 5 columns, found {}", fields.len()),
            ));
        }
        let row_err = |e: Error| Error::parse(path, line_no, e.to_string());
        let lang_a = LanguageId::new(fields[0].trim()).map_err(row_err)?;
        let lang_b = LanguageId::new(fields[1].trim()).map_err(row_err)?;
        let relation: Relation = fields[4].trim().parse().map_err(row_err)?;
        if !languages.contains(&lang_a) || !languages.contains(&lang_b) {
            continue;
        }
        builder
            .push(lang_a, lang_b, fields[2], fields[3], relation)
            .map_err(row_err)?;
    }
    let lexicon = builder.finish();
    if lexicon.is_empty() {
        return Err(Error::EmptyLexicon);
    }
    Ok(lexicon)
}
