//! Snowball stemming keyed by language.

use std::borrow::Cow;

use rust_stemmers::{Algorithm, Stemmer as Snowball};

use crate::lang::LanguageId;

/// A Snowball stemmer for one language. Languages without a Snowball
/// algorithm stem to the identity.
pub struct Stemmer {
    inner: Option<Snowball>,
}

impl Stemmer {
    pub fn for_language(lang: LanguageId) -> Self {
        Stemmer {
            inner: algorithm(lang).map(Snowball::create),
        }
    }

    /// Stems an already normalized (lowercase, accent-stripped) word.
    pub fn stem<'a>(&self, word: &'a str) -> Cow<'a, str> {
        match &self.inner {
            Some(s) => s.stem(word),
            None => Cow::Borrowed(word),
        }
    }
}

impl std::fmt::Debug for Stemmer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stemmer")
            .field("snowball", &self.inner.is_some())
            .finish()
    }
}

fn algorithm(lang: LanguageId) -> Option<Algorithm> {
    Some(match lang.as_str() {
        "ar" => Algorithm::Arabic,
        "da" => Algorithm::Danish,
        "de" => Algorithm::German,
        "el" => Algorithm::Greek,
        "en" => Algorithm::English,
        "es" => Algorithm::Spanish,
        "fi" => Algorithm::Finnish,
        "fr" => Algorithm::French,
        "hu" => Algorithm::Hungarian,
        "it" => Algorithm::Italian,
        "nl" => Algorithm::Dutch,
        "no" => Algorithm::Norwegian,
        "pt" => Algorithm::Portuguese,
        "ro" => Algorithm::Romanian,
        "ru" => Algorithm::Russian,
        "sv" => Algorithm::Swedish,
        "ta" => Algorithm::Tamil,
        "tr" => Algorithm::Turkish,
        _ => return None,
    })
}
