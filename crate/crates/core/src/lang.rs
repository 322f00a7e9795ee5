use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Two-letter lowercase language code such as `es` or `ro`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguageId([u8; 2]);

impl LanguageId {
    pub fn new(code: &str) -> Result<Self> {
        match code.as_bytes() {
            &[a, b] if a.is_ascii_lowercase() && b.is_ascii_lowercase() => Ok(LanguageId([a, b])),
            _ => Err(Error::InvalidLanguage(code.to_string())),
        }
    }

    pub fn as_str(&self) -> &str {
        // Both bytes are ASCII lowercase letters.
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl FromStr for LanguageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LanguageId::new(s)
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LanguageId({})", self.as_str())
    }
}

impl Serialize for LanguageId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LanguageId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        LanguageId::new(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses `"es-ro"` style language-pair keys.
pub fn parse_pair(key: &str) -> Result<(LanguageId, LanguageId)> {
    let (a, b) = key
        .split_once('-')
        .ok_or_else(|| Error::Invalid(format!("language pair {key:?} must look like \"es-ro\"")))?;
    let (a, b) = (LanguageId::new(a)?, LanguageId::new(b)?);
    if a == b {
        return Err(Error::Invalid(format!(
            "language pair {key:?} repeats a language"
        )));
    }
    Ok((a, b))
}
