use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::pipeline::CorpusRun;
use super::DirectionalScore;
use crate::dli::{ChannelConfig, SemanticChannel, SurfaceChannel};
use crate::error::{Error, Result};
use crate::lang::LanguageId;

pub const MATRIX_CSV_HEADER: &str =
    "speaker,listener,surface_channel,semantic_channel,score_pct,n_sentences,n_content_tokens,n_scored_tokens";

/// Directional scores of every ordered pair of languages, per channel
/// configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct IntelligibilityMatrix {
    pub languages: Vec<LanguageId>,
    pub configs: BTreeMap<ChannelConfig, BTreeMap<(LanguageId, LanguageId), DirectionalScore>>,
}

/// Difference between the two directions of an unordered language pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryEntry {
    pub config: ChannelConfig,
    pub lang_a: LanguageId,
    pub lang_b: LanguageId,
    pub score_ab_pct: f64,
    pub score_ba_pct: f64,
    /// `score_ab_pct - score_ba_pct`.
    pub delta_pct: f64,
}

/// A direction where the phonetic score exceeds the orthographic one under
/// the same semantic channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhoneticExcess {
    pub speaker: LanguageId,
    pub listener: LanguageId,
    pub semantic_channel: SemanticChannel,
    pub orthographic_pct: f64,
    pub phonetic_pct: f64,
}

fn pct(x: f64) -> String {
    format!("{x:.1}")
}

impl IntelligibilityMatrix {
    /// Assembles runs into a matrix; every ordered pair of `languages` must
    /// be covered for every configuration.
    pub fn from_runs(
        languages: &[LanguageId],
        configs: &[ChannelConfig],
        runs: &[CorpusRun],
    ) -> Result<Self> {
        let mut out: BTreeMap<ChannelConfig, BTreeMap<_, _>> = BTreeMap::new();
        for score in runs.iter().flat_map(|r| &r.scores) {
            if languages.contains(&score.speaker) && languages.contains(&score.listener) {
                out.entry(score.config())
                    .or_default()
                    .insert((score.speaker, score.listener), score.clone());
            }
        }
        for &config in configs {
            let m = out.entry(config).or_default();
            for &s in languages {
                for &l in languages {
                    if s != l && !m.contains_key(&(s, l)) {
                        return Err(Error::MissingResource(format!(
                            "scores for {s}-{l} ({config})"
                        )));
                    }
                }
            }
        }
        let mut languages = languages.to_vec();
        languages.sort();
        Ok(IntelligibilityMatrix {
            languages,
            configs: out,
        })
    }

    pub fn scores(
        &self,
        config: ChannelConfig,
    ) -> Option<&BTreeMap<(LanguageId, LanguageId), DirectionalScore>> {
        self.configs.get(&config)
    }

    pub fn get(
        &self,
        config: ChannelConfig,
        speaker: LanguageId,
        listener: LanguageId,
    ) -> Option<&DirectionalScore> {
        self.configs.get(&config)?.get(&(speaker, listener))
    }

    /// Long-format CSV of all configurations, percentages to one decimal.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{MATRIX_CSV_HEADER}")?;
        for scores in self.configs.values() {
            for s in scores.values() {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    s.speaker,
                    s.listener,
                    s.surface_channel.as_str(),
                    s.semantic_channel.as_str(),
                    pct(s.score_pct()),
                    s.n_sentences,
                    s.n_content_tokens,
                    s.n_scored_tokens
                )?;
            }
        }
        Ok(())
    }

    /// Speaker rows by listener columns for one configuration; the diagonal
    /// is left empty.
    pub fn write_grid_csv<W: Write>(&self, config: ChannelConfig, mut out: W) -> io::Result<()> {
        let langs: Vec<String> = self.languages.iter().map(|l| l.to_string()).collect();
        writeln!(out, "speaker,{}", langs.join(","))?;
        for &s in &self.languages {
            let cells: Vec<String> = self
                .languages
                .iter()
                .map(|&l| {
                    self.get(config, s, l)
                        .map(|d| pct(d.score_pct()))
                        .unwrap_or_default()
                })
                .collect();
            writeln!(out, "{s},{}", cells.join(","))?;
        }
        Ok(())
    }

    /// JSON form: one entry per configuration listing its scores in
    /// (speaker, listener) order, plus asymmetry and phonetic diagnostics.
    pub fn to_json(&self) -> serde_json::Value {
        let configurations: Vec<serde_json::Value> = self
            .configs
            .iter()
            .map(|(config, scores)| {
                serde_json::json!({
                    "surface_channel": config.surface,
                    "semantic_channel": config.semantic,
                    "scores": scores.values().collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "languages": self.languages,
            "configurations": configurations,
            "asymmetry": self.asymmetry(),
            "phonetic_excess": self.phonetic_excess(),
        })
    }

    /// Per unordered pair and configuration, the gap between directions.
    pub fn asymmetry(&self) -> Vec<AsymmetryEntry> {
        let mut out = Vec::new();
        for (&config, scores) in &self.configs {
            for (i, &a) in self.languages.iter().enumerate() {
                for &b in &self.languages[i + 1..] {
                    if let (Some(ab), Some(ba)) = (scores.get(&(a, b)), scores.get(&(b, a))) {
                        out.push(AsymmetryEntry {
                            config,
                            lang_a: a,
                            lang_b: b,
                            score_ab_pct: ab.score_pct(),
                            score_ba_pct: ba.score_pct(),
                            delta_pct: ab.score_pct() - ba.score_pct(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Directions where phonetic exceeds orthographic; expected to be rare.
    pub fn phonetic_excess(&self) -> Vec<PhoneticExcess> {
        let mut out = Vec::new();
        for semantic in SemanticChannel::ALL {
            let (Some(o), Some(p)) = (
                self.scores(ChannelConfig::new(SurfaceChannel::Orthographic, semantic)),
                self.scores(ChannelConfig::new(SurfaceChannel::Phonetic, semantic)),
            ) else {
                continue;
            };
            for (key, ortho) in o {
                if let Some(phon) = p.get(key) {
                    if phon.score > ortho.score {
                        out.push(PhoneticExcess {
                            speaker: key.0,
                            listener: key.1,
                            semantic_channel: semantic,
                            orthographic_pct: ortho.score_pct(),
                            phonetic_pct: phon.score_pct(),
                        });
                    }
                }
            }
        }
        out
    }
}
