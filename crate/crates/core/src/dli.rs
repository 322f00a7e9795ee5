//! The lexical intelligibility index combining surface and semantic
//! similarity of a related word pair.
//!
//! For surface similarity `l` and semantic similarity `s` the index is
//!
//! ```text
//! d = s·l·(2 − s − l) / (1 − s·l)
//! ```
//!
//! which is the linear combination `α·s + β·l` with
//! `α = l(1−s)/(1−s·l)` and `β = s(1−l)/(1−s·l)`, the unique weights for
//! which `d = s` whenever `l = 1` and `d = l` whenever `s = 1`. It always
//! lies in `[s·l, min(s, l)]`.
//!
//! Evaluation uses `u = 1 − s`, `v = 1 − l`, so that
//! `2 − s − l = u + v` and `1 − s·l = u + s·v`; both are sums of
//! non-negative terms, which keeps the result accurate near `s = l = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::PairId;

/// Inputs this far outside `[0, 1]` are treated as rounding noise and clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-9;

/// Slack used by [`check_bounds`].
pub const BOUND_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceChannel {
    Orthographic,
    Phonetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticChannel {
    Static,
    Contextual,
}

impl SurfaceChannel {
    pub const ALL: [SurfaceChannel; 2] = [SurfaceChannel::Orthographic, SurfaceChannel::Phonetic];

    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceChannel::Orthographic => "orthographic",
            SurfaceChannel::Phonetic => "phonetic",
        }
    }
}

impl SemanticChannel {
    pub const ALL: [SemanticChannel; 2] = [SemanticChannel::Static, SemanticChannel::Contextual];

    pub fn as_str(self) -> &'static str {
        match self {
            SemanticChannel::Static => "static",
            SemanticChannel::Contextual => "contextual",
        }
    }
}

impl std::str::FromStr for SurfaceChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthographic" => Ok(SurfaceChannel::Orthographic),
            "phonetic" => Ok(SurfaceChannel::Phonetic),
            _ => Err(Error::Invalid(format!("unknown surface channel {s:?}"))),
        }
    }
}

impl std::str::FromStr for SemanticChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(SemanticChannel::Static),
            "contextual" => Ok(SemanticChannel::Contextual),
            _ => Err(Error::Invalid(format!("unknown semantic channel {s:?}"))),
        }
    }
}

/// A (surface, semantic) channel combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub surface: SurfaceChannel,
    pub semantic: SemanticChannel,
}

impl ChannelConfig {
    pub const ALL: [ChannelConfig; 4] = [
        ChannelConfig::new(SurfaceChannel::Orthographic, SemanticChannel::Static),
        ChannelConfig::new(SurfaceChannel::Orthographic, SemanticChannel::Contextual),
        ChannelConfig::new(SurfaceChannel::Phonetic, SemanticChannel::Static),
        ChannelConfig::new(SurfaceChannel::Phonetic, SemanticChannel::Contextual),
    ];

    pub const fn new(surface: SurfaceChannel, semantic: SemanticChannel) -> Self {
        ChannelConfig { surface, semantic }
    }

    /// `orthographic-static` style label.
    pub fn label(&self) -> String {
        format!("{}-{}", self.surface.as_str(), self.semantic.as_str())
    }
}

impl std::fmt::Display for ChannelConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelScores {
    pub s_l: f64,
    pub s_s: f64,
    pub surface_channel: SurfaceChannel,
    pub semantic_channel: SemanticChannel,
}

impl ChannelScores {
    pub fn dli(&self) -> Result<f64> {
        dli(self.s_s, self.s_l)
    }
}

fn unit(x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else if (-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&x) {
        Ok(x.clamp(0.0, 1.0))
    } else {
        // Also rejects NaN.
        Err(Error::ScoreOutOfRange(x))
    }
}

/// The intelligibility index for semantic similarity `s_s` and surface
/// similarity `s_l`. Equals 1 when both are 1.
pub fn dli(s_s: f64, s_l: f64) -> Result<f64> {
    let (s, l) = (unit(s_s)?, unit(s_l)?);
    let (u, v) = (1.0 - s, 1.0 - l);
    let den = u + s * v;
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok(s * l * (u + v) / den)
}

/// Weights `(α, β)` with `α·s_s + β·s_l = dli(s_s, s_l)`.
pub fn alpha_beta(s_s: f64, s_l: f64) -> Result<(f64, f64)> {
    let (s, l) = (unit(s_s)?, unit(s_l)?);
    let (u, v) = (1.0 - s, 1.0 - l);
    let den = u + s * v;
    if den == 0.0 {
        return Err(Error::Degenerate);
    }
    Ok((l * u / den, s * v / den))
}

/// Whether `s_s·s_l ≤ d ≤ min(s_s, s_l)` up to [`BOUND_EPSILON`].
pub fn check_bounds(s_s: f64, s_l: f64, d: f64) -> bool {
    s_s * s_l - BOUND_EPSILON <= d && d <= s_s.min(s_l) + BOUND_EPSILON
}

/// Channel scores and derived indices for one related pair. Missing
/// channels are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSimilarity {
    pub pair_id: PairId,
    pub s_l_orthographic: Option<f64>,
    pub s_l_phonetic: Option<f64>,
    pub s_s_static: Option<f64>,
    pub s_s_contextual: Option<f64>,
}

impl PairSimilarity {
    pub fn surface(&self, channel: SurfaceChannel) -> Option<f64> {
        match channel {
            SurfaceChannel::Orthographic => self.s_l_orthographic,
            SurfaceChannel::Phonetic => self.s_l_phonetic,
        }
    }

    pub fn semantic(&self, channel: SemanticChannel) -> Option<f64> {
        match channel {
            SemanticChannel::Static => self.s_s_static,
            SemanticChannel::Contextual => self.s_s_contextual,
        }
    }

    pub fn scores(&self, config: ChannelConfig) -> Option<ChannelScores> {
        Some(ChannelScores {
            s_l: self.surface(config.surface)?,
            s_s: self.semantic(config.semantic)?,
            surface_channel: config.surface,
            semantic_channel: config.semantic,
        })
    }

    /// The index for one channel combination, `None` when either channel
    /// lacks data for this pair.
    pub fn dli(&self, config: ChannelConfig) -> Option<f64> {
        let scores = self.scores(config)?;
        // Channel scores are constructed within [0, 1].
        scores.dli().ok()
    }
}
