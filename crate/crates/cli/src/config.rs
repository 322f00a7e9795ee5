//! Declarative run configuration (TOML) with command-line overrides.
//!
//! Relative paths are resolved against the directory of the config file.
//!
//! ```toml
//! languages = ["es", "ro"]
//! lexicon = "lexicon.tsv"
//! stopwords_dir = "stopwords"
//! output_dir = "out"
//! seed = 20240611
//! workers = 4
//! channels = ["orthographic-static", "phonetic-static"]
//! phonetic_lexicon = "phonetic.tsv"
//!
//! [static_embeddings]
//! es = "vectors/es.vec"
//! ro = "vectors/ro.vec"
//!
//! [corpora.es-ro]
//! a = "corpus/es-ro.es.txt"
//! b = "corpus/es-ro.ro.txt"
//!
//! [contextual_vectors]
//! es-ro = "contextual-es-ro.jsonl"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use interlex::aggregate::CorpusSource;
use interlex::corpus::DEFAULT_BATCH_SIZE;
use interlex::dli::{ChannelConfig, SemanticChannel, SurfaceChannel};
use interlex::evaluation::{DEFAULT_PERMUTATIONS, DEFAULT_SEED};
use interlex::lang::parse_pair;
use interlex::LanguageId;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
pub struct CorpusPaths {
    /// File of the first language of the pair key.
    pub a: PathBuf,
    pub b: PathBuf,
}

/// The config file as written.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub languages: Option<Vec<String>>,
    pub lexicon: Option<PathBuf>,
    pub stopwords_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub batch_size: Option<usize>,
    pub permutations: Option<usize>,
    pub channels: Option<Vec<String>>,
    pub phonetic_lexicon: Option<PathBuf>,
    #[serde(default)]
    pub static_embeddings: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub corpora: BTreeMap<String, CorpusPaths>,
    #[serde(default)]
    pub contextual_vectors: BTreeMap<String, PathBuf>,
}

/// Values given on the command line; each replaces the file's value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub languages: Option<Vec<String>>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub batch_size: Option<usize>,
    pub permutations: Option<usize>,
    pub channels: Option<Vec<String>>,
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub languages: Vec<LanguageId>,
    pub lexicon: PathBuf,
    pub stopwords_dir: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub workers: usize,
    pub batch_size: usize,
    pub permutations: usize,
    /// Channel configurations to score.
    pub channels: Vec<ChannelConfig>,
    /// Configurations left out because their resources are not configured.
    pub unavailable: Vec<ChannelConfig>,
    pub phonetic_lexicon: Option<PathBuf>,
    pub static_embeddings: BTreeMap<LanguageId, PathBuf>,
    /// Keyed by language pair, smaller code first.
    pub corpora: BTreeMap<(LanguageId, LanguageId), CorpusSource>,
    pub contextual_vectors: BTreeMap<(LanguageId, LanguageId), PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn ordered(a: LanguageId, b: LanguageId) -> (LanguageId, LanguageId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn parse_language(s: &str) -> Result<LanguageId, CliError> {
    s.trim()
        .parse()
        .map_err(|e: interlex::Error| config_err(e.to_string()))
}

fn parse_channel(s: &str) -> Result<ChannelConfig, CliError> {
    let (surface, semantic) = s
        .trim()
        .split_once('-')
        .ok_or_else(|| config_err(format!("channel {s:?} is not of the form surface-semantic")))?;
    let surface: SurfaceChannel = surface
        .parse()
        .map_err(|e: interlex::Error| config_err(e.to_string()))?;
    let semantic: SemanticChannel = semantic
        .parse()
        .map_err(|e: interlex::Error| config_err(e.to_string()))?;
    Ok(ChannelConfig::new(surface, semantic))
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(config_err(format!("{what} not found: {}", path.display())))
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
        let (file, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?;
                let file: FileConfig = toml::from_str(&text)
                    .map_err(|e| config_err(format!("invalid config {}: {e}", p.display())))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, base)
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        Self::from_parts(file, &base, overrides)
    }

    /// Merges the file with the overrides and checks that every selected
    /// channel has its resources. Touches the file system only to check
    /// that configured inputs exist.
    pub fn from_parts(file: FileConfig, base: &Path, o: &Overrides) -> Result<RunConfig, CliError> {
        let names = o
            .languages
            .clone()
            .or(file.languages)
            .ok_or_else(|| config_err("no languages configured"))?;
        let mut languages = names
            .iter()
            .map(|s| parse_language(s))
            .collect::<Result<Vec<_>, _>>()?;
        languages.sort();
        languages.dedup();
        if languages.len() < 2 {
            return Err(config_err("at least two languages are required"));
        }

        let lexicon = resolve(
            base,
            &file
                .lexicon
                .ok_or_else(|| config_err("no lexicon configured"))?,
        );
        require_file(&lexicon, "lexicon")?;
        let stopwords_dir = resolve(
            base,
            &file
                .stopwords_dir
                .ok_or_else(|| config_err("no stopwords_dir configured"))?,
        );
        for &l in &languages {
            require_file(&stopwords_dir.join(format!("{l}.txt")), "stop-word list")?;
        }
        let output_dir = o
            .output_dir
            .clone()
            .or_else(|| file.output_dir.map(|p| resolve(base, &p)))
            .ok_or_else(|| config_err("no output_dir configured"))?;

        let phonetic_lexicon = file.phonetic_lexicon.map(|p| resolve(base, &p));
        if let Some(p) = &phonetic_lexicon {
            require_file(p, "phonetic lexicon")?;
        }

        let mut static_embeddings = BTreeMap::new();
        for (k, p) in &file.static_embeddings {
            let lang = parse_language(k)?;
            if languages.contains(&lang) {
                let p = resolve(base, p);
                require_file(&p, "static embeddings")?;
                static_embeddings.insert(lang, p);
            }
        }

        let selected =
            |a: LanguageId, b: LanguageId| languages.contains(&a) && languages.contains(&b);
        let mut corpora = BTreeMap::new();
        for (k, paths) in &file.corpora {
            let (a, b) =
                parse_pair(k).map_err(|e| config_err(format!("corpora key {k:?}: {e}")))?;
            if !selected(a, b) {
                continue;
            }
            let source = CorpusSource {
                lang_a: a,
                lang_b: b,
                path_a: resolve(base, &paths.a),
                path_b: resolve(base, &paths.b),
            };
            require_file(&source.path_a, "corpus file")?;
            require_file(&source.path_b, "corpus file")?;
            if corpora.insert(ordered(a, b), source).is_some() {
                return Err(config_err(format!("corpus for {a}-{b} configured twice")));
            }
        }

        let mut contextual_vectors = BTreeMap::new();
        for (k, p) in &file.contextual_vectors {
            let (a, b) = parse_pair(k)
                .map_err(|e| config_err(format!("contextual_vectors key {k:?}: {e}")))?;
            if selected(a, b) {
                let p = resolve(base, p);
                require_file(&p, "contextual vectors")?;
                contextual_vectors.insert(ordered(a, b), p);
            }
        }

        let all_pairs: Vec<(LanguageId, LanguageId)> = languages
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| languages[i + 1..].iter().map(move |&b| (a, b)))
            .collect();
        let has_static = languages.iter().all(|l| static_embeddings.contains_key(l));
        let has_contextual = all_pairs.iter().all(|p| contextual_vectors.contains_key(p));
        let has_phonetic = phonetic_lexicon.is_some();
        let available = |c: &ChannelConfig| {
            (c.surface == SurfaceChannel::Orthographic || has_phonetic)
                && match c.semantic {
                    SemanticChannel::Static => has_static,
                    SemanticChannel::Contextual => has_contextual,
                }
        };

        let requested = o.channels.clone().or(file.channels);
        let (channels, unavailable) = match requested {
            Some(list) => {
                let mut channels = list
                    .iter()
                    .map(|s| parse_channel(s))
                    .collect::<Result<Vec<_>, _>>()?;
                channels.sort();
                channels.dedup();
                if let Some(c) = channels.iter().find(|c| !available(c)) {
                    return Err(config_err(format!(
                        "channel {c} selected but its resources are not configured for all languages"
                    )));
                }
                (channels, Vec::new())
            }
            None => ChannelConfig::ALL.iter().copied().partition(available),
        };
        if channels.is_empty() {
            return Err(config_err(
                "no channel configuration is available; configure static embeddings or contextual vectors",
            ));
        }

        let workers = o.workers.or(file.workers).unwrap_or(0);
        let permutations = o
            .permutations
            .or(file.permutations)
            .unwrap_or(DEFAULT_PERMUTATIONS);
        Ok(RunConfig {
            languages,
            lexicon,
            stopwords_dir,
            output_dir,
            seed: o.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            workers,
            batch_size: o
                .batch_size
                .or(file.batch_size)
                .unwrap_or(DEFAULT_BATCH_SIZE)
                .max(1),
            permutations,
            channels,
            unavailable,
            phonetic_lexicon,
            static_embeddings,
            corpora,
            contextual_vectors,
        })
    }

    /// Unordered language pairs of the run, smaller code first.
    pub fn language_pairs(&self) -> Vec<(LanguageId, LanguageId)> {
        let l = &self.languages;
        l.iter()
            .enumerate()
            .flat_map(|(i, &a)| l[i + 1..].iter().map(move |&b| (a, b)))
            .collect()
    }

    /// Checks that every language pair has a corpus.
    pub fn require_corpora(&self) -> Result<(), CliError> {
        for (a, b) in self.language_pairs() {
            if !self.corpora.contains_key(&(a, b)) {
                return Err(config_err(format!(
                    "no parallel corpus configured for {a}-{b}"
                )));
            }
        }
        Ok(())
    }

    pub fn uses_semantic(&self, channel: SemanticChannel) -> bool {
        self.channels.iter().any(|c| c.semantic == channel)
    }

    pub fn uses_surface(&self, channel: SurfaceChannel) -> bool {
        self.channels.iter().any(|c| c.surface == channel)
    }
}
