//! Subcommand implementations. Each writes its files under the output
//! directory and returns what it wrote for programmatic use.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use interlex::aggregate::{
    build_matrix, build_pair_similarities, process_corpus, CorpusRun, CoverageReport,
    IntelligibilityMatrix, PairSimResources, PairSimTable, PipelineContext,
};
use interlex::corpus::{load_stopwords, StopWords};
use interlex::dli::{SemanticChannel, SurfaceChannel};
use interlex::evaluation::{
    evaluate_against_cloze, load_cloze, CorrelationReport, MIN_PERMUTATIONS,
};
use interlex::export::{collect_export_requests, write_export_requests, MAX_OCCURRENCES};
use interlex::lexicon::{load_lexicon, Lexicon};
use interlex::semantics::{
    load_contextual_vectors, load_static_embeddings, ContextualVectors, EmbeddingStore,
};
use interlex::surface::{load_phonetic_lexicon, PhoneticLexicon};
use interlex::LanguageId;
use log::info;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::heatmap::render_svg;
use crate::CliError;

/// Loaded inputs of a run.
pub struct Resources {
    pub lexicon: Lexicon,
    pub stopwords: HashMap<LanguageId, StopWords>,
    pub static_vectors: Option<HashMap<LanguageId, EmbeddingStore>>,
    pub phonetic: Option<PhoneticLexicon>,
    pub contextual: Option<HashMap<(LanguageId, LanguageId), ContextualVectors>>,
}

impl Resources {
    pub fn pairsim_resources(&self) -> PairSimResources<'_> {
        PairSimResources {
            static_vectors: self.static_vectors.as_ref(),
            phonetic: self.phonetic.as_ref(),
            contextual: self.contextual.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Needs {
    static_vectors: bool,
    phonetic: bool,
    contextual: bool,
}

impl Needs {
    fn for_channels(cfg: &RunConfig) -> Needs {
        Needs {
            static_vectors: cfg.uses_semantic(SemanticChannel::Static),
            phonetic: cfg.uses_surface(SurfaceChannel::Phonetic),
            contextual: cfg.uses_semantic(SemanticChannel::Contextual),
        }
    }
}

fn thread_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))
}

fn load_resources(cfg: &RunConfig, needs: Needs) -> Result<Resources, CliError> {
    let lexicon = load_lexicon(&cfg.lexicon, &cfg.languages)?;
    info!("lexicon: {} related pairs", lexicon.len());
    let stopwords = cfg
        .languages
        .iter()
        .map(|&l| Ok((l, load_stopwords(&cfg.stopwords_dir, l)?)))
        .collect::<Result<HashMap<_, _>, interlex::Error>>()?;
    let static_vectors = if needs.static_vectors {
        let stores = cfg
            .static_embeddings
            .par_iter()
            .map(|(&l, p)| Ok((l, load_static_embeddings(p, l)?)))
            .collect::<Result<HashMap<_, _>, interlex::Error>>()?;
        for (l, s) in &stores {
            info!(
                "static vectors {l}: {} words, dimension {}",
                s.len(),
                s.dim()
            );
        }
        Some(stores)
    } else {
        None
    };
    let phonetic = match (&cfg.phonetic_lexicon, needs.phonetic) {
        (Some(p), true) => Some(load_phonetic_lexicon(p)?),
        _ => None,
    };
    let contextual = if needs.contextual {
        Some(
            cfg.contextual_vectors
                .par_iter()
                .map(|(&k, p)| Ok((k, load_contextual_vectors(p)?)))
                .collect::<Result<HashMap<_, _>, interlex::Error>>()?,
        )
    } else {
        None
    };
    Ok(Resources {
        lexicon,
        stopwords,
        static_vectors,
        phonetic,
        contextual,
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::output(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn pair_label(a: LanguageId, b: LanguageId) -> String {
    format!("{a}-{b}")
}

#[derive(Debug, Clone, Serialize)]
struct StatsRecord<'a> {
    corpus: String,
    lang_a: LanguageId,
    lang_b: LanguageId,
    #[serde(flatten)]
    stats: &'a interlex::corpus::CorpusStats,
}

/// Corpus name from a `<name>.<lang>.txt` file name.
fn corpus_name(path: &Path, lang: LanguageId) -> String {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let suffix = format!(".{lang}.txt");
    file.strip_suffix(&suffix)
        .map(str::to_string)
        .unwrap_or(file)
}

fn stats_value(cfg: &RunConfig, run: &CorpusRun) -> serde_json::Value {
    let source = &cfg.corpora[&(run.lang_a.min(run.lang_b), run.lang_a.max(run.lang_b))];
    serde_json::to_value(StatsRecord {
        corpus: corpus_name(&source.path_a, source.lang_a),
        lang_a: run.lang_a,
        lang_b: run.lang_b,
        stats: &run.stats,
    })
    .expect("serializable")
}

/// Writes `stats/<a>-<b>.json` for every language pair.
pub fn stats(cfg: &RunConfig) -> Result<Vec<CorpusRun>, CliError> {
    cfg.require_corpora()?;
    let res = load_resources(cfg, Needs::default())?;
    let pool = thread_pool(cfg)?;
    let sims = PairSimTable::default();
    let ctx = PipelineContext {
        lexicon: &res.lexicon,
        sims: &sims,
        stopwords: &res.stopwords,
        configs: &[],
        pool: &pool,
        batch_size: cfg.batch_size,
    };
    let mut runs = Vec::new();
    for (a, b) in cfg.language_pairs() {
        let run = process_corpus(&cfg.corpora[&(a, b)], &ctx)?;
        let path = cfg
            .output_dir
            .join("stats")
            .join(format!("{}.json", pair_label(a, b)));
        write_json(&path, &stats_value(cfg, &run))?;
        info!(
            "{a}-{b}: {} sentence pairs, {} related words, {} aligned",
            run.stats.n_sentences, run.stats.related_words, run.stats.aligned_pairs
        );
        runs.push(run);
    }
    Ok(runs)
}

fn compute_pairsim(res: &Resources, pool: &rayon::ThreadPool) -> Result<PairSimTable, CliError> {
    let table = pool.install(|| build_pair_similarities(&res.lexicon, &res.pairsim_resources()))?;
    Ok(table)
}

fn coverage_value(cfg: &RunConfig, coverage: &CoverageReport) -> serde_json::Value {
    serde_json::json!({
        "static_vectors": coverage.static_vectors,
        "phonetic": {
            "pairs": coverage.phonetic_pairs,
            "skipped": coverage.phonetic_skipped,
        },
        "contextual": coverage.contextual,
        "unavailable_channels": cfg.unavailable.iter().map(|c| c.label()).collect::<Vec<_>>(),
    })
}

/// Writes `pairsim.csv` and `coverage.json`.
pub fn pairsim(cfg: &RunConfig) -> Result<PairSimTable, CliError> {
    let res = load_resources(cfg, Needs::for_channels(cfg))?;
    let pool = thread_pool(cfg)?;
    let table = compute_pairsim(&res, &pool)?;
    let mut csv = Vec::new();
    table
        .write_csv(&res.lexicon, &cfg.channels, &mut csv)
        .expect("writing to memory");
    write_file(&cfg.output_dir.join("pairsim.csv"), &csv)?;
    write_json(
        &cfg.output_dir.join("coverage.json"),
        &coverage_value(cfg, &table.coverage),
    )?;
    info!("pair similarities for {} pairs", res.lexicon.len());
    Ok(table)
}

/// Result of the `matrix` command.
pub struct MatrixOutput {
    pub matrix: IntelligibilityMatrix,
    pub runs: Vec<CorpusRun>,
    pub coverage: CoverageReport,
}

fn compute_matrix(cfg: &RunConfig) -> Result<MatrixOutput, CliError> {
    cfg.require_corpora()?;
    let res = load_resources(cfg, Needs::for_channels(cfg))?;
    let pool = thread_pool(cfg)?;
    let sims = compute_pairsim(&res, &pool)?;
    let ctx = PipelineContext {
        lexicon: &res.lexicon,
        sims: &sims,
        stopwords: &res.stopwords,
        configs: &cfg.channels,
        pool: &pool,
        batch_size: cfg.batch_size,
    };
    let sources: Vec<_> = cfg.corpora.values().cloned().collect();
    let (matrix, runs) = build_matrix(&cfg.languages, &sources, &ctx)?;
    Ok(MatrixOutput {
        matrix,
        runs,
        coverage: sims.coverage,
    })
}

/// Writes `matrix.csv`, `matrix.json` and per-configuration heatmap grids
/// (`heatmaps/<configuration>.csv` and `.svg`).
pub fn matrix(cfg: &RunConfig) -> Result<MatrixOutput, CliError> {
    let out = compute_matrix(cfg)?;
    let mut csv = Vec::new();
    out.matrix.write_csv(&mut csv).expect("writing to memory");
    write_file(&cfg.output_dir.join("matrix.csv"), &csv)?;

    let mut report = out.matrix.to_json();
    report["corpus_stats"] = out.runs.iter().map(|r| stats_value(cfg, r)).collect();
    report["coverage"] = coverage_value(cfg, &out.coverage);
    write_json(&cfg.output_dir.join("matrix.json"), &report)?;

    for &config in &cfg.channels {
        let mut grid = Vec::new();
        out.matrix
            .write_grid_csv(config, &mut grid)
            .expect("writing to memory");
        let dir = cfg.output_dir.join("heatmaps");
        write_file(&dir.join(format!("{}.csv", config.label())), &grid)?;
        write_file(
            &dir.join(format!("{}.svg", config.label())),
            render_svg(&out.matrix, config).as_bytes(),
        )?;
    }
    for a in out.matrix.asymmetry() {
        info!(
            "{} {}-{}: {:.1} vs {:.1} (delta {:+.1})",
            a.config, a.lang_a, a.lang_b, a.score_ab_pct, a.score_ba_pct, a.delta_pct
        );
    }
    for p in out.matrix.phonetic_excess() {
        info!(
            "phonetic above orthographic for {}-{} ({}): {:.1} vs {:.1}",
            p.speaker,
            p.listener,
            p.semantic_channel.as_str(),
            p.phonetic_pct,
            p.orthographic_pct
        );
    }
    Ok(out)
}

/// Writes `eval-<configuration>.json`.
pub fn eval(
    cfg: &RunConfig,
    cloze: &Path,
    channel: Option<&str>,
) -> Result<CorrelationReport, CliError> {
    let config = match channel {
        Some(label) => cfg
            .channels
            .iter()
            .copied()
            .find(|c| c.label() == label)
            .ok_or_else(|| {
                CliError::Config(format!("channel {label} is not selected for this run"))
            })?,
        None => cfg.channels[0],
    };
    if cfg.permutations < MIN_PERMUTATIONS {
        return Err(CliError::Config(format!(
            "at least {MIN_PERMUTATIONS} permutations are required, got {}",
            cfg.permutations
        )));
    }
    if !cloze.is_file() {
        return Err(CliError::Config(format!(
            "cloze file not found: {}",
            cloze.display()
        )));
    }
    let cloze = load_cloze(cloze)?;
    let mut cfg = cfg.clone();
    cfg.channels = vec![config];
    let out = compute_matrix(&cfg)?;
    let report = evaluate_against_cloze(&out.matrix, config, &cloze, cfg.permutations, cfg.seed)?;
    write_json(
        &cfg.output_dir.join(format!("eval-{}.json", config.label())),
        &report,
    )?;
    info!(
        "{}: rho = {:.4}, permutation p = {:.4}, n = {}",
        report.configuration, report.rho, report.p_value, report.n
    );
    Ok(report)
}

/// Writes `needs-transcription.tsv`: `lang<TAB>word` lines for lexicon words
/// without a phonetic transcription.
pub fn needs_transcription(cfg: &RunConfig) -> Result<Vec<(LanguageId, String)>, CliError> {
    let lexicon = load_lexicon(&cfg.lexicon, &cfg.languages)?;
    let phonetic = match &cfg.phonetic_lexicon {
        Some(p) => load_phonetic_lexicon(p)?,
        None => PhoneticLexicon::default(),
    };
    let missing: Vec<(LanguageId, String)> = lexicon
        .words()
        .into_iter()
        .filter(|(l, w)| !phonetic.contains(*l, w))
        .collect();
    let mut text = String::new();
    for (l, w) in &missing {
        text.push_str(&format!("{l}\t{w}\n"));
    }
    write_file(
        &cfg.output_dir.join("needs-transcription.tsv"),
        text.as_bytes(),
    )?;
    info!("{} words need a transcription", missing.len());
    Ok(missing)
}

/// Writes `export-requests/<a>-<b>.jsonl` for every language pair.
pub fn export_requests(cfg: &RunConfig) -> Result<BTreeMap<String, usize>, CliError> {
    cfg.require_corpora()?;
    let res = load_resources(cfg, Needs::default())?;
    let pool = thread_pool(cfg)?;
    let mut written = BTreeMap::new();
    for (a, b) in cfg.language_pairs() {
        let requests = collect_export_requests(
            &cfg.corpora[&(a, b)],
            &res.lexicon,
            &res.stopwords,
            &pool,
            cfg.batch_size,
            MAX_OCCURRENCES,
            cfg.seed,
        )?;
        let mut buf = Vec::new();
        write_export_requests(&requests, &mut buf).expect("writing to memory");
        let label = pair_label(a, b);
        let path: PathBuf = cfg
            .output_dir
            .join("export-requests")
            .join(format!("{label}.jsonl"));
        write_file(&path, &buf)?;
        info!("{label}: {} occurrence requests", requests.len());
        written.insert(label, requests.len());
    }
    Ok(written)
}
