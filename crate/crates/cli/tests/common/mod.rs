//! Synthetic multi-language workspaces for driving the command line.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const LANGS: [&str; 5] = ["es", "fr", "it", "pt", "ro"];

// One row per concept, forms in LANGS order.
pub const CONCEPTS: [[&str; 5]; 10] = [
    ["luna", "lune", "luna", "lua", "lună"],
    ["mar", "mer", "mare", "mar", "mare"],
    ["noche", "nuit", "notte", "noite", "noapte"],
    ["agua", "eau", "acqua", "água", "apă"],
    ["pan", "pain", "pane", "pão", "pâine"],
    ["tiempo", "temps", "tempo", "tempo", "timp"],
    ["casa", "maison", "casa", "casa", "casă"],
    ["leche", "lait", "latte", "leite", "lapte"],
    ["fuego", "feu", "fuoco", "fogo", "foc"],
    ["padre", "père", "padre", "pai", "tată"],
];

const FILLERS: [&str; 6] = ["alfa", "beta", "gama", "delta", "zeta", "theta"];

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    pub fn config(&self) -> PathBuf {
        self.path().join("run.toml")
    }

    pub fn out(&self) -> PathBuf {
        self.path().join("out")
    }

    pub fn read_out(&self, rel: &str) -> String {
        std::fs::read_to_string(self.out().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }

    pub fn run(&self, args: &[&str]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_interlex"));
        cmd.arg("--config").arg(self.config()).args(args);
        cmd.output().unwrap()
    }
}

/// Tiny deterministic generator so the workspace does not depend on any
/// RNG crate's stream.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

/// Writes lexicon, stop words, static vectors, corpora for every pair of
/// `corpus_langs`, and a `run.toml` listing `config_langs`. The lexicon
/// always covers all five languages.
pub fn workspace(
    config_langs: &[&str],
    corpus_langs: &[&str],
    sentences: usize,
    seed: u64,
) -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let idx = |l: &str| LANGS.iter().position(|x| *x == l).unwrap();

    let mut lex = String::from("lang_a\tlang_b\tword_a\tword_b\trelation\n");
    for forms in CONCEPTS {
        for a in 0..5 {
            for b in a + 1..5 {
                writeln!(
                    lex,
                    "{}\t{}\t{}\t{}\tcognate",
                    LANGS[a], LANGS[b], forms[a], forms[b]
                )
                .unwrap();
            }
        }
    }
    std::fs::write(root.join("lexicon.tsv"), lex).unwrap();

    std::fs::create_dir_all(root.join("stopwords")).unwrap();
    std::fs::create_dir_all(root.join("vectors")).unwrap();
    for (li, lang) in LANGS.iter().enumerate() {
        std::fs::write(
            root.join("stopwords").join(format!("{lang}.txt")),
            "# function words\nzz\nqq\n",
        )
        .unwrap();
        let mut vec = format!("{} 8\n", CONCEPTS.len());
        for (c, forms) in CONCEPTS.iter().enumerate() {
            vec.push_str(forms[li]);
            for k in 0..8 {
                let base = if k == c % 8 { 1.0 } else { 0.1 };
                let v = base + 0.07 * ((li * 5 + k * 3 + c * 2) % 7) as f64;
                write!(vec, " {v:.4}").unwrap();
            }
            vec.push('\n');
        }
        std::fs::write(root.join("vectors").join(format!("{lang}.vec")), vec).unwrap();
    }

    std::fs::create_dir_all(root.join("corpus")).unwrap();
    let mut rng = Lcg(seed);
    let mut corpora = String::new();
    let mut sorted: Vec<&str> = corpus_langs.to_vec();
    sorted.sort();
    for (i, &a) in sorted.iter().enumerate() {
        for &b in &sorted[i + 1..] {
            let (mut ta, mut tb) = (String::new(), String::new());
            for _ in 0..sentences {
                let len = rng.below(7);
                let (mut wa, mut wb) = (Vec::new(), Vec::new());
                for _ in 0..len {
                    let c = rng.below(CONCEPTS.len());
                    if rng.below(10) != 0 {
                        wa.push(CONCEPTS[c][idx(a)].to_string());
                    }
                    if rng.below(8) != 0 {
                        wb.push(CONCEPTS[c][idx(b)].to_string());
                    }
                    if rng.below(3) == 0 {
                        wa.push(FILLERS[rng.below(FILLERS.len())].to_string());
                    }
                    if rng.below(4) == 0 {
                        wb.push("zz".into());
                    }
                    if rng.below(5) == 0 {
                        wb.push(format!("{}{}", FILLERS[rng.below(FILLERS.len())], b));
                    }
                }
                if !wa.is_empty() {
                    wa[0] = capitalize(&wa[0]);
                }
                writeln!(ta, "{}.", wa.join(" ")).unwrap();
                writeln!(tb, "{}", wb.join(", ")).unwrap();
            }
            std::fs::write(root.join("corpus").join(format!("{a}-{b}.{a}.txt")), ta).unwrap();
            std::fs::write(root.join("corpus").join(format!("{a}-{b}.{b}.txt")), tb).unwrap();
            writeln!(corpora, "\n[corpora.{a}-{b}]\na = \"corpus/{a}-{b}.{a}.txt\"\nb = \"corpus/{a}-{b}.{b}.txt\"").unwrap();
        }
    }

    let langs: Vec<String> = config_langs.iter().map(|l| format!("\"{l}\"")).collect();
    let mut toml = format!(
        "languages = [{}]\nlexicon = \"lexicon.tsv\"\nstopwords_dir = \"stopwords\"\noutput_dir = \"out\"\nseed = 5\n\n[static_embeddings]\n",
        langs.join(", ")
    );
    for lang in LANGS {
        writeln!(toml, "{lang} = \"vectors/{lang}.vec\"").unwrap();
    }
    toml.push_str(&corpora);
    std::fs::write(root.join("run.toml"), toml).unwrap();
    Workspace { dir }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Copies the checked-in two-language fixture into a temporary directory.
pub fn tiny_fixture() -> Workspace {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tiny");
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&src, dir.path());
    let _ = std::fs::remove_dir_all(dir.path().join("out"));
    Workspace { dir }
}

fn copy_dir(src: &Path, dst: &Path) {
    std::fs::create_dir_all(dst).unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let entry = entry.unwrap();
        let target = dst.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// Every file under `dir`, relative path and contents, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}
