"""Independent recomputation of the fixture's expected outputs.

Reads the raw fixture files and writes expected.json. Uses snowballstemmer
for stemming and scikit-learn's AffinityPropagation for clustering; all
other steps are written out directly. Run: python3 oracle.py
"""
import json
import warnings
import re
import unicodedata
from functools import lru_cache
from pathlib import Path

import numpy as np
import snowballstemmer
from sklearn.cluster import AffinityPropagation

HERE = Path(__file__).parent
warnings.simplefilter("ignore")
LANGS = ("es", "ro")
STEMMERS = {"es": snowballstemmer.stemmer("spanish"), "ro": snowballstemmer.stemmer("romanian")}

LETTER = r"[^\W\d_]"
TOKEN = re.compile(LETTER + r"(?:" + LETTER + r"|[̀-ͯ])*(?:[-'’‐‑]" + LETTER + r"(?:" + LETTER + r"|[̀-ͯ])*)*")


def norm(s):
    s = unicodedata.normalize("NFD", s.lower())
    return "".join(c for c in s if not unicodedata.combining(c))


def stem(lang, w):
    return STEMMERS[lang].stemWord(w)


def lev(a, b):
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


def sim(a, b):
    return 1 - lev(tuple(a), tuple(b)) / max(len(a), len(b))


def dli(s, l):
    if s * l == 1:
        return 1.0
    return s * l * (2 - s - l) / (1 - s * l)


def f32(v):
    return np.asarray(v, dtype=np.float32).astype(np.float64)


# lexicon
pairs = []
seen = set()
for i, line in enumerate((HERE / "lexicon.tsv").read_text(encoding="utf-8").splitlines()):
    if i == 0:
        continue
    la, lb, wa, wb, rel = line.split("\t")
    if la not in LANGS or lb not in LANGS:
        continue
    if la != "es":
        la, lb, wa, wb = lb, la, wb, wa
    key = (norm(wa), norm(wb), rel)
    if key not in seen:
        seen.add(key)
        pairs.append(key)

stops = {}
for lang in LANGS:
    words = set()
    for line in (HERE / "stopwords" / f"{lang}.txt").read_text(encoding="utf-8").splitlines():
        line = line.split("#")[0].strip()
        if line:
            words.add(norm(line))
    stops[lang] = words

# static vectors
static = {}
for lang in LANGS:
    lines = (HERE / "vectors" / f"{lang}.vec").read_text(encoding="utf-8").splitlines()[1:]
    table = {}
    for line in lines:
        parts = line.split()
        table.setdefault(norm(parts[0]), f32([float(x) for x in parts[1:]]))
    static[lang] = table


def resolve(lang, w):
    table = static[lang]
    if w in table:
        return table[w]
    same_stem = sorted((lev(w, k), k) for k in table if stem(lang, k) == stem(lang, w))
    if same_stem:
        return table[same_stem[0][1]]
    prefix = sorted((lev(w, k), k) for k in table if k[:3] == w[:3] and lev(w, k) <= 3)
    if prefix:
        return table[prefix[0][1]]
    return None


def cos(u, v):
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


phon = {}
for i, line in enumerate((HERE / "phonetic.tsv").read_text(encoding="utf-8").splitlines()):
    if i == 0:
        continue
    lang, w, units = line.split("\t")
    phon[(lang, norm(w))] = units.split()

ctx = {}
for line in (HERE / "contextual-es-ro.jsonl").read_text(encoding="utf-8").splitlines():
    r = json.loads(line)
    ctx.setdefault((r["lang"], norm(r["word"])), []).append(f32(r["vector"]))


def centers(vecs):
    X = np.array(vecs)
    if len(X) == 1:
        return [X[0]]
    S = -((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    off = S[~np.eye(len(X), dtype=bool)]
    ap = AffinityPropagation(affinity="precomputed", preference=np.median(off), damping=0.5,
                             max_iter=200, convergence_iter=15, random_state=0).fit(S)
    labels = ap.labels_
    if ap.n_iter_ >= 200 or (labels < 0).any():
        return [X.mean(0)]
    return [X[labels == k].mean(0) for k in sorted(set(labels))]


def contextual(wa, wb):
    if ("es", wa) not in ctx or ("ro", wb) not in ctx:
        return None
    ca, cb = centers(ctx[("es", wa)]), centers(ctx[("ro", wb)])
    m = np.mean([cos(x, y) for x in ca for y in cb])
    return min(1.0, max(0.0, float(m)))


pair_sims = []
for wa, wb, rel in pairs:
    ua, ub = resolve("es", wa), resolve("ro", wb)
    pa, pb = phon.get(("es", wa)), phon.get(("ro", wb))
    pair_sims.append({
        "word_a": wa,
        "word_b": wb,
        "relation": rel,
        "orthographic": sim(wa, wb),
        "phonetic": sim(pa, pb) if pa and pb else None,
        "static": min(1.0, max(0.0, cos(ua, ub))) if ua is not None and ub is not None else None,
        "contextual": contextual(wa, wb),
    })

CONFIGS = [(s, m) for s in ("orthographic", "phonetic") for m in ("static", "contextual")]


def pair_dli(p, config):
    l, s = p[config[0]], p[config[1]]
    return None if l is None or s is None else dli(s, l)


def content(lang, text):
    out = []
    for tok in TOKEN.findall(text):
        n = norm(tok)
        if n not in stops[lang]:
            out.append(stem(lang, n))
    return out


side_word = {"es": 0, "ro": 1}
es_lines = (HERE / "corpus" / "es-ro.es.txt").read_text(encoding="utf-8").splitlines()
ro_lines = (HERE / "corpus" / "es-ro.ro.txt").read_text(encoding="utf-8").splitlines()
stats = dict(n_sentences=0, total_words_a=0, total_words_b=0, related_words=0,
             aligned_pairs=0, matched_occurrences=0)
acc = {c: {"es": [0.0, 0, 0], "ro": [0.0, 0, 0]} for c in CONFIGS}
sentence_scores = []
for es_text, ro_text in zip(es_lines, ro_lines):
    toks = {"es": content("es", es_text), "ro": content("ro", ro_text)}
    stats["n_sentences"] += 1
    stats["total_words_a"] += len(toks["es"])
    stats["total_words_b"] += len(toks["ro"])
    row = {}
    for lang, other in (("es", "ro"), ("ro", "es")):
        for t in toks[lang]:
            matched = [i for i, p in enumerate(pairs) if stem(lang, p[side_word[lang]]) == t]
            if not matched:
                continue
            stats["related_words"] += 1
            stats["matched_occurrences"] += len(matched)
            if any(stem(other, pairs[i][side_word[other]]) in toks[other] for i in matched):
                stats["aligned_pairs"] += 1
            for c in CONFIGS:
                ds = [d for d in (pair_dli(pair_sims[i], c) for i in matched) if d is not None]
                if ds:
                    acc[c][lang][0] += max(ds)
                    acc[c][lang][2] += 1
        for c in CONFIGS:
            acc[c][lang][1] += len(toks[lang])

scores = []
for c in CONFIGS:
    for speaker, listener in (("es", "ro"), ("ro", "es")):
        total, n_content, n_scored = acc[c][speaker]
        scores.append({
            "speaker": speaker, "listener": listener,
            "surface_channel": c[0], "semantic_channel": c[1],
            "score": total / n_content, "n_content_tokens": n_content, "n_scored_tokens": n_scored,
        })

(HERE / "expected.json").write_text(json.dumps(
    {"stats": stats, "pairs": pair_sims, "scores": scores}, indent=2, ensure_ascii=False) + "\n",
    encoding="utf-8")
