use std::collections::HashMap;
use std::path::{Path, PathBuf};

use interlex::aggregate::CorpusSource;
use interlex::corpus::StopWords;
use interlex::export::{
    collect_export_requests, load_export_requests, request_counts, write_export_requests,
};
use interlex::lexicon::{Lexicon, Relation};
use interlex::semantics::affinity::negative_squared_euclidean;
use interlex::semantics::{
    cluster_occurrences, contextual_similarity, cosine_similarity, load_contextual_vectors,
    load_static_embeddings, nearest_semantic_neighbor, AffinityPropagation, ClusterSet,
    ContextualVectors, Coverage, EmbeddingStore, OccurrenceRecord, OccurrenceVectors, Resolution,
};
use interlex::LanguageId;
use proptest::prelude::*;

fn l(s: &str) -> LanguageId {
    s.parse().unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn occurrences(vectors: Vec<Vec<f64>>) -> OccurrenceVectors {
    OccurrenceVectors {
        lang: l("es"),
        word: "w".into(),
        entries: vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i as u64, 0, v))
            .collect(),
    }
}

#[test]
fn static_embedding_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("es.vec");
    std::fs::write(
        &p,
        "4 2\nluna 1 0\nciudades 0.5 0.5\nCamión 0 1\nluna 9 9\n",
    )
    .unwrap();
    let store = load_static_embeddings(&p, l("es")).unwrap();
    assert_eq!(store.len(), 3);
    assert_eq!(store.duplicates, 1);
    assert_eq!(store.get("luna"), Some(&[1.0f32, 0.0][..]));

    let exact = store.resolve("luna").unwrap();
    assert_eq!(exact.resolution, Resolution::Exact);
    let accentless = store.resolve("camion").unwrap();
    assert_eq!(
        (accentless.word, accentless.resolution),
        ("Camión", Resolution::Exact)
    );
    let by_stem = store.resolve("ciudad").unwrap();
    assert_eq!(
        (by_stem.word, by_stem.resolution),
        ("ciudades", Resolution::Fallback)
    );
    let by_prefix = store.resolve("lunar").unwrap();
    assert_eq!(
        (by_prefix.word, by_prefix.resolution),
        ("luna", Resolution::Fallback)
    );
    assert!(store.resolve("lunatico").is_none());
    assert!(store.resolve("zzz").is_none());

    let mut cov = Coverage::default();
    for w in ["luna", "ciudad", "zzz", "camion"] {
        cov.record(store.resolve(w).map(|r| r.resolution));
    }
    assert_eq!(
        cov,
        Coverage {
            exact: 2,
            fallback: 1,
            missing: 1
        }
    );
}

#[test]
fn malformed_embedding_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.vec");
    for (text, line) in [
        ("", 1),
        ("2\nluna 1 0\n", 1),
        ("1 2\nluna 1\n", 2),
        ("1 2\nluna 1 x\n", 2),
        ("3 2\nluna 1 0\n", 1),
    ] {
        std::fs::write(&p, text).unwrap();
        match load_static_embeddings(&p, l("es")) {
            Err(interlex::Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn word2vec_round_trip() {
    let store = EmbeddingStore::from_entries(
        l("ro"),
        3,
        [
            ("lună", vec![0.1f32, -2.5, 3.0]),
            ("mare", vec![1e-7, 0.0, 7.25]),
        ],
    )
    .unwrap();
    let mut buf = Vec::new();
    store.write_word2vec(&mut buf).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ro.vec");
    std::fs::write(&p, &buf).unwrap();
    let again = load_static_embeddings(&p, l("ro")).unwrap();
    assert_eq!(again.words(), store.words());
    for i in 0..store.len() {
        assert_eq!(again.vector(i), store.vector(i));
    }
}

#[test]
fn nearest_neighbor_prefers_meaning() {
    let src = EmbeddingStore::from_entries(l("es"), 2, [("pariente", vec![1.0, 0.1])]).unwrap();
    let tgt = EmbeddingStore::from_entries(
        l("ro"),
        2,
        [
            ("ruda", vec![1.0, 0.1]),
            ("parinte", vec![0.1, 1.0]),
            ("neam", vec![1.0, 0.1]),
        ],
    )
    .unwrap();
    let (w, s) =
        nearest_semantic_neighbor(&src, "pariente", &tgt, &["parinte", "ruda", "neam"]).unwrap();
    assert_eq!(w, "neam");
    assert!((s - 1.0).abs() < 1e-6);
    assert!(nearest_semantic_neighbor(&src, "pariente", &tgt, &["absent"]).is_err());
    assert!(nearest_semantic_neighbor(&src, "zzz", &tgt, &["ruda"]).is_err());
}

#[test]
fn identical_occurrences_form_one_cluster() {
    let cs = cluster_occurrences(&occurrences(vec![vec![0.3, 0.4, 0.5]; 12])).unwrap();
    assert_eq!(cs.centers.len(), 1);
    assert_eq!(cs.sizes, [12]);
    assert!(!cs.fallback);
    for (c, x) in cs.centers[0].iter().zip([0.3, 0.4, 0.5]) {
        assert!((c - x).abs() < 1e-12);
    }
}

#[test]
fn two_distinct_senses() {
    let p = vec![1.0, 0.0, 0.0];
    let q = vec![0.0, 1.0, 0.0];
    let mut v = vec![p.clone(); 10];
    v.extend(vec![q.clone(); 10]);
    let cs = cluster_occurrences(&occurrences(v)).unwrap();
    assert_eq!(cs.centers.len(), 2);
    assert_eq!(cs.sizes, [10, 10]);
    assert_eq!(cs.centers[0], p);
    assert_eq!(cs.centers[1], q);
    assert!(cs.labels[..10].iter().all(|&x| x == 0));
    assert!(cs.labels[10..].iter().all(|&x| x == 1));
}

const BLOBS: [[f64; 2]; 20] = [
    [0.537, 0.131],
    [0.029, -0.559],
    [-0.083, -0.106],
    [-0.025, -0.188],
    [-0.013, -0.143],
    [-0.394, 0.265],
    [0.264, 0.513],
    [0.015, -0.121],
    [-0.164, -0.464],
    [0.295, -0.33],
    [3.644, 3.938],
    [4.446, 4.071],
    [3.693, 3.786],
    [4.188, 3.952],
    [3.769, 3.931],
    [4.224, 4.593],
    [3.627, 3.812],
    [3.759, 3.274],
    [3.723, 3.693],
    [4.337, 3.96],
];

#[test]
fn two_blobs_match_reference_implementation() {
    // Reference: scikit-learn AffinityPropagation(random_state=0) on the
    // negative squared Euclidean matrix with the off-diagonal median as
    // preference.
    let points: Vec<Vec<f64>> = BLOBS.iter().map(|p| p.to_vec()).collect();
    let fit = AffinityPropagation::default().fit(&negative_squared_euclidean(&points), 20);
    assert!(fit.converged);
    assert_eq!(fit.exemplars, [7, 14]);
    assert_eq!(fit.labels, [[0; 10], [1; 10]].concat());

    let cs = cluster_occurrences(&occurrences(points)).unwrap();
    let expected = [[0.046099999999999995, -0.1002], [3.941, 3.9010000000000007]];
    for (c, e) in cs.centers.iter().zip(expected) {
        assert!(
            (c[0] - e[0]).abs() < 1e-6 && (c[1] - e[1]).abs() < 1e-6,
            "{c:?}"
        );
    }
}

#[test]
fn non_convergence_falls_back_to_global_mean() {
    let ap = AffinityPropagation {
        max_iter: 1,
        ..Default::default()
    };
    let points: Vec<Vec<f64>> = BLOBS.iter().map(|p| p.to_vec()).collect();
    let cs =
        interlex::semantics::contextual::cluster_with(&occurrences(points.clone()), &ap).unwrap();
    assert!(cs.fallback);
    assert_eq!(cs.sizes, [20]);
    let mean_x: f64 = points.iter().map(|p| p[0]).sum::<f64>() / 20.0;
    assert!((cs.centers[0][0] - mean_x).abs() < 1e-12);
}

fn set(centers: Vec<Vec<f64>>) -> ClusterSet {
    ClusterSet {
        lang: l("es"),
        word: "w".into(),
        sizes: vec![1; centers.len()],
        labels: (0..centers.len()).collect(),
        centers,
        fallback: false,
    }
}

#[test]
fn contextual_similarity_examples() {
    let a = set(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let b = set(vec![vec![1.0, 0.0]]);
    assert!((contextual_similarity(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    assert!(contextual_similarity(&set(vec![]), &b).is_err());
    let s = cosine_similarity(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
    assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
}

#[test]
fn exporter_sample_round_trip() {
    let path = fixtures().join("exporter-sample.jsonl");
    let vectors = load_contextual_vectors(&path).unwrap();
    assert_eq!(vectors.dim, 3);
    assert_eq!(vectors.len(), 3);
    let luna_es = vectors.get(l("es"), "luna").unwrap();
    assert_eq!(luna_es.entries.len(), 3);
    assert_eq!(luna_es.entries[2], (7, 4, vec![-2.0, 0.5, 0.0]));
    // Words are normalized on load.
    let luna_ro = vectors.get(l("ro"), "luna").unwrap();
    assert_eq!(luna_ro.entries.len(), 2);
    assert!(vectors.get(l("ro"), "lună").is_none());

    let text = std::fs::read_to_string(&path).unwrap();
    let records: Vec<OccurrenceRecord> = text
        .lines()
        .map(|line| serde_json::from_str(line).unwrap())
        .collect();
    let rewritten: String = records
        .iter()
        .map(|r| serde_json::to_string(r).unwrap() + "\n")
        .collect();
    assert_eq!(rewritten, text);
    let rebuilt = ContextualVectors::from_records(records).unwrap();
    assert_eq!(rebuilt.get(l("es"), "luna"), Some(luna_es));
    assert_eq!(rebuilt.get(l("ro"), "luna"), Some(luna_ro));
}

#[test]
fn contextual_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.jsonl");
    let rec = |w: &str, v: &str| {
        format!(r#"{{"lang":"es","word":"{w}","sent_id":0,"token_index":0,"vector":{v}}}"#)
    };
    for (text, line) in [
        (
            format!("{}\n{}\n", rec("a", "[1,2]"), rec("b", "[1,2,3]")),
            2,
        ),
        (format!("{}\n", rec("a", "[]")), 1),
        ("{not json}\n".to_string(), 1),
    ] {
        std::fs::write(&p, text).unwrap();
        match load_contextual_vectors(&p) {
            Err(interlex::Error::Parse { line: got, .. }) => assert_eq!(got, line),
            other => panic!("{other:?}"),
        }
    }
    let many: String = (0..201).map(|_| rec("a", "[1.0]") + "\n").collect();
    std::fs::write(&p, many).unwrap();
    assert!(matches!(
        load_contextual_vectors(&p),
        Err(interlex::Error::Parse { line: 201, .. })
    ));
}

#[test]
fn export_requests_sample_round_trip() {
    let path = fixtures().join("export-requests-sample.jsonl");
    let requests = load_export_requests(&path).unwrap();
    assert_eq!(requests.len(), 6);
    assert_eq!(requests[1].sentence, "Luna llena, \"luna\" nueva.");
    let mut buf = Vec::new();
    write_export_requests(&requests, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        std::fs::read_to_string(&path).unwrap()
    );
    let counts = request_counts(&requests);
    assert_eq!(counts[&(l("es"), "luna".to_string())], 3);
    assert_eq!(counts[&(l("ro"), "mare".to_string())], 1);
}

fn write_corpus(dir: &Path, n: usize) -> CorpusSource {
    let a = dir.join("c.es.txt");
    let b = dir.join("c.ro.txt");
    let mut ta = String::new();
    let mut tb = String::new();
    for i in 0..n {
        ta.push_str(&format!("La luna {i} y el mar, luna\n"));
        tb.push_str(&format!("Luna {i} și marea\n"));
    }
    std::fs::write(&a, ta).unwrap();
    std::fs::write(&b, tb).unwrap();
    CorpusSource {
        lang_a: l("es"),
        lang_b: l("ro"),
        path_a: a,
        path_b: b,
    }
}

#[test]
fn export_requests_are_capped_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let source = write_corpus(dir.path(), 300);
    let lex = Lexicon::from_rows([
        (l("es"), l("ro"), "luna", "lună", Relation::Cognate),
        (l("es"), l("ro"), "mar", "mare", Relation::Cognate),
    ])
    .unwrap();
    let sw: HashMap<_, _> = [
        (l("es"), StopWords::new(["la", "y", "el"])),
        (l("ro"), StopWords::new(["și"])),
    ]
    .into();
    let run = |workers, batch, seed| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        collect_export_requests(&source, &lex, &sw, &pool, batch, 200, seed).unwrap()
    };
    let reqs = run(1, 7, 1);
    let counts = request_counts(&reqs);
    // es luna occurs twice per sentence, mar once; ro luna once, marea once.
    assert_eq!(counts[&(l("es"), "luna".into())], 200);
    assert_eq!(counts[&(l("es"), "mar".into())], 200);
    assert_eq!(counts[&(l("ro"), "luna".into())], 200);
    assert_eq!(counts[&(l("ro"), "mare".into())], 200);
    assert!(reqs.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(reqs, run(8, 64, 1));
    assert_ne!(reqs, run(1, 7, 2));
    for r in &reqs {
        assert!(r.sentence.contains(&r.sent_id.to_string()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cluster_sizes_partition_occurrences(
        points in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..25)
    ) {
        let n = points.len();
        let cs = cluster_occurrences(&occurrences(points)).unwrap();
        prop_assert_eq!(cs.sizes.iter().sum::<usize>(), n);
        prop_assert!(cs.sizes.iter().all(|&s| s > 0));
        prop_assert_eq!(cs.labels.len(), n);
        prop_assert!(cs.labels.iter().all(|&x| x < cs.centers.len()));
    }

    #[test]
    fn contextual_similarity_in_unit_interval(
        a in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..5),
        b in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..5),
    ) {
        prop_assume!(a.iter().chain(&b).all(|v| v.iter().any(|x| x.abs() > 1e-6)));
        let (a, b) = (set(a), set(b));
        let s = contextual_similarity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!((s - contextual_similarity(&b, &a).unwrap()).abs() < 1e-12);
    }
}
