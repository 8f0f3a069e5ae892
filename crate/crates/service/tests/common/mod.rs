#![allow(dead_code)]

use std::fs;
use std::path::Path;

/// Raw (unnormalized) topic vectors of the fixture's source articles.
pub const VECTORS: [(&str, [f64; 3]); 5] = [
    ("Alpha", [1.0, 0.0, 0.0]),
    ("Beta", [0.0, 1.0, 0.1]),
    ("Gamma", [1.0, 1.0, 1.0]),
    ("Helix", [0.1, 0.9, 0.2]),
    ("Existing", [0.1, 0.9, 0.2]),
];

/// Missing concepts: (concept, source title, predicted rank).
pub const MISSING: [(&str, &str, f64); 3] = [("Q1", "Alpha", 0.9), ("Q2", "Beta", 0.5), ("Q3", "Gamma", 0.7)];

/// Three missing concepts in en->de, plus two source articles that already
/// exist in German (`Helix`, the seed, and `Existing`, its exact twin).
pub fn write_fixture(dir: &Path) {
    fs::write(dir.join("run.conf"), "source = en\ntarget = de\ntop_k = 100\n").unwrap();
    let mut candidates = String::from("#pair\ten\tde\nconcept_id\tsource_title\tcomponent_size\n");
    let mut predictions = String::from("concept_id\ty_pred\n");
    for (c, t, y) in MISSING {
        candidates.push_str(&format!("{c}\t{t}\t1\n"));
        predictions.push_str(&format!("{c}\t{y}\n"));
    }
    fs::write(dir.join("candidates.tsv"), candidates).unwrap();
    fs::write(dir.join("predictions.tsv"), predictions).unwrap();
    let vectors: String = VECTORS
        .iter()
        .map(|(t, v)| format!("{t}\t{}\t{}\t{}\n", v[0], v[1], v[2]))
        .collect();
    fs::write(dir.join("topic_vectors.tsv"), vectors).unwrap();
}

/// Cosine similarity computed directly from the raw fixture vectors.
pub fn cosine(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

pub fn raw(title: &str) -> [f64; 3] {
    VECTORS.iter().find(|(t, _)| *t == title).unwrap().1
}
