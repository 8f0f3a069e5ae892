#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_gapfinder");

/// Small settings that keep a full synthetic run to a few seconds.
pub const QUICK: [&str; 20] = [
    "--synth-concepts",
    "800",
    "--synth-languages",
    "fr:0.5",
    "--synth-editors",
    "30",
    "--n-topics",
    "10",
    "--lda-iterations",
    "60",
    "--forest-trees",
    "30",
    "--forest-depths",
    "8",
    "--min-views",
    "100",
    "--mrr-history-sizes",
    "4,16",
    "--bootstrap-resamples",
    "200",
];

pub fn run(workdir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--workdir")
        .arg(workdir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs and insists on success, returning stdout.
pub fn ok(workdir: &Path, args: &[&str]) -> String {
    let out = run(workdir, args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn synth_pipeline(workdir: &Path, seed: &str) {
    let mut args = vec!["gen-synth", "--seed", seed];
    args.extend(QUICK);
    ok(workdir, &args);
    ok(workdir, &["run-all"]);
}

/// Every file under `dir` keyed by relative path. Stamps have their timing
/// field removed.
pub fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    collect(dir, dir, &mut out);
    out
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for e in fs::read_dir(dir).unwrap().flatten() {
        let p = e.path();
        if p.is_dir() {
            collect(root, &p, out);
            continue;
        }
        let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
        let mut bytes = fs::read(&p).unwrap();
        if rel.ends_with(".stamp.json") {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
            v.as_object_mut().unwrap().remove("timing");
            bytes = serde_json::to_vec(&v).unwrap();
        }
        out.insert(rel, bytes);
    }
}

/// Rows of a TSV file without its header lines.
pub fn rows(path: &Path, header_lines: usize) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(header_lines)
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}
