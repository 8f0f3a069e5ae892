//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use gapfinder::corpus::synth::planted_token;
use gapfinder::matching::{MatchPlan, ScoreMatrix};
use gapfinder::topics::TopicModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Union-find with path halving; returns the root of every node.
pub fn union_find(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

/// True when two labelings induce the same partition.
pub fn same_partition(a: &[u32], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut fwd: HashMap<u32, usize> = HashMap::new();
    let mut back: HashMap<usize, u32> = HashMap::new();
    a.iter().zip(b).all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

/// Best total score over every feasible plan, by exhaustive search.
pub fn brute_force_optimum(m: &ScoreMatrix, k: usize) -> f64 {
    fn go(m: &ScoreMatrix, k: usize, a: usize, load: &mut [usize], acc: f64, best: &mut f64) {
        if a == m.concepts.len() {
            *best = best.max(acc);
            return;
        }
        go(m, k, a + 1, load, acc, best);
        for e in 0..m.editors.len() {
            if load[e] < k {
                load[e] += 1;
                go(m, k, a + 1, load, acc + m.score(e, a), best);
                load[e] -= 1;
            }
        }
    }
    let mut best = 0.0;
    go(m, k, 0, &mut vec![0; m.editors.len()], 0.0, &mut best);
    best
}

/// Checks uniqueness, capacity, membership and the reported scores of a plan.
pub fn validate_plan(m: &ScoreMatrix, plan: &MatchPlan, k: usize) -> Result<(), String> {
    let mut per_editor: BTreeMap<&str, usize> = BTreeMap::new();
    let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
    let mut total = 0.0;
    for a in &plan.assignments {
        let e = m.editors.iter().position(|x| *x == a.editor_id).ok_or("unknown editor")?;
        let c = m.concepts.iter().position(|x| *x == a.concept_id).ok_or("unknown article")?;
        if let Some(prev) = seen.insert(&a.concept_id, &a.editor_id) {
            return Err(format!("{} assigned to {prev} and {}", a.concept_id, a.editor_id));
        }
        let n = per_editor.entry(&a.editor_id).or_default();
        *n += 1;
        if *n > k {
            return Err(format!("{} exceeds capacity {k}", a.editor_id));
        }
        if a.score != m.score(e, c) {
            return Err(format!("wrong score for ({}, {})", a.editor_id, a.concept_id));
        }
        total += a.score;
    }
    if (total - plan.objective).abs() > 1e-9 {
        return Err("objective is not the sum of scores".into());
    }
    Ok(())
}

/// Random instance with at most 5 editors, 8 articles and k of 1 or 2.
pub fn random_instance(seed: u64) -> (ScoreMatrix, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ne = rng.random_range(1..=5);
    let na = rng.random_range(1..=8);
    let k = rng.random_range(1..=2);
    let scores = (0..ne * na).map(|_| rng.random::<f64>()).collect();
    let m = ScoreMatrix::new(
        (0..ne).map(|i| format!("editor{i}")).collect(),
        (0..na).map(|j| format!("Q{j}")).collect(),
        scores,
    );
    (m, k)
}

/// Recovered topic rows re-indexed onto the planted vocabulary.
pub fn recovered_rows(model: &TopicModel, vocab: usize) -> Vec<Vec<f64>> {
    (0..model.n_topics())
        .map(|t| {
            let row = model.topic_row(t);
            (0..vocab)
                .map(|w| model.token_id(&planted_token(w)).map_or(0.0, |i| row[i as usize]))
                .collect()
        })
        .collect()
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Pairing of planted to recovered topics with the least total variation,
/// by trying every permutation. `(planted, recovered, tv)` per planted topic.
pub fn best_alignment(planted: &[Vec<f64>], recovered: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    fn go(planted: &[Vec<f64>], recovered: &[Vec<f64>], p: usize, used: &mut [bool], cur: &mut Vec<(usize, usize, f64)>, best: &mut (f64, Vec<(usize, usize, f64)>)) {
        if p == planted.len() {
            let total: f64 = cur.iter().map(|a| a.2).sum();
            if total < best.0 {
                *best = (total, cur.clone());
            }
            return;
        }
        for r in 0..recovered.len() {
            if !used[r] {
                used[r] = true;
                cur.push((p, r, total_variation(&planted[p], &recovered[r])));
                go(planted, recovered, p + 1, used, cur, best);
                cur.pop();
                used[r] = false;
            }
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    go(planted, recovered, 0, &mut vec![false; recovered.len()], &mut Vec::new(), &mut best);
    best.1
}
