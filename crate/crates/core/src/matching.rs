//! Assigning missing articles to editors: an importance cut, then interest
//! scores, then either a greedy round-robin or an exact min-cost-flow matcher.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ConceptId;
use crate::graph::MissingSet;
use crate::interest::InterestVector;
use crate::topics::TopicVector;

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("no prediction for missing concept {0}")]
    MissingPrediction(ConceptId),
    #[error("instance has {edges} candidate edges, budget is {budget}")]
    InstanceTooLarge { edges: usize, budget: usize },
    #[error("no topic vector for candidate {0}")]
    MissingVector(ConceptId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Size of the importance cut applied before interest scoring.
    pub top_k: usize,
    pub k_per_editor: usize,
    /// Largest editor × article count the exact matcher will take.
    pub max_edges: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            top_k: 100_000,
            k_per_editor: 5,
            max_edges: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub concept_id: ConceptId,
    pub source_title: String,
    pub y_pred: f64,
}

/// Missing concepts by descending predicted rank, ties by concept id, cut to
/// the `top_k` most important.
pub fn candidate_pool(missing: &MissingSet, predictions: &BTreeMap<ConceptId, f64>, top_k: usize) -> Result<Vec<PoolEntry>, MatchError> {
    let mut pool = missing
        .entries
        .iter()
        .map(|e| {
            let y = *predictions
                .get(&e.concept_id)
                .ok_or_else(|| MatchError::MissingPrediction(e.concept_id.clone()))?;
            Ok(PoolEntry {
                concept_id: e.concept_id.clone(),
                source_title: e.source_title.clone(),
                y_pred: y,
            })
        })
        .collect::<Result<Vec<_>, MatchError>>()?;
    pool.sort_by(|a, b| b.y_pred.total_cmp(&a.y_pred).then_with(|| a.concept_id.cmp(&b.concept_id)));
    pool.truncate(top_k);
    Ok(pool)
}

/// Interest scores of every (editor, article) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub editors: Vec<String>,
    pub concepts: Vec<ConceptId>,
    /// Row-major, one row per editor.
    pub scores: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(editors: Vec<String>, concepts: Vec<ConceptId>, scores: Vec<f64>) -> Self {
        assert_eq!(scores.len(), editors.len() * concepts.len(), "score matrix shape");
        Self {
            editors,
            concepts,
            scores,
        }
    }

    /// Cosine similarity between each interest vector and each candidate.
    pub fn from_vectors(interests: &[InterestVector], candidates: &[(ConceptId, TopicVector)]) -> Self {
        let mut scores = Vec::with_capacity(interests.len() * candidates.len());
        for iv in interests {
            scores.extend(candidates.iter().map(|(_, v)| iv.values.dot(v)));
        }
        Self::new(
            interests.iter().map(|i| i.editor_id.clone()).collect(),
            candidates.iter().map(|(c, _)| c.clone()).collect(),
            scores,
        )
    }

    pub fn score(&self, editor: usize, article: usize) -> f64 {
        self.scores[editor * self.concepts.len() + article]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub editor_id: String,
    pub concept_id: ConceptId,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPlan {
    /// Sorted by editor, then descending score.
    pub assignments: Vec<Assignment>,
    /// Total interest score.
    pub objective: f64,
}

impl MatchPlan {
    fn from_pairs(m: &ScoreMatrix, pairs: Vec<(usize, usize)>) -> Self {
        let mut assignments: Vec<Assignment> = pairs
            .into_iter()
            .map(|(e, a)| Assignment {
                editor_id: m.editors[e].clone(),
                concept_id: m.concepts[a].clone(),
                score: m.score(e, a),
            })
            .collect();
        assignments.sort_by(|a, b| {
            a.editor_id
                .cmp(&b.editor_id)
                .then(b.score.total_cmp(&a.score))
                .then_with(|| a.concept_id.cmp(&b.concept_id))
        });
        let objective = assignments.iter().map(|a| a.score).sum();
        Self {
            assignments,
            objective,
        }
    }

    /// Mean score per assignment; 0 for an empty plan.
    pub fn average(&self) -> f64 {
        if self.assignments.is_empty() {
            0.0
        } else {
            self.objective / self.assignments.len() as f64
        }
    }

    /// `editor_id, concept_id, source_title, interest_score, y_pred` rows.
    pub fn to_tsv(&self, pool: &[PoolEntry]) -> String {
        let by_id: BTreeMap<&str, &PoolEntry> = pool.iter().map(|p| (p.concept_id.as_str(), p)).collect();
        let mut s = String::from("editor_id\tconcept_id\tsource_title\tinterest_score\ty_pred\n");
        for a in &self.assignments {
            let p = by_id.get(a.concept_id.as_str());
            writeln!(
                s,
                "{}\t{}\t{}\t{:.6}\t{}",
                a.editor_id,
                a.concept_id,
                p.map_or("", |p| p.source_title.as_str()),
                a.score,
                p.map_or(String::new(), |p| format!("{:.6}", p.y_pred))
            )
            .unwrap();
        }
        s
    }
}

/// `k` rounds; in each, editors in ascending id order take their favourite
/// unassigned article. Ties go to the article earlier in the pool.
pub fn greedy_match(m: &ScoreMatrix, k: usize) -> MatchPlan {
    let mut order: Vec<usize> = (0..m.editors.len()).collect();
    order.sort_by(|&a, &b| m.editors[a].cmp(&m.editors[b]));
    let mut taken = vec![false; m.concepts.len()];
    let mut pairs = Vec::new();
    for _ in 0..k {
        for &e in &order {
            let best = (0..m.concepts.len())
                .filter(|&a| !taken[a])
                .fold(None::<usize>, |best, a| match best {
                    Some(b) if m.score(e, b) >= m.score(e, a) => Some(b),
                    _ => Some(a),
                });
            if let Some(a) = best {
                taken[a] = true;
                pairs.push((e, a));
            }
        }
    }
    MatchPlan::from_pairs(m, pairs)
}

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

/// Residual network with paired forward/backward edges.
struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Cheapest residual path by queue-based Bellman-Ford.
    fn shortest_path(&self, s: usize, t: usize) -> Option<(f64, Vec<usize>)> {
        const EPS: f64 = 1e-12;
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::from([s]);
        dist[s] = 0.0;
        queued[s] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &id in &self.adj[u] {
                let e = &self.edges[id];
                if e.cap > 0 && dist[u] + e.cost < dist[e.to] - EPS {
                    dist[e.to] = dist[u] + e.cost;
                    via[e.to] = id;
                    if !queued[e.to] {
                        queued[e.to] = true;
                        queue.push_back(e.to);
                    }
                }
            }
        }
        if dist[t].is_infinite() {
            return None;
        }
        let mut path = Vec::new();
        let mut v = t;
        while v != s {
            let id = via[v];
            path.push(id);
            v = self.edges[id ^ 1].to;
        }
        Some((dist[t], path))
    }
}

/// Maximum-total-score plan: min-cost flow with editor capacity `k` and
/// article capacity 1. Augmentation stops once no path improves the total, so
/// articles that would only lower it stay unassigned.
pub fn optimal_match(m: &ScoreMatrix, k: usize, max_edges: usize) -> Result<MatchPlan, MatchError> {
    let (ne, na) = (m.editors.len(), m.concepts.len());
    let edges = ne * na;
    if edges > max_edges {
        return Err(MatchError::InstanceTooLarge {
            edges,
            budget: max_edges,
        });
    }
    let (src, sink) = (ne + na, ne + na + 1);
    let mut net = Network::new(ne + na + 2);
    for e in 0..ne {
        net.add(src, e, k as i64, 0.0);
    }
    let mut pair_edges = Vec::with_capacity(edges);
    for e in 0..ne {
        for a in 0..na {
            pair_edges.push((net.add(e, ne + a, 1, -m.score(e, a)), e, a));
        }
    }
    for a in 0..na {
        net.add(ne + a, sink, 1, 0.0);
    }
    while let Some((cost, path)) = net.shortest_path(src, sink) {
        if cost >= 0.0 {
            break;
        }
        for id in path {
            net.edges[id].cap -= 1;
            net.edges[id ^ 1].cap += 1;
        }
    }
    let pairs = pair_edges
        .into_iter()
        .filter(|(id, _, _)| net.edges[*id].cap == 0)
        .map(|(_, e, a)| (e, a))
        .collect();
    Ok(MatchPlan::from_pairs(m, pairs))
}
