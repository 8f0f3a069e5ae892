//! Bootstrap-aggregated CART regression trees.
//!
//! Every node draws its candidate features from its own seed, derived from its
//! parent's. A tree grown to depth `d` is therefore exactly the full tree cut at
//! depth `d`, and a forest of `n` trees is the first `n` trees of any larger
//! forest with the same seed. Cross-validation grows one forest per fold and
//! reads every grid point off it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::kfold;
use super::{schema_hash, FeatureTable, RankingError};
use crate::seeds::derive_seed;

const LEAF: u32 = u32::MAX;
pub const MIN_TRAINING_ROWS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Split column, or `u32::MAX` for a leaf.
    pub feature: u32,
    /// Rows with `x[feature] <= threshold` go left.
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    /// Mean target of the node's bootstrap rows; used when prediction stops here.
    pub value: f64,
}

impl TreeNode {
    fn is_leaf(&self) -> bool {
        self.feature == LEAF
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    /// Value reached after at most `max_depth` splits.
    pub fn predict(&self, x: &[f64], max_depth: Option<usize>) -> f64 {
        let mut i = 0usize;
        let mut depth = 0usize;
        loop {
            let n = &self.nodes[i];
            if n.is_leaf() || max_depth.is_some_and(|d| depth >= d) {
                return n.value;
            }
            i = if x[n.feature as usize] <= n.threshold { n.left } else { n.right } as usize;
            depth += 1;
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &RegressionTree, i: usize) -> usize {
            let n = &t.nodes[i];
            if n.is_leaf() {
                0
            } else {
                1 + walk(t, n.left as usize).max(walk(t, n.right as usize))
            }
        }
        walk(self, 0)
    }

    /// Same predictions as `predict(x, Some(depth))`, with the unreachable
    /// nodes dropped.
    pub fn truncated(&self, depth: usize) -> Self {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0usize, None::<(usize, bool)>)];
        while let Some((i, d, parent)) = stack.pop() {
            let n = &self.nodes[i];
            let at = out.len();
            let mut node = n.clone();
            if d >= depth {
                node.feature = LEAF;
            }
            if let Some((p, is_left)) = parent {
                let p: &mut TreeNode = &mut out[p];
                if is_left {
                    p.left = at as u32;
                } else {
                    p.right = at as u32;
                }
            }
            let split = !node.is_leaf();
            if !split {
                node.left = 0;
                node.right = 0;
                node.threshold = 0.0;
            }
            out.push(node);
            if split {
                stack.push((n.right as usize, d + 1, Some((at, false))));
                stack.push((n.left as usize, d + 1, Some((at, true))));
            }
        }
        Self { nodes: out }
    }
}

/// Columns re-encoded as dense ranks so node sorting works on integers.
struct Prepared {
    ranks: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
}

impl Prepared {
    fn new(x: &[Vec<f64>], n_cols: usize) -> Self {
        let mut ranks = Vec::with_capacity(n_cols);
        let mut values = Vec::with_capacity(n_cols);
        for c in 0..n_cols {
            let mut order: Vec<usize> = (0..x.len()).collect();
            order.sort_by(|&a, &b| x[a][c].total_cmp(&x[b][c]));
            let mut r = vec![0u32; x.len()];
            let mut distinct: Vec<f64> = Vec::new();
            for &i in &order {
                let v = x[i][c];
                if distinct.last().is_none_or(|&last| last.total_cmp(&v).is_ne()) {
                    distinct.push(v);
                }
                r[i] = (distinct.len() - 1) as u32;
            }
            ranks.push(r);
            values.push(distinct);
        }
        Self { ranks, values }
    }
}

fn grow_tree(prep: &Prepared, y: &[f64], mtry: usize, max_depth: Option<usize>, seed: u64) -> RegressionTree {
    let n = y.len();
    let n_cols = prep.ranks.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample: Vec<u32> = (0..n).map(|_| rng.random_range(0..n) as u32).collect();

    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut stack = vec![(sample, 0usize, derive_seed(seed, 0), None::<(usize, bool)>)];
    let mut buf: Vec<(u32, f64)> = Vec::new();
    let mut features: Vec<usize> = (0..n_cols).collect();

    while let Some((rows, depth, node_seed, parent)) = stack.pop() {
        let at = nodes.len();
        if let Some((p, is_left)) = parent {
            let p: &mut TreeNode = &mut nodes[p];
            if is_left {
                p.left = at as u32;
            } else {
                p.right = at as u32;
            }
        }
        let total: f64 = rows.iter().map(|&r| y[r as usize]).sum();
        let count = rows.len() as f64;
        let mean = total / count;
        nodes.push(TreeNode {
            feature: LEAF,
            threshold: 0.0,
            left: 0,
            right: 0,
            value: mean,
        });
        let pure = rows.iter().all(|&r| y[r as usize] == y[rows[0] as usize]);
        if rows.len() < 2 || pure || max_depth.is_some_and(|d| depth >= d) {
            continue;
        }

        // Visit features in a node-specific order until `mtry` non-constant
        // ones have been scored.
        let mut node_rng = ChaCha8Rng::seed_from_u64(node_seed);
        features.sort_unstable();
        features.shuffle(&mut node_rng);
        let mut best: Option<(f64, usize, u32, u32)> = None;
        let mut scored = 0;
        for &f in &features {
            if scored == mtry {
                break;
            }
            let ranks = &prep.ranks[f];
            buf.clear();
            buf.extend(rows.iter().map(|&r| (ranks[r as usize], y[r as usize])));
            buf.sort_unstable_by_key(|e| e.0);
            if buf[0].0 == buf[buf.len() - 1].0 {
                continue;
            }
            scored += 1;
            let mut left_sum = 0.0;
            for i in 0..buf.len() - 1 {
                left_sum += buf[i].1;
                if buf[i].0 == buf[i + 1].0 {
                    continue;
                }
                let nl = (i + 1) as f64;
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / nl + right_sum * right_sum / (count - nl);
                if best.is_none_or(|b| score > b.0) {
                    best = Some((score, f, buf[i].0, buf[i + 1].0));
                }
            }
        }
        let Some((_, f, lo, hi)) = best else { continue };

        let ranks = &prep.ranks[f];
        let (left, right): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| ranks[r as usize] <= lo);
        let a = prep.values[f][lo as usize];
        let b = prep.values[f][hi as usize];
        let mid = a + (b - a) / 2.0;
        let node = &mut nodes[at];
        node.feature = f as u32;
        node.threshold = if mid < b { mid } else { a };
        stack.push((right, depth + 1, derive_seed(node_seed, 2), Some((at, false))));
        stack.push((left, depth + 1, derive_seed(node_seed, 1), Some((at, true))));
    }
    RegressionTree { nodes }
}

/// An ensemble of trees evaluated up to a common depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<RegressionTree>,
    pub max_depth: Option<usize>,
}

impl Forest {
    /// Mean over trees, clipped to `(0, 1]`.
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        self.predict_prefix(x, self.trees.len(), self.max_depth)
    }

    /// Prediction of the first `n_trees` trees cut at `max_depth`.
    pub fn predict_prefix(&self, x: &[f64], n_trees: usize, max_depth: Option<usize>) -> f64 {
        let s: f64 = self.trees[..n_trees].iter().map(|t| t.predict(x, max_depth)).sum();
        clip(s / n_trees as f64)
    }
}

fn clip(v: f64) -> f64 {
    v.clamp(f64::MIN_POSITIVE, 1.0)
}

/// Default number of candidate features per split: a third, rounded up.
pub fn default_mtry(n_cols: usize) -> usize {
    n_cols.div_ceil(3).max(1)
}

/// Grows `n_trees` bootstrap trees with no validation of the targets.
pub fn fit_forest(x: &[Vec<f64>], y: &[f64], n_trees: usize, max_depth: Option<usize>, mtry: Option<usize>, seed: u64) -> Forest {
    assert_eq!(x.len(), y.len(), "one target per row");
    assert!(!x.is_empty(), "cannot fit an empty training set");
    let n_cols = x[0].len();
    let prep = Prepared::new(x, n_cols);
    let mtry = mtry.unwrap_or_else(|| default_mtry(n_cols)).clamp(1, n_cols.max(1));
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| grow_tree(&prep, y, mtry, max_depth, derive_seed(seed, t as u64)))
        .collect();
    Forest { trees, max_depth }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees_grid: Vec<usize>,
    /// `None` grows trees until their leaves are pure.
    pub max_depth_grid: Vec<Option<usize>>,
    pub folds: usize,
    /// Candidate features per split; `None` means a third of the columns.
    pub mtry: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees_grid: vec![50, 100, 200],
            max_depth_grid: vec![Some(8), Some(12), Some(16), None],
            folds: 5,
            mtry: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub rmse: f64,
}

/// A trained forest tied to the feature columns it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub schema_hash: String,
    pub columns: Vec<String>,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub mtry: usize,
    pub seed: u64,
    pub cv: Vec<CvScore>,
    pub forest: Forest,
}

impl ForestModel {
    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, RankingError> {
        if let Some(r) = rows.iter().find(|r| r.len() != self.columns.len()) {
            return Err(RankingError::WidthMismatch {
                expected: self.columns.len(),
                found: r.len(),
            });
        }
        Ok(rows.par_iter().map(|r| self.forest.predict_one(r)).collect())
    }

    pub fn predict(&self, table: &FeatureTable) -> Result<Vec<f64>, RankingError> {
        if table.schema_hash != self.schema_hash {
            return Err(RankingError::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found: table.schema_hash.clone(),
            });
        }
        let rows: Vec<Vec<f64>> = table.rows.iter().map(|r| r.values.clone()).collect();
        self.predict_rows(&rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// K-fold RMSE of every grid point. Grid points are listed with tree counts
/// ascending, then depths ascending with unlimited depth last.
pub fn cross_validate(x: &[Vec<f64>], y: &[f64], config: &ForestConfig) -> Vec<CvScore> {
    let mut trees_grid = config.n_trees_grid.clone();
    trees_grid.sort_unstable();
    trees_grid.dedup();
    let mut depth_grid = config.max_depth_grid.clone();
    depth_grid.sort_by_key(|d| d.unwrap_or(usize::MAX));
    depth_grid.dedup();
    let max_trees = *trees_grid.last().expect("non-empty tree grid");
    let grow_depth = *depth_grid.last().expect("non-empty depth grid");

    let folds = kfold(x.len(), config.folds.max(2), derive_seed(config.seed, u64::MAX));
    let mut sse = vec![vec![0.0f64; trees_grid.len()]; depth_grid.len()];
    for (k, held) in folds.iter().enumerate() {
        let mut is_held = vec![false; x.len()];
        for &i in held {
            is_held[i] = true;
        }
        let (tx, ty): (Vec<Vec<f64>>, Vec<f64>) = (0..x.len())
            .filter(|&i| !is_held[i])
            .map(|i| (x[i].clone(), y[i]))
            .unzip();
        let forest = fit_forest(&tx, &ty, max_trees, grow_depth, config.mtry, derive_seed(config.seed, k as u64 + 1));
        for &i in held {
            for (d, depth) in depth_grid.iter().enumerate() {
                let mut sum = 0.0;
                let mut next = 0;
                for (t, tree) in forest.trees.iter().enumerate() {
                    sum += tree.predict(&x[i], *depth);
                    if t + 1 == trees_grid[next] {
                        let err = clip(sum / (t + 1) as f64) - y[i];
                        sse[d][next] += err * err;
                        next += 1;
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for (ti, &n_trees) in trees_grid.iter().enumerate() {
        for (di, &max_depth) in depth_grid.iter().enumerate() {
            out.push(CvScore {
                n_trees,
                max_depth,
                rmse: (sse[di][ti] / x.len() as f64).sqrt(),
            });
        }
    }
    out
}

/// Cross-validates the hyperparameter grid, then refits the best point on all
/// rows. Ties go to fewer trees, then shallower trees.
pub fn train_forest(x: &[Vec<f64>], y: &[f64], columns: &[String], config: &ForestConfig) -> Result<ForestModel, RankingError> {
    if x.len() < MIN_TRAINING_ROWS {
        return Err(RankingError::TooFewRows {
            needed: MIN_TRAINING_ROWS,
            got: x.len(),
        });
    }
    if let Some(r) = x.iter().find(|r| r.len() != columns.len()) {
        return Err(RankingError::WidthMismatch {
            expected: columns.len(),
            found: r.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
        return Err(RankingError::TargetOutOfRange(bad));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(RankingError::DegenerateTarget);
    }
    let cv = cross_validate(x, y, config);
    let best = cv
        .iter()
        .fold(None::<&CvScore>, |acc, s| match acc {
            Some(b) if b.rmse <= s.rmse => Some(b),
            _ => Some(s),
        })
        .expect("non-empty grid")
        .clone();
    let n_cols = columns.len();
    let mtry = config.mtry.unwrap_or_else(|| default_mtry(n_cols)).clamp(1, n_cols.max(1));
    let mut forest = fit_forest(x, y, best.n_trees, best.max_depth, Some(mtry), derive_seed(config.seed, 0));
    if let Some(d) = best.max_depth {
        forest.trees = forest.trees.iter().map(|t| t.truncated(d)).collect();
    }
    Ok(ForestModel {
        schema_hash: schema_hash(columns),
        columns: columns.to_vec(),
        n_trees: best.n_trees,
        max_depth: best.max_depth,
        mtry,
        seed: config.seed,
        cv,
        forest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let y = x.iter().map(|r| 0.05 + 0.9 * r[0]).collect();
        (x, y)
    }

    #[test]
    fn single_tree_on_one_row_returns_its_target() {
        let f = fit_forest(&[vec![1.0, 2.0]], &[0.37], 1, None, None, 4);
        assert_eq!(f.predict_one(&[5.0, -1.0]), 0.37);
    }

    #[test]
    fn constant_target_predicts_the_constant() {
        let (x, _) = toy(50, 1);
        let y = vec![0.5; 50];
        let f = fit_forest(&x, &y, 10, None, None, 2);
        assert!(x.iter().all(|r| f.predict_one(r) == 0.5));
    }

    #[test]
    fn depth_limit_equals_truncation_of_full_tree() {
        let (x, y) = toy(200, 3);
        let full = fit_forest(&x, &y, 3, None, None, 9);
        let cut = fit_forest(&x, &y, 3, Some(4), None, 9);
        for (a, b) in full.trees.iter().zip(&cut.trees) {
            assert_eq!(&a.truncated(4), b);
            assert!(b.depth() <= 4);
        }
        let small = fit_forest(&x, &y, 2, None, None, 9);
        assert_eq!(small.trees[..], full.trees[..2]);
    }

    #[test]
    fn train_rejects_degenerate_inputs() {
        let (x, y) = toy(10, 1);
        let cols: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
        let cfg = ForestConfig::default();
        assert!(matches!(train_forest(&x, &y, &cols, &cfg), Err(RankingError::TooFewRows { .. })));
        let (x, _) = toy(30, 1);
        assert!(matches!(
            train_forest(&x, &[0.5; 30], &cols, &cfg),
            Err(RankingError::DegenerateTarget)
        ));
        let mut y = vec![0.5; 30];
        y[3] = 0.0;
        assert!(matches!(
            train_forest(&x, &y, &cols, &cfg),
            Err(RankingError::TargetOutOfRange(_))
        ));
    }

    #[test]
    fn model_round_trips_through_json() {
        let (x, y) = toy(60, 5);
        let cols: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
        let cfg = ForestConfig {
            n_trees_grid: vec![5, 10],
            max_depth_grid: vec![Some(3), None],
            folds: 3,
            ..ForestConfig::default()
        };
        let m = train_forest(&x, &y, &cols, &cfg).unwrap();
        let back = ForestModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.predict_rows(&x).unwrap(), m.predict_rows(&x).unwrap());
    }
}
