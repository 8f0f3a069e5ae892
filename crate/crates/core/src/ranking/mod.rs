//! Readership prediction: normalized page-view ranks, per-concept features,
//! a random-forest regressor and the two reference baselines.

mod baselines;
mod features;
mod forest;
mod split;
mod targets;

pub use baselines::{mean_baseline, source_language_baseline, MeanBaseline, MEAN_BASELINE};
pub use features::{
    schema_hash, training_targets, CandidateFilter, FeatureContext, FeatureFamily, FeatureRow, FeatureSchema, FeatureTable, RowRole,
    TableRow, MAX_COUNTRIES, MAX_VIEW_LANGUAGES,
};
pub use forest::{
    cross_validate, default_mtry, fit_forest, train_forest, CvScore, Forest, ForestConfig, ForestModel, RegressionTree, TreeNode,
    MIN_TRAINING_ROWS,
};
pub use split::{kfold, stratified_split};
pub use targets::{compute_rank_targets, RankTable, RankTarget};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::{ConceptId, LanguageCode};
use crate::graph::GraphError;

#[derive(Debug, Error)]
pub enum RankingError {
    #[error("language {0} has no non-redirect article to rank")]
    EmptyLanguage(LanguageCode),
    #[error("concept {0} has no source-language article")]
    UnknownConcept(ConceptId),
    #[error("need at least {needed} training rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("all training targets are equal")]
    DegenerateTarget,
    #[error("target {0} outside (0, 1]")]
    TargetOutOfRange(f64),
    #[error("feature schema {found} does not match model schema {expected}")]
    SchemaMismatch { expected: String, found: String },
    #[error("rows have {found} columns, model expects {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("malformed line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `concept_id<TAB>y_pred` with a header line.
pub fn predictions_to_tsv(predictions: &BTreeMap<ConceptId, f64>) -> String {
    let mut s = String::from("concept_id\ty_pred\n");
    for (c, y) in predictions {
        writeln!(s, "{c}\t{y}").unwrap();
    }
    s
}

pub fn predictions_from_tsv(text: &str) -> Result<BTreeMap<ConceptId, f64>, RankingError> {
    let bad = |line: usize, reason: &str| RankingError::Malformed {
        line,
        reason: reason.to_string(),
    };
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let (c, y) = line.split_once('\t').ok_or_else(|| bad(i + 1, "expected 2 columns"))?;
        let y: f64 = y.parse().map_err(|_| bad(i + 1, "bad y_pred"))?;
        out.insert(c.to_string(), y);
    }
    Ok(out)
}
