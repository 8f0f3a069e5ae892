use super::FeatureSchema;

/// Mean normalized rank over any target language.
pub const MEAN_BASELINE: f64 = 0.5;

/// Constant predictor. The training targets are accepted for interface parity
/// but ignored: the mean of normalized ranks over a whole language is 0.5 by
/// construction, whatever subset was sampled for training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanBaseline;

impl MeanBaseline {
    pub fn predict(&self, n: usize) -> Vec<f64> {
        vec![MEAN_BASELINE; n]
    }
}

pub fn mean_baseline(_targets_train: &[f64]) -> MeanBaseline {
    MeanBaseline
}

/// Predicts the source article's own normalized rank.
pub fn source_language_baseline(schema: &FeatureSchema, rows: &[Vec<f64>]) -> Vec<f64> {
    let col = schema.source_normrank_column();
    rows.iter().map(|r| r[col]).collect()
}
