//! Run configuration: a flat `key = value` file, one line per setting.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{LanguageCode, LanguageSpec, SyntheticSpec};
use crate::interest::InterestMethod;
use crate::ranking::ForestConfig;
use crate::topics::LdaConfig;

/// Stage artifact names inside a working directory.
pub mod files {
    pub const RUN_CONF: &str = "run.conf";
    pub const GROUND_TRUTH: &str = "ground_truth.json";
    pub const COMPONENTS: &str = "components.tsv";
    pub const MISSING: &str = "missing.tsv";
    pub const LDA_MODEL: &str = "lda_model.tsv";
    pub const TOPIC_VECTORS: &str = "topic_vectors.tsv";
    pub const FEATURES: &str = "features.tsv";
    /// Missing concepts that pass the candidate filters.
    pub const CANDIDATES: &str = "candidates.tsv";
    pub const MODEL: &str = "model.json";
    pub const RANKER_REPORT: &str = "ranker_report.json";
    pub const PREDICTIONS: &str = "predictions.tsv";
    pub const INTERESTS: &str = "interests.tsv";
    pub const PLAN: &str = "plan.tsv";
    pub const REPORT: &str = "report.json";
    pub const MRR_SWEEP: &str = "mrr_sweep.tsv";
    pub const PRECISION_SAMPLE: &str = "precision_sample.tsv";
    pub const PRECISION_TALLY: &str = "precision_tally.json";
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matcher {
    Greedy,
    Optimal,
}

impl FromStr for Matcher {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Matcher::Greedy),
            "optimal" => Ok(Matcher::Optimal),
            _ => Err("expected greedy or optimal".into()),
        }
    }
}

impl Matcher {
    pub fn as_str(self) -> &'static str {
        match self {
            Matcher::Greedy => "greedy",
            Matcher::Optimal => "optimal",
        }
    }
}

/// Every pipeline setting. Paths are relative to the working directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: String,
    pub source: LanguageCode,
    pub target: LanguageCode,
    pub seed: u64,
    pub n_topics: usize,
    pub lda_alpha: Option<f64>,
    pub lda_beta: f64,
    pub lda_iterations: usize,
    pub lda_inference_sweeps: usize,
    pub forest_trees: Vec<usize>,
    pub forest_depths: Vec<Option<usize>>,
    pub forest_folds: usize,
    pub forest_mtry: Option<usize>,
    pub test_fraction: f64,
    pub min_bytes: u64,
    pub min_views: u64,
    pub history_size: usize,
    pub interest_method: InterestMethod,
    pub top_k: usize,
    pub k_per_editor: usize,
    pub matcher: Matcher,
    pub max_edges: usize,
    pub bootstrap_resamples: usize,
    pub mrr_history_sizes: Vec<usize>,
    pub mrr_methods: Vec<InterestMethod>,
    pub evaluate_stepwise: bool,
    pub synth_concepts: usize,
    pub synth_languages: Vec<LanguageSpec>,
    pub synth_topics: usize,
    pub synth_vocab: usize,
    pub synth_doc_length: usize,
    pub synth_editors: usize,
    pub synth_edits_per_editor: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SyntheticSpec::default();
        Self {
            corpus: "corpus".into(),
            source: "en".into(),
            target: "fr".into(),
            seed: 42,
            n_topics: crate::topics::DEFAULT_TOPICS,
            lda_alpha: None,
            lda_beta: 0.01,
            lda_iterations: 200,
            lda_inference_sweeps: 20,
            forest_trees: vec![50, 100, 200],
            forest_depths: vec![Some(8), Some(12), Some(16), None],
            forest_folds: 5,
            forest_mtry: None,
            test_fraction: 0.2,
            min_bytes: 1500,
            min_views: 1000,
            history_size: crate::interest::DEFAULT_HISTORY_SIZE,
            interest_method: InterestMethod::WeightedAverage,
            top_k: 100_000,
            k_per_editor: 5,
            matcher: Matcher::Greedy,
            max_edges: 2_000_000,
            bootstrap_resamples: 1000,
            mrr_history_sizes: vec![1, 2, 4, 8, 16, 32, 64],
            mrr_methods: InterestMethod::ALL.to_vec(),
            evaluate_stepwise: false,
            synth_concepts: synth.n_concepts,
            synth_languages: synth.languages,
            synth_topics: synth.n_topics,
            synth_vocab: synth.vocab_size,
            synth_doc_length: synth.doc_length,
            synth_editors: synth.n_editors,
            synth_edits_per_editor: synth.edits_per_editor,
        }
    }
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn opt<T: ToString>(x: &Option<T>, none: &str) -> String {
    x.as_ref().map_or(none.to_string(), T::to_string)
}

impl RunConfig {
    pub const KEYS: [&'static str; 33] = [
        "corpus",
        "source",
        "target",
        "seed",
        "n_topics",
        "lda_alpha",
        "lda_beta",
        "lda_iterations",
        "lda_inference_sweeps",
        "forest_trees",
        "forest_depths",
        "forest_folds",
        "forest_mtry",
        "test_fraction",
        "min_bytes",
        "min_views",
        "history_size",
        "interest_method",
        "top_k",
        "k_per_editor",
        "matcher",
        "max_edges",
        "bootstrap_resamples",
        "mrr_history_sizes",
        "mrr_methods",
        "evaluate_stepwise",
        "synth_concepts",
        "synth_languages",
        "synth_topics",
        "synth_vocab",
        "synth_doc_length",
        "synth_editors",
        "synth_edits_per_editor",
    ];

    /// Current value of every key, in `KEYS` order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let v = |k: &'static str| -> String {
            match k {
                "corpus" => self.corpus.clone(),
                "source" => self.source.to_string(),
                "target" => self.target.to_string(),
                "seed" => self.seed.to_string(),
                "n_topics" => self.n_topics.to_string(),
                "lda_alpha" => opt(&self.lda_alpha, "auto"),
                "lda_beta" => self.lda_beta.to_string(),
                "lda_iterations" => self.lda_iterations.to_string(),
                "lda_inference_sweeps" => self.lda_inference_sweeps.to_string(),
                "forest_trees" => list(&self.forest_trees),
                "forest_depths" => self
                    .forest_depths
                    .iter()
                    .map(|d| opt(d, "none"))
                    .collect::<Vec<_>>()
                    .join(","),
                "forest_folds" => self.forest_folds.to_string(),
                "forest_mtry" => opt(&self.forest_mtry, "auto"),
                "test_fraction" => self.test_fraction.to_string(),
                "min_bytes" => self.min_bytes.to_string(),
                "min_views" => self.min_views.to_string(),
                "history_size" => self.history_size.to_string(),
                "interest_method" => self.interest_method.to_string(),
                "top_k" => self.top_k.to_string(),
                "k_per_editor" => self.k_per_editor.to_string(),
                "matcher" => self.matcher.as_str().into(),
                "max_edges" => self.max_edges.to_string(),
                "bootstrap_resamples" => self.bootstrap_resamples.to_string(),
                "mrr_history_sizes" => list(&self.mrr_history_sizes),
                "mrr_methods" => list(&self.mrr_methods),
                "evaluate_stepwise" => self.evaluate_stepwise.to_string(),
                "synth_concepts" => self.synth_concepts.to_string(),
                "synth_languages" => self
                    .synth_languages
                    .iter()
                    .map(|l| format!("{}:{}", l.code, l.coverage))
                    .collect::<Vec<_>>()
                    .join(","),
                "synth_topics" => self.synth_topics.to_string(),
                "synth_vocab" => self.synth_vocab.to_string(),
                "synth_doc_length" => self.synth_doc_length.to_string(),
                "synth_editors" => self.synth_editors.to_string(),
                "synth_edits_per_editor" => self.synth_edits_per_editor.to_string(),
                _ => unreachable!("every key has a value"),
            }
        };
        Self::KEYS.iter().map(|k| (*k, v(k))).collect()
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = |reason: String| ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason,
        };
        fn num<T: FromStr>(s: &str) -> Result<T, String>
        where
            T::Err: ToString,
        {
            s.parse::<T>().map_err(|e| e.to_string())
        }
        fn nums<T: FromStr>(s: &str) -> Result<Vec<T>, String>
        where
            T::Err: ToString,
        {
            s.split(',').map(|x| num(x.trim())).collect()
        }
        let auto = |s: &str| s == "auto" || s == "none";
        match key {
            "corpus" => self.corpus = value.to_string(),
            "source" => self.source = LanguageCode::new(value).map_err(bad)?,
            "target" => self.target = LanguageCode::new(value).map_err(bad)?,
            "seed" => self.seed = num(value).map_err(bad)?,
            "n_topics" => self.n_topics = num(value).map_err(bad)?,
            "lda_alpha" => self.lda_alpha = if auto(value) { None } else { Some(num(value).map_err(bad)?) },
            "lda_beta" => self.lda_beta = num(value).map_err(bad)?,
            "lda_iterations" => self.lda_iterations = num(value).map_err(bad)?,
            "lda_inference_sweeps" => self.lda_inference_sweeps = num(value).map_err(bad)?,
            "forest_trees" => self.forest_trees = nums(value).map_err(bad)?,
            "forest_depths" => {
                self.forest_depths = value
                    .split(',')
                    .map(|d| if auto(d.trim()) { Ok(None) } else { num(d.trim()).map(Some) })
                    .collect::<Result<_, _>>()
                    .map_err(bad)?
            }
            "forest_folds" => self.forest_folds = num(value).map_err(bad)?,
            "forest_mtry" => self.forest_mtry = if auto(value) { None } else { Some(num(value).map_err(bad)?) },
            "test_fraction" => self.test_fraction = num(value).map_err(bad)?,
            "min_bytes" => self.min_bytes = num(value).map_err(bad)?,
            "min_views" => self.min_views = num(value).map_err(bad)?,
            "history_size" => self.history_size = num(value).map_err(bad)?,
            "interest_method" => self.interest_method = value.parse().map_err(|e: crate::interest::InterestError| bad(e.to_string()))?,
            "top_k" => self.top_k = num(value).map_err(bad)?,
            "k_per_editor" => self.k_per_editor = num(value).map_err(bad)?,
            "matcher" => self.matcher = value.parse().map_err(bad)?,
            "max_edges" => self.max_edges = num(value).map_err(bad)?,
            "bootstrap_resamples" => self.bootstrap_resamples = num(value).map_err(bad)?,
            "mrr_history_sizes" => self.mrr_history_sizes = nums(value).map_err(bad)?,
            "mrr_methods" => {
                self.mrr_methods = value
                    .split(',')
                    .map(|m| m.trim().parse::<InterestMethod>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()
                    .map_err(bad)?
            }
            "evaluate_stepwise" => self.evaluate_stepwise = num(value).map_err(bad)?,
            "synth_concepts" => self.synth_concepts = num(value).map_err(bad)?,
            "synth_languages" => {
                self.synth_languages = value
                    .split(',')
                    .map(|item| {
                        let (code, cov) = item.trim().split_once(':').ok_or("expected code:coverage")?;
                        Ok(LanguageSpec {
                            code: LanguageCode::new(code)?,
                            coverage: num(cov)?,
                        })
                    })
                    .collect::<Result<_, String>>()
                    .map_err(bad)?
            }
            "synth_topics" => self.synth_topics = num(value).map_err(bad)?,
            "synth_vocab" => self.synth_vocab = num(value).map_err(bad)?,
            "synth_doc_length" => self.synth_doc_length = num(value).map_err(bad)?,
            "synth_editors" => self.synth_editors = num(value).map_err(bad)?,
            "synth_edits_per_editor" => self.synth_edits_per_editor = num(value).map_err(bad)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a config file over the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(i + 1))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }

    pub fn lda_config(&self, seed: u64) -> LdaConfig {
        LdaConfig {
            n_topics: self.n_topics,
            alpha: self.lda_alpha,
            beta: self.lda_beta,
            iterations: self.lda_iterations,
            inference_sweeps: self.lda_inference_sweeps,
            seed,
        }
    }

    pub fn forest_config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees_grid: self.forest_trees.clone(),
            max_depth_grid: self.forest_depths.clone(),
            folds: self.forest_folds,
            mtry: self.forest_mtry,
            seed,
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_concepts: self.synth_concepts,
            source: self.source.clone(),
            languages: self.synth_languages.clone(),
            n_topics: self.synth_topics,
            vocab_size: self.synth_vocab,
            doc_length: self.synth_doc_length,
            n_editors: self.synth_editors,
            edits_per_editor: self.synth_edits_per_editor,
            ..SyntheticSpec::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trips() {
        let mut c = RunConfig::default();
        c.set("forest_depths", "4, none").unwrap();
        c.set("lda_alpha", "0.5").unwrap();
        c.set("synth_languages", "fr:0.4,de:1").unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        assert_eq!(RunConfig::parse(&RunConfig::default().to_text()).unwrap(), RunConfig::default());
    }

    #[test]
    fn errors_name_the_problem() {
        let mut c = RunConfig::default();
        assert_eq!(c.set("colour", "red"), Err(ConfigError::UnknownKey("colour".into())));
        assert!(matches!(c.set("top_k", "many"), Err(ConfigError::InvalidValue { .. })));
        assert_eq!(RunConfig::parse("# note\nseed 4"), Err(ConfigError::Syntax(2)));
    }
}
