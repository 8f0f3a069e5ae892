//! LDA topic model trained by collapsed Gibbs sampling, and unit-length topic
//! vectors for articles.
//!
//! Topic vectors are smoothed document-topic proportions (counts plus the
//! Dirichlet prior) scaled to unit L2 norm, so Euclidean distance between two
//! of them orders pairs exactly like cosine similarity does. Documents with no
//! known token get the all-zero vector instead.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, LanguageCode};

pub const DEFAULT_TOPICS: usize = 400;
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum TopicError {
    #[error("no non-empty document to train on")]
    EmptyCorpus,
    #[error("need at least two topics, got {0}")]
    TooFewTopics(usize),
    #[error("hyperparameters must be positive")]
    BadHyperparameter,
    #[error("zero topic vector")]
    ZeroVector,
    #[error("topic vectors have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("malformed model bundle line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub n_topics: usize,
    /// Document-topic prior. `None` means `50 / n_topics`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub inference_sweeps: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            n_topics: DEFAULT_TOPICS,
            alpha: None,
            beta: 0.01,
            iterations: 200,
            inference_sweeps: 20,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.n_topics as f64)
    }
}

/// Unit-length point in topic space, or the all-zero sentinel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicVector(Vec<f64>);

impl TopicVector {
    pub fn zero(n_topics: usize) -> Self {
        Self(vec![0.0; n_topics])
    }

    /// Scales `values` to unit length; an all-zero input stays the sentinel.
    pub fn normalized(mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        Self(values)
    }

    /// Wraps values that are already unit length (or zero) without rescaling.
    pub fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn argmax(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0
    }
}

/// Euclidean distance between two unit vectors, in `[0, 2]`.
pub fn topic_distance(a: &TopicVector, b: &TopicVector) -> Result<f64, TopicError> {
    if a.len() != b.len() {
        return Err(TopicError::DimensionMismatch(a.len(), b.len()));
    }
    if a.is_zero() || b.is_zero() {
        return Err(TopicError::ZeroVector);
    }
    Ok(a.0
        .iter()
        .zip(&b.0)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// A trained model. Immutable; inference takes `&self`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    n_topics: usize,
    vocabulary: Vec<String>,
    token_index: HashMap<String, u32>,
    /// `n_topics` rows of `vocabulary.len()` word probabilities.
    topic_word: Vec<f64>,
    alpha: f64,
    beta: f64,
    seed: u64,
    inference_sweeps: usize,
}

impl TopicModel {
    pub fn n_topics(&self) -> usize {
        self.n_topics
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.token_index.get(token).copied()
    }

    /// Word distribution of one topic.
    pub fn topic_row(&self, topic: usize) -> &[f64] {
        let v = self.vocabulary.len();
        &self.topic_word[topic * v..(topic + 1) * v]
    }

    /// Topic vector of a held-out document, by Gibbs sampling its topic
    /// assignments against the frozen topic-word matrix.
    pub fn infer<S: AsRef<str>>(&self, doc: &[S]) -> TopicVector {
        let words: Vec<u32> = doc.iter().filter_map(|t| self.token_id(t.as_ref())).collect();
        if words.is_empty() {
            return TopicVector::zero(self.n_topics);
        }
        let k = self.n_topics;
        let v = self.vocabulary.len();
        // Per-document stream so results do not depend on call order.
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, &words));
        let mut z: Vec<usize> = words.iter().map(|_| rng.random_range(0..k)).collect();
        let mut counts = vec![0u32; k];
        for &t in &z {
            counts[t] += 1;
        }
        let sweeps = self.inference_sweeps.max(1);
        let burn_in = sweeps / 2;
        let mut acc = vec![0.0f64; k];
        let mut weights = vec![0.0f64; k];
        for sweep in 0..sweeps {
            for (i, &w) in words.iter().enumerate() {
                counts[z[i]] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (counts[t] as f64 + self.alpha) * self.topic_word[t * v + w as usize];
                    weights[t] = total;
                }
                let t = draw(&mut rng, &weights, total);
                z[i] = t;
                counts[t] += 1;
            }
            if sweep >= burn_in {
                for t in 0..k {
                    acc[t] += counts[t] as f64;
                }
            }
        }
        let kept = (sweeps - burn_in) as f64;
        TopicVector::normalized(acc.iter().map(|c| c / kept + self.alpha).collect())
    }

    /// Infers many documents in parallel; output order follows input order.
    pub fn infer_all<S: AsRef<str> + Sync>(&self, docs: &[Vec<S>]) -> Vec<TopicVector> {
        docs.par_iter().map(|d| self.infer(d)).collect()
    }

    /// Text bundle: header fields, then one line per token with its
    /// probability under each topic.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "format_version\t{FORMAT_VERSION}").unwrap();
        writeln!(s, "n_topics\t{}", self.n_topics).unwrap();
        writeln!(s, "alpha\t{}", self.alpha).unwrap();
        writeln!(s, "beta\t{}", self.beta).unwrap();
        writeln!(s, "seed\t{}", self.seed).unwrap();
        writeln!(s, "inference_sweeps\t{}", self.inference_sweeps).unwrap();
        writeln!(s, "vocab_size\t{}", self.vocabulary.len()).unwrap();
        let v = self.vocabulary.len();
        for (w, token) in self.vocabulary.iter().enumerate() {
            s.push_str(token);
            for t in 0..self.n_topics {
                write!(s, "\t{}", self.topic_word[t * v + w]).unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self, TopicError> {
        let bad = |line: usize, reason: &str| TopicError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let mut field = |name: &str| -> Result<String, TopicError> {
            let (i, line) = lines.next().ok_or_else(|| bad(0, "truncated header"))?;
            match line.split_once('\t') {
                Some((k, v)) if k == name => Ok(v.to_string()),
                _ => Err(bad(i + 1, &format!("expected {name}"))),
            }
        };
        let version: u32 = field("format_version")?.parse().map_err(|_| bad(1, "bad version"))?;
        if version != FORMAT_VERSION {
            return Err(bad(1, &format!("unsupported format version {version}")));
        }
        let num = |s: String, line: usize| s.parse::<f64>().map_err(|_| bad(line, "bad number"));
        let n_topics = num(field("n_topics")?, 2)? as usize;
        let alpha = num(field("alpha")?, 3)?;
        let beta = num(field("beta")?, 4)?;
        let seed: u64 = field("seed")?.parse().map_err(|_| bad(5, "bad seed"))?;
        let inference_sweeps = num(field("inference_sweeps")?, 6)? as usize;
        let vocab_size = num(field("vocab_size")?, 7)? as usize;
        let mut vocabulary = Vec::with_capacity(vocab_size);
        let mut topic_word = vec![0.0; n_topics * vocab_size];
        for (w, (i, line)) in lines.enumerate() {
            if w >= vocab_size {
                return Err(bad(i + 1, "more tokens than vocab_size"));
            }
            let mut parts = line.split('\t');
            vocabulary.push(parts.next().unwrap_or_default().to_string());
            for t in 0..n_topics {
                let p = parts.next().ok_or_else(|| bad(i + 1, "missing topic column"))?;
                topic_word[t * vocab_size + w] = p.parse().map_err(|_| bad(i + 1, "bad probability"))?;
            }
        }
        if vocabulary.len() != vocab_size {
            return Err(bad(0, "fewer tokens than vocab_size"));
        }
        let token_index = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Self {
            n_topics,
            vocabulary,
            token_index,
            topic_word,
            alpha,
            beta,
            seed,
            inference_sweeps,
        })
    }
}

fn mix_seed(seed: u64, words: &[u32]) -> u64 {
    // FNV-1a over the word ids, folded with the model seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Samples an index from cumulative weights ending at `total`.
fn draw(rng: &mut impl Rng, cumulative: &[f64], total: f64) -> usize {
    let u = rng.random::<f64>() * total;
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// Collapsed Gibbs sampler state. Exposed so callers can watch training sweep
/// by sweep.
pub struct GibbsSampler {
    config: LdaConfig,
    alpha: f64,
    vocabulary: Vec<String>,
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<u32>>,
    doc_topic: Vec<u32>,
    word_topic: Vec<u32>,
    topic_total: Vec<u32>,
    rng: ChaCha8Rng,
    n_tokens: usize,
}

impl GibbsSampler {
    pub fn new<S: AsRef<str>>(docs: &[Vec<S>], config: LdaConfig) -> Result<Self, TopicError> {
        let k = config.n_topics;
        if k < 2 {
            return Err(TopicError::TooFewTopics(k));
        }
        let alpha = config.alpha();
        if !(alpha > 0.0 && config.beta > 0.0) {
            return Err(TopicError::BadHyperparameter);
        }
        let vocab: BTreeSet<&str> = docs.iter().flatten().map(AsRef::as_ref).collect();
        if vocab.is_empty() {
            return Err(TopicError::EmptyCorpus);
        }
        let vocabulary: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let index: HashMap<&str, u32> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i as u32))
            .collect();
        let docs: Vec<Vec<u32>> = docs
            .iter()
            .map(|d| d.iter().map(|t| index[t.as_ref()]).collect())
            .collect();
        let v = vocabulary.len();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut doc_topic = vec![0u32; docs.len() * k];
        let mut word_topic = vec![0u32; v * k];
        let mut topic_total = vec![0u32; k];
        let assignments: Vec<Vec<u32>> = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        doc_topic[d * k + t] += 1;
                        word_topic[w as usize * k + t] += 1;
                        topic_total[t] += 1;
                        t as u32
                    })
                    .collect()
            })
            .collect();
        let n_tokens = docs.iter().map(Vec::len).sum();
        Ok(Self {
            config,
            alpha,
            vocabulary,
            docs,
            assignments,
            doc_topic,
            word_topic,
            topic_total,
            rng,
            n_tokens,
        })
    }

    pub fn n_tokens(&self) -> usize {
        self.n_tokens
    }

    /// Sums of the document-topic, word-topic and topic-total tables.
    pub fn table_totals(&self) -> (u64, u64, u64) {
        let sum = |t: &[u32]| t.iter().map(|&c| c as u64).sum::<u64>();
        (sum(&self.doc_topic), sum(&self.word_topic), sum(&self.topic_total))
    }

    /// One pass over every token.
    pub fn sweep(&mut self) {
        let k = self.config.n_topics;
        let v = self.vocabulary.len() as f64;
        let (alpha, beta) = (self.alpha, self.config.beta);
        let vbeta = v * beta;
        let mut weights = vec![0.0f64; k];
        for (d, words) in self.docs.iter().enumerate() {
            let dt = &mut self.doc_topic[d * k..(d + 1) * k];
            for (i, &w) in words.iter().enumerate() {
                let wt = &mut self.word_topic[w as usize * k..(w as usize + 1) * k];
                let old = self.assignments[d][i] as usize;
                dt[old] -= 1;
                wt[old] -= 1;
                self.topic_total[old] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (dt[t] as f64 + alpha) * (wt[t] as f64 + beta) / (self.topic_total[t] as f64 + vbeta);
                    weights[t] = total;
                }
                let new = draw(&mut self.rng, &weights, total);
                dt[new] += 1;
                wt[new] += 1;
                self.topic_total[new] += 1;
                self.assignments[d][i] = new as u32;
            }
        }
    }

    /// Training-set perplexity under the current point estimates.
    pub fn perplexity(&self) -> f64 {
        let k = self.config.n_topics;
        let v = self.vocabulary.len() as f64;
        let (alpha, beta) = (self.alpha, self.config.beta);
        let phi_den: Vec<f64> = self.topic_total.iter().map(|&n| n as f64 + v * beta).collect();
        let mut log_lik = 0.0;
        for (d, words) in self.docs.iter().enumerate() {
            if words.is_empty() {
                continue;
            }
            let theta_den = words.len() as f64 + k as f64 * alpha;
            let dt = &self.doc_topic[d * k..(d + 1) * k];
            for &w in words {
                let wt = &self.word_topic[w as usize * k..(w as usize + 1) * k];
                let p: f64 = (0..k)
                    .map(|t| (dt[t] as f64 + alpha) / theta_den * (wt[t] as f64 + beta) / phi_den[t])
                    .sum();
                log_lik += p.ln();
            }
        }
        (-log_lik / self.n_tokens as f64).exp()
    }

    pub fn into_model(self) -> TopicModel {
        let k = self.config.n_topics;
        let v = self.vocabulary.len();
        let beta = self.config.beta;
        let mut topic_word = vec![0.0; k * v];
        for t in 0..k {
            let den = self.topic_total[t] as f64 + v as f64 * beta;
            for w in 0..v {
                topic_word[t * v + w] = (self.word_topic[w * k + t] as f64 + beta) / den;
            }
        }
        let token_index = self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        TopicModel {
            n_topics: k,
            vocabulary: self.vocabulary,
            token_index,
            topic_word,
            alpha: self.alpha,
            beta,
            seed: self.config.seed,
            inference_sweeps: self.config.inference_sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training perplexity after each sweep.
    pub perplexity: Vec<f64>,
}

/// Trains a model with `config.iterations` sweeps.
pub fn train_lda<S: AsRef<str>>(docs: &[Vec<S>], config: &LdaConfig) -> Result<(TopicModel, TrainReport), TopicError> {
    let mut sampler = GibbsSampler::new(docs, config.clone())?;
    let mut perplexity = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        sampler.sweep();
        perplexity.push(sampler.perplexity());
    }
    Ok((sampler.into_model(), TrainReport { perplexity }))
}

/// Training documents of one language, in corpus order.
pub fn language_docs<'a>(corpus: &'a Corpus, lang: &LanguageCode) -> Vec<(&'a str, &'a [String])> {
    corpus
        .token_docs
        .iter()
        .filter(|d| d.lang == *lang)
        .map(|d| (d.title.as_str(), d.tokens.as_slice()))
        .collect()
}

/// Topic vector of every article of `lang` that has a token document.
pub fn article_topic_vectors(model: &TopicModel, corpus: &Corpus, lang: &LanguageCode) -> BTreeMap<String, TopicVector> {
    let docs = language_docs(corpus, lang);
    let vectors: Vec<TopicVector> = docs.par_iter().map(|(_, d)| model.infer(d)).collect();
    docs.into_iter().map(|(t, _)| t.to_string()).zip(vectors).collect()
}

/// `title<TAB>v0<TAB>v1...` per article.
pub fn topic_vectors_to_tsv(vectors: &BTreeMap<String, TopicVector>) -> String {
    let mut s = String::new();
    for (title, v) in vectors {
        s.push_str(title);
        for x in v.values() {
            write!(s, "\t{x}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn topic_vectors_from_tsv(text: &str) -> Result<BTreeMap<String, TopicVector>, TopicError> {
    let mut out = BTreeMap::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let bad = |reason: &str| TopicError::Malformed {
            line: i + 1,
            reason: reason.to_string(),
        };
        let mut fields = line.split('\t');
        let title = fields.next().filter(|t| !t.is_empty()).ok_or_else(|| bad("missing title"))?;
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|_| bad("bad value")))
            .collect::<Result<Vec<_>, _>>()?;
        if *width.get_or_insert(values.len()) != values.len() {
            return Err(bad("vector length differs from earlier rows"));
        }
        out.insert(title.to_string(), TopicVector::from_raw(values));
    }
    Ok(out)
}
