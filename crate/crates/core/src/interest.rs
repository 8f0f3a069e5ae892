//! Editor interest vectors: a unit-length summary of the topic vectors of the
//! articles an editor recently added content to.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ConceptId, Corpus, EditEventRecord, LanguageCode};
use crate::topics::{topic_distance, TopicVector};

pub const DEFAULT_HISTORY_SIZE: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum InterestError {
    #[error("editor {0} has no usable history")]
    EmptyHistory(String),
    #[error("zero topic vector for {0}")]
    ZeroVector(String),
    #[error("history size must be positive")]
    ZeroHistorySize,
    #[error("unknown aggregation method {0:?}")]
    UnknownMethod(String),
    #[error("malformed interests line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterestMethod {
    Average,
    WeightedAverage,
    WeightedMedoid,
}

impl InterestMethod {
    pub const ALL: [InterestMethod; 3] = [
        InterestMethod::Average,
        InterestMethod::WeightedAverage,
        InterestMethod::WeightedMedoid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InterestMethod::Average => "average",
            InterestMethod::WeightedAverage => "weighted-average",
            InterestMethod::WeightedMedoid => "weighted-medoid",
        }
    }
}

impl fmt::Display for InterestMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterestMethod {
    type Err = InterestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| InterestError::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Source-language title the edits map to.
    pub title: String,
    pub concept_id: Option<ConceptId>,
    /// Sum of the positive revisions.
    pub bytes: u64,
    /// Timestamp of the latest positive revision.
    pub last_edit: i64,
}

/// One entry per source article, most recent first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditHistory {
    pub editor_id: String,
    pub entries: Vec<HistoryEntry>,
}

/// Maps article titles in any language to their source-language counterpart.
pub struct SourceTitles {
    source: LanguageCode,
    by_article: HashMap<(LanguageCode, String), (ConceptId, String)>,
}

impl SourceTitles {
    pub fn new(corpus: &Corpus, source: &LanguageCode) -> Self {
        let source_of: HashMap<&str, &str> = corpus
            .sitelinks
            .iter()
            .filter(|s| s.lang == *source)
            .map(|s| (s.concept_id.as_str(), s.title.as_str()))
            .collect();
        let by_article = corpus
            .sitelinks
            .iter()
            .filter_map(|s| {
                let t = source_of.get(s.concept_id.as_str())?;
                Some(((s.lang.clone(), s.title.clone()), (s.concept_id.clone(), t.to_string())))
            })
            .collect();
        Self {
            source: source.clone(),
            by_article,
        }
    }

    /// Source title and concept of an edited article, if it has one.
    pub fn resolve(&self, lang: &LanguageCode, title: &str) -> Option<(Option<ConceptId>, String)> {
        match self.by_article.get(&(lang.clone(), title.to_string())) {
            Some((c, t)) => Some((Some(c.clone()), t.clone())),
            None if *lang == self.source => Some((None, title.to_string())),
            None => None,
        }
    }
}

/// Aggregates one editor's revisions. Removals are ignored; articles whose
/// revisions were all removals are dropped.
pub fn build_history(editor_id: &str, events: &[EditEventRecord], titles: &SourceTitles) -> EditHistory {
    let mut acc: BTreeMap<String, HistoryEntry> = BTreeMap::new();
    for e in events.iter().filter(|e| e.bytes_added > 0) {
        let Some((concept, title)) = titles.resolve(&e.lang, &e.title) else {
            continue;
        };
        let entry = acc.entry(title.clone()).or_insert(HistoryEntry {
            title,
            concept_id: concept,
            bytes: 0,
            last_edit: e.timestamp,
        });
        entry.bytes += e.bytes_added as u64;
        entry.last_edit = entry.last_edit.max(e.timestamp);
    }
    let mut entries: Vec<HistoryEntry> = acc.into_values().collect();
    entries.sort_by(|a, b| b.last_edit.cmp(&a.last_edit).then_with(|| a.title.cmp(&b.title)));
    EditHistory {
        editor_id: editor_id.to_string(),
        entries,
    }
}

/// Histories of every editor in the corpus, keyed by editor id.
pub fn build_histories(corpus: &Corpus, source: &LanguageCode) -> BTreeMap<String, EditHistory> {
    let titles = SourceTitles::new(corpus, source);
    let mut by_editor: BTreeMap<&str, Vec<EditEventRecord>> = BTreeMap::new();
    for e in &corpus.edit_events {
        by_editor.entry(e.editor_id.as_str()).or_default().push(e.clone());
    }
    by_editor
        .into_iter()
        .map(|(id, mut events)| {
            events.sort_by_key(|e| e.timestamp);
            (id.to_string(), build_history(id, &events, &titles))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterestVector {
    pub editor_id: String,
    pub values: TopicVector,
    pub method: InterestMethod,
    pub history_size: usize,
}

fn log_weight(bytes: u64) -> f64 {
    (bytes as f64).ln_1p()
}

/// Summarizes the `w` most recent history entries that have a non-zero topic
/// vector.
pub fn interest_vector(
    history: &EditHistory,
    topic_vectors: &BTreeMap<String, TopicVector>,
    method: InterestMethod,
    w: usize,
) -> Result<InterestVector, InterestError> {
    if w == 0 {
        return Err(InterestError::ZeroHistorySize);
    }
    let members: Vec<(&TopicVector, u64)> = history
        .entries
        .iter()
        .filter_map(|e| topic_vectors.get(&e.title).filter(|v| !v.is_zero()).map(|v| (v, e.bytes)))
        .take(w)
        .collect();
    if members.is_empty() {
        return Err(InterestError::EmptyHistory(history.editor_id.clone()));
    }
    let dim = members[0].0.len();
    let values = match method {
        InterestMethod::Average => {
            let mut sum = vec![0.0; dim];
            for (v, _) in &members {
                sum.iter_mut().zip(v.values()).for_each(|(s, x)| *s += x);
            }
            TopicVector::normalized(sum)
        }
        InterestMethod::WeightedAverage => {
            // Relative weights, so equal byte counts reduce to the plain mean.
            let max = members.iter().map(|m| log_weight(m.1)).fold(0.0, f64::max);
            let mut sum = vec![0.0; dim];
            for (v, bytes) in &members {
                let wt = log_weight(*bytes) / max;
                sum.iter_mut().zip(v.values()).for_each(|(s, x)| *s += wt * x);
            }
            TopicVector::normalized(sum)
        }
        InterestMethod::WeightedMedoid => {
            let mut best = (f64::INFINITY, 0usize);
            for (i, (m, _)) in members.iter().enumerate() {
                let cost: f64 = members
                    .iter()
                    .map(|(v, bytes)| log_weight(*bytes) * topic_distance(m, v).expect("non-zero members"))
                    .sum();
                if cost < best.0 {
                    best = (cost, i);
                }
            }
            members[best.1].0.clone()
        }
    };
    Ok(InterestVector {
        editor_id: history.editor_id.clone(),
        values,
        method,
        history_size: w,
    })
}

/// Interest vectors for every editor that has a usable history, plus one
/// warning per skipped editor.
pub fn build_interests(
    histories: &BTreeMap<String, EditHistory>,
    topic_vectors: &BTreeMap<String, TopicVector>,
    method: InterestMethod,
    w: usize,
) -> Result<(Vec<InterestVector>, Vec<String>), InterestError> {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for h in histories.values() {
        match interest_vector(h, topic_vectors, method, w) {
            Ok(v) => out.push(v),
            Err(InterestError::EmptyHistory(e)) => warnings.push(format!("editor {e} skipped: empty history")),
            Err(e) => return Err(e),
        }
    }
    Ok((out, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredConcept {
    pub concept_id: ConceptId,
    pub distance: f64,
    /// Cosine similarity, `1 - distance² / 2`.
    pub similarity: f64,
}

/// Candidates by ascending distance to `interest`, ties by concept id.
pub fn score_concepts(interest: &TopicVector, candidates: &[(ConceptId, TopicVector)]) -> Result<Vec<ScoredConcept>, InterestError> {
    if interest.is_zero() {
        return Err(InterestError::ZeroVector("interest vector".into()));
    }
    let mut out = candidates
        .iter()
        .map(|(c, v)| {
            let distance = topic_distance(interest, v).map_err(|_| InterestError::ZeroVector(c.clone()))?;
            Ok(ScoredConcept {
                concept_id: c.clone(),
                distance,
                similarity: interest.dot(v),
            })
        })
        .collect::<Result<Vec<_>, InterestError>>()?;
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.concept_id.cmp(&b.concept_id)));
    Ok(out)
}

pub fn interests_to_tsv(vectors: &[InterestVector]) -> String {
    let mut s = String::from("editor_id\tmethod\tw");
    if let Some(v) = vectors.first() {
        for k in 0..v.values.len() {
            write!(s, "\ttopic.{k}").unwrap();
        }
    }
    s.push('\n');
    for v in vectors {
        write!(s, "{}\t{}\t{}", v.editor_id, v.method, v.history_size).unwrap();
        for x in v.values.values() {
            write!(s, "\t{x:.6}").unwrap();
        }
        s.push('\n');
    }
    s
}

/// Reads interests back; values are renormalized after rounding.
pub fn interests_from_tsv(text: &str) -> Result<Vec<InterestVector>, InterestError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad = |reason: &str| InterestError::Malformed {
            line: i + 1,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 4 {
            return Err(bad("too few columns"));
        }
        let values = f[3..]
            .iter()
            .map(|x| x.parse::<f64>().map_err(|_| bad("bad value")))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(InterestVector {
            editor_id: f[0].to_string(),
            method: f[1].parse()?,
            history_size: f[2].parse().map_err(|_| bad("bad history size"))?,
            values: TopicVector::normalized(values),
        });
    }
    Ok(out)
}
