use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::RankingError;
use crate::corpus::{ConceptId, Corpus, LanguageCode};

/// Normalized page-view rank of one concept's article in one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTarget {
    pub concept_id: ConceptId,
    /// 1 for the least viewed article, `size` for the most viewed; ties share
    /// their average rank.
    pub rank: f64,
    pub size: usize,
    /// `rank / size`, in `(0, 1]`.
    pub y: f64,
}

/// Ranks of every non-redirect article of a language by six-month views.
#[derive(Debug, Clone)]
pub struct RankTable {
    lang: LanguageCode,
    ranks: HashMap<String, f64>,
    /// Titles in ascending (views, title) order.
    order: Vec<String>,
}

impl RankTable {
    pub fn build(corpus: &Corpus, lang: &LanguageCode) -> Result<Self, RankingError> {
        let redirects: BTreeSet<&str> = corpus
            .articles
            .iter()
            .filter(|a| a.lang == *lang && a.is_redirect)
            .map(|a| a.title.as_str())
            .collect();
        let titles: BTreeSet<&str> = corpus
            .articles
            .iter()
            .filter(|a| a.lang == *lang && !a.is_redirect)
            .map(|a| a.title.as_str())
            .chain(
                corpus
                    .sitelinks
                    .iter()
                    .filter(|s| s.lang == *lang && !redirects.contains(s.title.as_str()))
                    .map(|s| s.title.as_str()),
            )
            .collect();
        if titles.is_empty() {
            return Err(RankingError::EmptyLanguage(lang.clone()));
        }
        let mut views: HashMap<&str, u64> = HashMap::new();
        for v in corpus.page_views.iter().filter(|v| v.lang == *lang && v.country.is_none()) {
            views.insert(v.title.as_str(), v.views);
        }
        let mut sorted: Vec<(u64, &str)> = titles
            .into_iter()
            .map(|t| (views.get(t).copied().unwrap_or(0), t))
            .collect();
        sorted.sort();

        let mut ranks = HashMap::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1].0 == sorted[i].0 {
                j += 1;
            }
            // Positions i..=j hold ranks i+1..=j+1.
            let avg = (i + j + 2) as f64 / 2.0;
            for (_, t) in &sorted[i..=j] {
                ranks.insert(t.to_string(), avg);
            }
            i = j + 1;
        }
        Ok(Self {
            lang: lang.clone(),
            ranks,
            order: sorted.into_iter().map(|(_, t)| t.to_string()).collect(),
        })
    }

    pub fn lang(&self) -> &LanguageCode {
        &self.lang
    }

    /// Number of ranked articles, `|T|`.
    pub fn size(&self) -> usize {
        self.order.len()
    }

    pub fn rank(&self, title: &str) -> Option<f64> {
        self.ranks.get(title).copied()
    }

    /// Normalized rank of an article.
    pub fn y(&self, title: &str) -> Option<f64> {
        self.rank(title).map(|r| r / self.size() as f64)
    }

    /// `(title, y)` pairs in ascending view order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.order.iter().map(|t| (t.as_str(), self.ranks[t] / self.order.len() as f64))
    }
}

/// Normalized ranks of every concept with a non-redirect article in `lang`.
pub fn compute_rank_targets(corpus: &Corpus, lang: &LanguageCode) -> Result<BTreeMap<ConceptId, RankTarget>, RankingError> {
    let table = RankTable::build(corpus, lang)?;
    let size = table.size();
    Ok(corpus
        .sitelinks
        .iter()
        .filter(|s| s.lang == *lang)
        .filter_map(|s| {
            let rank = table.rank(&s.title)?;
            Some((
                s.concept_id.clone(),
                RankTarget {
                    concept_id: s.concept_id.clone(),
                    rank,
                    size,
                    y: rank / size as f64,
                },
            ))
        })
        .collect())
}
