//! Per-concept features for readership prediction.
//!
//! Nothing here reads the target-language article of the concept being
//! described: the target language is left out of the per-language columns and
//! of the language count, so a row looks the same whether or not the article
//! already exists.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::targets::RankTable;
use super::RankingError;
use crate::corpus::{ArticleRecord, ConceptId, Corpus, ImportanceClass, LanguageCode, QualityClass};
use crate::graph::{CoverageGraph, MissingSet};
use crate::topics::TopicVector;

pub const MAX_VIEW_LANGUAGES: usize = 50;
pub const MAX_COUNTRIES: usize = 30;

/// Feature families, the unit of forward stepwise selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureFamily {
    /// Language count plus raw, log and rank-normalized views per language.
    PageViews,
    GeoPageViews,
    SourceLength,
    QualityImportance,
    EditActivity,
    Links,
    Topics,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 7] = [
        FeatureFamily::PageViews,
        FeatureFamily::GeoPageViews,
        FeatureFamily::SourceLength,
        FeatureFamily::QualityImportance,
        FeatureFamily::EditActivity,
        FeatureFamily::Links,
        FeatureFamily::Topics,
    ];

    pub fn of_column(name: &str) -> Option<Self> {
        let head = name.split('.').next().unwrap_or(name);
        Some(match head {
            "wikidata_count" | "views" | "log_views" | "normrank" => FeatureFamily::PageViews,
            "geo" => FeatureFamily::GeoPageViews,
            "source_length" => FeatureFamily::SourceLength,
            "quality" | "importance" => FeatureFamily::QualityImportance,
            "editor_count" | "months_since_first_edit" | "months_since_last_edit" => FeatureFamily::EditActivity,
            "inlinks_covered" | "outlinks_covered" | "indegree" | "outdegree" => FeatureFamily::Links,
            "topic" => FeatureFamily::Topics,
            _ => return None,
        })
    }
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureFamily::PageViews => "page views",
            FeatureFamily::GeoPageViews => "geo page views",
            FeatureFamily::SourceLength => "source-article length",
            FeatureFamily::QualityImportance => "quality & importance classes",
            FeatureFamily::EditActivity => "edit activity",
            FeatureFamily::Links => "links",
            FeatureFamily::Topics => "topics",
        })
    }
}

/// Column layout of a feature matrix. Two schemas with the same hash produce
/// interchangeable rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub source: LanguageCode,
    pub target: LanguageCode,
    /// View languages, by descending article count; never the target.
    pub languages: Vec<LanguageCode>,
    /// Top countries by source-language views; the rest pool into `geo.other`.
    pub countries: Vec<String>,
    pub n_topics: usize,
}

impl FeatureSchema {
    pub fn columns(&self) -> Vec<String> {
        let mut c = vec!["wikidata_count".to_string()];
        for prefix in ["views", "log_views", "normrank"] {
            c.extend(self.languages.iter().map(|l| format!("{prefix}.{l}")));
        }
        c.extend(self.countries.iter().map(|k| format!("geo.{k}")));
        c.push("geo.other".into());
        c.push("source_length".into());
        c.extend(QualityClass::ALL.iter().map(|q| format!("quality.{}", q.as_str())));
        c.extend(ImportanceClass::ALL.iter().map(|i| format!("importance.{}", i.as_str())));
        for name in [
            "editor_count",
            "months_since_first_edit",
            "months_since_last_edit",
            "inlinks_covered",
            "outlinks_covered",
            "indegree",
            "outdegree",
        ] {
            c.push(name.into());
        }
        c.extend((0..self.n_topics).map(|t| format!("topic.{t}")));
        c
    }

    pub fn families(&self) -> Vec<FeatureFamily> {
        self.columns()
            .iter()
            .map(|c| FeatureFamily::of_column(c).expect("schema columns have families"))
            .collect()
    }

    pub fn hash(&self) -> String {
        schema_hash(&self.columns())
    }

    /// Column holding the source article's own normalized rank.
    pub fn source_normrank_column(&self) -> usize {
        let pos = self
            .languages
            .iter()
            .position(|l| *l == self.source)
            .expect("source is always a view language");
        1 + 2 * self.languages.len() + pos
    }

    /// Flattens a row into column order.
    pub fn vectorize(&self, row: &FeatureRow) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.columns().len());
        v.push(row.wikidata_count as f64);
        v.extend(row.views.iter().map(|&x| x as f64));
        v.extend(&row.log_views);
        v.extend(&row.normrank);
        v.extend(&row.geo_views);
        v.push(row.source_length as f64);
        v.extend(row.quality.iter().map(|&b| f64::from(u8::from(b))));
        v.extend(row.importance.iter().map(|&b| f64::from(u8::from(b))));
        v.push(row.editor_count as f64);
        v.push(row.months_since_first_edit as f64);
        v.push(row.months_since_last_edit as f64);
        v.push(row.inlinks_covered as f64);
        v.push(row.outlinks_covered as f64);
        v.push(row.total_indegree as f64);
        v.push(row.total_outdegree as f64);
        v.extend(row.topic_vector.values());
        v
    }
}

/// Short stable fingerprint of a column list.
pub fn schema_hash(columns: &[String]) -> String {
    let digest = Sha256::digest(columns.join("\n").as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub concept_id: ConceptId,
    pub source_title: String,
    /// Languages other than the target with an article about the concept.
    pub wikidata_count: u32,
    pub views: Vec<u64>,
    /// `ln(1 + views)`.
    pub log_views: Vec<f64>,
    /// Normalized rank per language, 0 where the article is absent.
    pub normrank: Vec<f64>,
    pub geo_views: Vec<f64>,
    pub source_length: u64,
    pub quality: [bool; 3],
    pub importance: [bool; 4],
    pub editor_count: u32,
    pub months_since_first_edit: u32,
    pub months_since_last_edit: u32,
    pub inlinks_covered: u32,
    pub outlinks_covered: u32,
    pub total_indegree: u32,
    pub total_outdegree: u32,
    pub topic_vector: TopicVector,
}

/// Precomputed lookups for extracting many rows of one (source, target) pair.
pub struct FeatureContext<'a> {
    schema: FeatureSchema,
    source: LanguageCode,
    rank_tables: Vec<Option<RankTable>>,
    titles_by_concept: HashMap<&'a str, Vec<(&'a LanguageCode, &'a str)>>,
    views: HashMap<(&'a LanguageCode, &'a str), u64>,
    geo: HashMap<&'a str, Vec<(&'a str, u64)>>,
    articles: HashMap<(&'a LanguageCode, &'a str), &'a ArticleRecord>,
    inlinks: HashMap<&'a str, BTreeSet<&'a str>>,
    outlinks: HashMap<&'a str, BTreeSet<&'a str>>,
    covered: HashSet<String>,
    topic_vectors: &'a BTreeMap<String, TopicVector>,
}

impl<'a> FeatureContext<'a> {
    /// `graph` must have components labelled; `topic_vectors` maps source
    /// titles to their topic vectors.
    pub fn new(
        corpus: &'a Corpus,
        graph: &CoverageGraph,
        topic_vectors: &'a BTreeMap<String, TopicVector>,
        n_topics: usize,
    ) -> Result<Self, RankingError> {
        let source = graph.source().clone();
        let target = graph.target().clone();
        let covered = graph.covered_source_titles()?;

        let mut article_counts: BTreeMap<&LanguageCode, usize> = BTreeMap::new();
        for a in corpus.articles.iter().filter(|a| !a.is_redirect) {
            *article_counts.entry(&a.lang).or_default() += 1;
        }
        let mut langs: Vec<(&LanguageCode, usize)> = corpus
            .languages
            .iter()
            .filter(|l| **l != target)
            .map(|l| (l, article_counts.get(l).copied().unwrap_or(0)))
            .collect();
        langs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut languages: Vec<LanguageCode> = langs
            .into_iter()
            .take(MAX_VIEW_LANGUAGES)
            .map(|(l, _)| l.clone())
            .collect();
        if !languages.contains(&source) {
            languages.pop();
            languages.insert(0, source.clone());
        }

        let mut country_totals: BTreeMap<&str, u64> = BTreeMap::new();
        let mut geo: HashMap<&str, Vec<(&str, u64)>> = HashMap::new();
        let mut views = HashMap::new();
        for v in &corpus.page_views {
            match &v.country {
                None => {
                    views.insert((&v.lang, v.title.as_str()), v.views);
                }
                Some(c) if v.lang == source => {
                    *country_totals.entry(c.as_str()).or_default() += v.views;
                    geo.entry(v.title.as_str()).or_default().push((c.as_str(), v.views));
                }
                Some(_) => {}
            }
        }
        let mut countries: Vec<(&str, u64)> = country_totals.into_iter().collect();
        countries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let countries: Vec<String> = countries
            .into_iter()
            .take(MAX_COUNTRIES)
            .map(|(c, _)| c.to_string())
            .collect();

        let rank_tables = languages.iter().map(|l| RankTable::build(corpus, l).ok()).collect();

        let mut titles_by_concept: HashMap<&str, Vec<(&LanguageCode, &str)>> = HashMap::new();
        for s in &corpus.sitelinks {
            titles_by_concept
                .entry(s.concept_id.as_str())
                .or_default()
                .push((&s.lang, s.title.as_str()));
        }
        let articles = corpus
            .articles
            .iter()
            .map(|a| ((&a.lang, a.title.as_str()), a))
            .collect();
        let mut inlinks: HashMap<&str, BTreeSet<&str>> = HashMap::new();
        let mut outlinks: HashMap<&str, BTreeSet<&str>> = HashMap::new();
        for l in corpus.page_links.iter().filter(|l| l.lang == source && l.from_title != l.to_title) {
            inlinks.entry(l.to_title.as_str()).or_default().insert(l.from_title.as_str());
            outlinks.entry(l.from_title.as_str()).or_default().insert(l.to_title.as_str());
        }

        Ok(Self {
            schema: FeatureSchema {
                source: source.clone(),
                target,
                languages,
                countries,
                n_topics,
            },
            source,
            rank_tables,
            titles_by_concept,
            views,
            geo,
            articles,
            inlinks,
            outlinks,
            covered,
            topic_vectors,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    /// Source-language title of a concept, via its sitelink.
    pub fn source_title(&self, concept: &str) -> Option<&'a str> {
        self.titles_by_concept
            .get(concept)?
            .iter()
            .find(|(l, _)| **l == self.source)
            .map(|(_, t)| *t)
    }

    /// Row for a concept whose source article is `source_title`.
    pub fn row(&self, concept: &str, source_title: &str) -> FeatureRow {
        let schema = &self.schema;
        let titles: &[(&LanguageCode, &str)] = self.titles_by_concept.get(concept).map_or(&[], |v| v.as_slice());
        let title_in = |lang: &LanguageCode| -> Option<&str> {
            if *lang == self.source {
                Some(source_title)
            } else {
                titles.iter().find(|(l, _)| *l == lang).map(|(_, t)| *t)
            }
        };

        let mut langs_with_article: BTreeSet<&LanguageCode> = titles
            .iter()
            .filter(|(l, _)| **l != schema.target)
            .map(|(l, _)| *l)
            .collect();
        langs_with_article.insert(&self.source);

        let mut views = Vec::with_capacity(schema.languages.len());
        let mut normrank = Vec::with_capacity(schema.languages.len());
        for (lang, table) in schema.languages.iter().zip(&self.rank_tables) {
            let title = title_in(lang);
            views.push(title.and_then(|t| self.views.get(&(lang, t)).copied()).unwrap_or(0));
            normrank.push(
                title
                    .zip(table.as_ref())
                    .and_then(|(t, table)| table.y(t))
                    .unwrap_or(0.0),
            );
        }
        let log_views = views.iter().map(|&v| (v as f64).ln_1p()).collect();

        let mut geo_views = vec![0.0; schema.countries.len() + 1];
        for (country, v) in self.geo.get(source_title).map_or(&[][..], |v| v.as_slice()) {
            let col = schema
                .countries
                .iter()
                .position(|c| c == country)
                .unwrap_or(schema.countries.len());
            geo_views[col] += *v as f64;
        }

        let article = self.articles.get(&(&self.source, source_title));
        let mut quality = [false; 3];
        let mut importance = [false; 4];
        if let Some(q) = article.and_then(|a| a.quality_class) {
            quality[QualityClass::ALL.iter().position(|x| *x == q).unwrap()] = true;
        }
        if let Some(i) = article.and_then(|a| a.importance_class) {
            importance[ImportanceClass::ALL.iter().position(|x| *x == i).unwrap()] = true;
        }

        let empty = BTreeSet::new();
        let ins = self.inlinks.get(source_title).unwrap_or(&empty);
        let outs = self.outlinks.get(source_title).unwrap_or(&empty);
        let covered = |set: &BTreeSet<&str>| set.iter().filter(|t| self.covered.contains(**t)).count() as u32;

        FeatureRow {
            concept_id: concept.to_string(),
            source_title: source_title.to_string(),
            wikidata_count: langs_with_article.len() as u32,
            views,
            log_views,
            normrank,
            geo_views,
            source_length: article.map_or(0, |a| a.byte_length),
            quality,
            importance,
            editor_count: article.map_or(0, |a| a.editor_count),
            months_since_first_edit: article.map_or(0, |a| a.created_months_ago),
            months_since_last_edit: article.map_or(0, |a| a.last_edited_months_ago),
            inlinks_covered: covered(ins),
            outlinks_covered: covered(outs),
            total_indegree: ins.len() as u32,
            total_outdegree: outs.len() as u32,
            topic_vector: self
                .topic_vectors
                .get(source_title)
                .cloned()
                .unwrap_or_else(|| TopicVector::zero(schema.n_topics)),
        }
    }

    /// Rows for concepts identified by id; each must have a source article.
    pub fn extract(&self, concepts: &[ConceptId]) -> Result<Vec<FeatureRow>, RankingError> {
        concepts
            .iter()
            .map(|c| {
                let title = self
                    .source_title(c)
                    .ok_or_else(|| RankingError::UnknownConcept(c.clone()))?;
                Ok(self.row(c, title))
            })
            .collect()
    }
}

/// Concepts with non-redirect articles in both languages, paired with their
/// target-language normalized rank: the training population.
pub fn training_targets(corpus: &Corpus, source: &LanguageCode, target: &LanguageCode) -> Result<Vec<(ConceptId, f64)>, RankingError> {
    let source_table = RankTable::build(corpus, source)?;
    let target_table = RankTable::build(corpus, target)?;
    let mut by_concept: BTreeMap<&str, (Option<&str>, Option<&str>)> = BTreeMap::new();
    for s in &corpus.sitelinks {
        let e = by_concept.entry(s.concept_id.as_str()).or_default();
        if s.lang == *source {
            e.0 = Some(s.title.as_str());
        } else if s.lang == *target {
            e.1 = Some(s.title.as_str());
        }
    }
    Ok(by_concept
        .into_iter()
        .filter_map(|(c, (s, t))| {
            source_table.rank(s?)?;
            Some((c.to_string(), target_table.y(t?)?))
        })
        .collect())
}

/// Thresholds on the source article below which a missing concept is not
/// worth recommending.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateFilter {
    pub min_bytes: u64,
    pub min_views: u64,
    pub exclude_disambiguation: bool,
}

impl Default for CandidateFilter {
    fn default() -> Self {
        Self {
            min_bytes: 1500,
            min_views: 1000,
            exclude_disambiguation: true,
        }
    }
}

impl CandidateFilter {
    /// Keeps the entries whose source article passes every threshold.
    pub fn apply(&self, corpus: &Corpus, missing: &MissingSet) -> MissingSet {
        let source = &missing.source;
        let articles: HashMap<&str, &ArticleRecord> = corpus
            .articles
            .iter()
            .filter(|a| a.lang == *source)
            .map(|a| (a.title.as_str(), a))
            .collect();
        let views: HashMap<&str, u64> = corpus
            .page_views
            .iter()
            .filter(|v| v.lang == *source && v.country.is_none())
            .map(|v| (v.title.as_str(), v.views))
            .collect();
        let keep = |title: &str| {
            let Some(a) = articles.get(title) else {
                return false;
            };
            a.byte_length >= self.min_bytes
                && views.get(title).copied().unwrap_or(0) >= self.min_views
                && !(self.exclude_disambiguation && a.is_disambiguation)
        };
        MissingSet {
            source: missing.source.clone(),
            target: missing.target.clone(),
            entries: missing.entries.iter().filter(|e| keep(&e.source_title)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowRole {
    Train,
    Apply,
}

impl RowRole {
    fn as_str(self) -> &'static str {
        match self {
            RowRole::Train => "train",
            RowRole::Apply => "apply",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub concept_id: ConceptId,
    pub source_title: String,
    pub role: RowRole,
    pub target: Option<f64>,
    pub values: Vec<f64>,
}

/// A vectorized feature file: schema hash, column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl FeatureTable {
    pub fn new(schema: &FeatureSchema) -> Self {
        Self {
            schema_hash: schema.hash(),
            columns: schema.columns(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, schema: &FeatureSchema, row: &FeatureRow, role: RowRole, target: Option<f64>) {
        self.rows.push(TableRow {
            concept_id: row.concept_id.clone(),
            source_title: row.source_title.clone(),
            role,
            target,
            values: schema.vectorize(row),
        });
    }

    pub fn families(&self) -> Vec<FeatureFamily> {
        self.columns
            .iter()
            .map(|c| FeatureFamily::of_column(c).unwrap_or(FeatureFamily::PageViews))
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = format!("#schema\t{}\n", self.schema_hash);
        s.push_str("concept_id\tsource_title\trole\ty_target");
        for c in &self.columns {
            s.push('\t');
            s.push_str(c);
        }
        s.push('\n');
        for r in &self.rows {
            write!(s, "{}\t{}\t{}\t", r.concept_id, r.source_title, r.role.as_str()).unwrap();
            if let Some(y) = r.target {
                write!(s, "{y}").unwrap();
            }
            for v in &r.values {
                write!(s, "\t{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self, RankingError> {
        let bad = |line: usize, reason: &str| RankingError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let first = lines.next().ok_or_else(|| bad(1, "empty file"))?.1;
        let recorded = first
            .strip_prefix("#schema\t")
            .ok_or_else(|| bad(1, "expected #schema line"))?
            .to_string();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad(2, "missing header"))?.1.split('\t').collect();
        if header.len() < 4 || header[..4] != ["concept_id", "source_title", "role", "y_target"] {
            return Err(bad(2, "unexpected header"));
        }
        let columns: Vec<String> = header[4..].iter().map(|s| s.to_string()).collect();
        let computed = schema_hash(&columns);
        if computed != recorded {
            return Err(RankingError::SchemaMismatch {
                expected: recorded,
                found: computed,
            });
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != header.len() {
                return Err(bad(i + 1, "wrong column count"));
            }
            let role = match f[2] {
                "train" => RowRole::Train,
                "apply" => RowRole::Apply,
                _ => return Err(bad(i + 1, "unknown role")),
            };
            let target = if f[3].is_empty() {
                None
            } else {
                Some(f[3].parse().map_err(|_| bad(i + 1, "bad target"))?)
            };
            let values = f[4..]
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad(i + 1, "bad value")))
                .collect::<Result<_, _>>()?;
            rows.push(TableRow {
                concept_id: f[0].to_string(),
                source_title: f[1].to_string(),
                role,
                target,
                values,
            });
        }
        Ok(Self {
            schema_hash: recorded,
            columns,
            rows,
        })
    }
}
