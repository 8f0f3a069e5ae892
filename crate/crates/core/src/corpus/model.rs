use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Short lowercase language edition identifier such as `en` or `fr`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageCode(String);

impl LanguageCode {
    pub fn new(code: impl Into<String>) -> Result<Self, String> {
        let code = code.into();
        if code.is_empty() {
            return Err("empty language code".into());
        }
        if code.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
            return Err(format!("language code {code:?} must be lowercase without whitespace"));
        }
        Ok(Self(code))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LanguageCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl From<&str> for LanguageCode {
    /// Panics on an invalid code; meant for literals in fixtures and tests.
    fn from(s: &str) -> Self {
        Self::new(s).expect("valid language code literal")
    }
}

/// Opaque knowledge-base concept identifier (e.g. `Q133212`).
pub type ConceptId = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualityClass {
    Stub,
    Good,
    Featured,
}

impl QualityClass {
    pub const ALL: [QualityClass; 3] = [QualityClass::Stub, QualityClass::Good, QualityClass::Featured];

    pub fn as_str(self) -> &'static str {
        match self {
            QualityClass::Stub => "stub",
            QualityClass::Good => "good",
            QualityClass::Featured => "featured",
        }
    }

    /// Unknown labels parse as `None`; they load as an absent class.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "stub" => Some(QualityClass::Stub),
            "good" => Some(QualityClass::Good),
            "featured" => Some(QualityClass::Featured),
            _ => None,
        }
    }
}

/// WikiProject importance. Ordered so that `max` yields the highest class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceClass {
    Low,
    Mid,
    High,
    Top,
}

impl ImportanceClass {
    pub const ALL: [ImportanceClass; 4] = [
        ImportanceClass::Low,
        ImportanceClass::Mid,
        ImportanceClass::High,
        ImportanceClass::Top,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImportanceClass::Low => "low",
            ImportanceClass::Mid => "mid",
            ImportanceClass::High => "high",
            ImportanceClass::Top => "top",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "low" => Some(ImportanceClass::Low),
            "mid" => Some(ImportanceClass::Mid),
            "high" => Some(ImportanceClass::High),
            "top" => Some(ImportanceClass::Top),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub lang: LanguageCode,
    pub title: String,
    /// Size of the wiki markup in bytes.
    pub byte_length: u64,
    pub is_redirect: bool,
    pub redirect_target: Option<String>,
    pub created_months_ago: u32,
    pub last_edited_months_ago: u32,
    pub editor_count: u32,
    pub quality_class: Option<QualityClass>,
    pub importance_class: Option<ImportanceClass>,
    pub is_disambiguation: bool,
}

impl ArticleRecord {
    /// A plain content article with zeroed metadata.
    pub fn new(lang: impl Into<LanguageCode>, title: impl Into<String>, byte_length: u64) -> Self {
        Self {
            lang: lang.into(),
            title: title.into(),
            byte_length,
            is_redirect: false,
            redirect_target: None,
            created_months_ago: 0,
            last_edited_months_ago: 0,
            editor_count: 0,
            quality_class: None,
            importance_class: None,
            is_disambiguation: false,
        }
    }

    pub fn redirect(lang: impl Into<LanguageCode>, title: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            is_redirect: true,
            redirect_target: Some(target.into()),
            ..Self::new(lang, title, 0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SitelinkRecord {
    pub concept_id: ConceptId,
    pub lang: LanguageCode,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterlanguageLinkRecord {
    pub from_lang: LanguageCode,
    pub from_title: String,
    pub to_lang: LanguageCode,
    pub to_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageViewRecord {
    pub lang: LanguageCode,
    pub title: String,
    /// Views over the trailing six months.
    pub views: u64,
    /// Present only on per-country rows of the source language.
    pub country: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageLinkRecord {
    pub lang: LanguageCode,
    pub from_title: String,
    pub to_title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditEventRecord {
    pub editor_id: String,
    pub lang: LanguageCode,
    pub title: String,
    pub bytes_added: i64,
    pub timestamp: i64,
}

/// Bag of word tokens for one article, the input to topic modeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub lang: LanguageCode,
    pub title: String,
    pub tokens: Vec<String>,
}

/// The full interchange data set. Immutable once loaded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub languages: Vec<LanguageCode>,
    pub articles: Vec<ArticleRecord>,
    pub sitelinks: Vec<SitelinkRecord>,
    pub interlanguage_links: Vec<InterlanguageLinkRecord>,
    pub page_views: Vec<PageViewRecord>,
    pub page_links: Vec<PageLinkRecord>,
    pub edit_events: Vec<EditEventRecord>,
    pub token_docs: Vec<TokenDoc>,
    /// Referential problems found while loading. Not fatal.
    pub warnings: Vec<String>,
}

impl Corpus {
    pub fn has_language(&self, lang: &LanguageCode) -> bool {
        self.languages.contains(lang)
    }

    /// Data rows per interchange file, keyed by file name.
    pub fn row_counts(&self) -> BTreeMap<&'static str, usize> {
        BTreeMap::from([
            ("languages.tsv", self.languages.len()),
            ("articles.tsv", self.articles.len()),
            ("sitelinks.tsv", self.sitelinks.len()),
            ("langlinks.tsv", self.interlanguage_links.len()),
            ("pageviews.tsv", self.page_views.len()),
            ("pagelinks.tsv", self.page_links.len()),
            ("edits.tsv", self.edit_events.len()),
            ("tokens.tsv", self.token_docs.len()),
        ])
    }

    /// Sorts edit events by editor then timestamp (stable), the loaded order.
    pub fn normalize_edit_order(&mut self) {
        self.edit_events
            .sort_by(|a, b| a.editor_id.cmp(&b.editor_id).then(a.timestamp.cmp(&b.timestamp)));
    }
}
