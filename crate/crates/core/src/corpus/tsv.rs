//! Reading and writing the tab-separated interchange files.
//!
//! Every file has a mandatory header row, is UTF-8 and carries no quoting, so
//! tabs and newlines cannot appear inside a field.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::model::*;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing corpus file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {reason}")]
    MalformedRow { file: String, line: usize, reason: String },
    #[error("{file}: duplicate key {key} on lines {first_line} and {second_line}")]
    DuplicateKey {
        file: String,
        key: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub const LANGUAGES_FILE: &str = "languages.tsv";
pub const ARTICLES_FILE: &str = "articles.tsv";
pub const SITELINKS_FILE: &str = "sitelinks.tsv";
pub const LANGLINKS_FILE: &str = "langlinks.tsv";
pub const PAGEVIEWS_FILE: &str = "pageviews.tsv";
pub const PAGELINKS_FILE: &str = "pagelinks.tsv";
pub const EDITS_FILE: &str = "edits.tsv";
pub const TOKENS_FILE: &str = "tokens.tsv";

const LANGUAGES_HEADER: &[&str] = &["code"];
const ARTICLES_HEADER: &[&str] = &[
    "lang",
    "title",
    "byte_length",
    "is_redirect",
    "redirect_target",
    "created_months_ago",
    "last_edited_months_ago",
    "editor_count",
    "quality_class",
    "importance_class",
    "is_disambiguation",
];
const SITELINKS_HEADER: &[&str] = &["concept_id", "lang", "title"];
const LANGLINKS_HEADER: &[&str] = &["from_lang", "from_title", "to_lang", "to_title"];
const PAGEVIEWS_HEADER: &[&str] = &["lang", "title", "views", "country"];
const PAGELINKS_HEADER: &[&str] = &["lang", "from_title", "to_title"];
const EDITS_HEADER: &[&str] = &["editor_id", "lang", "title", "bytes_added", "timestamp"];
const TOKENS_HEADER: &[&str] = &["lang", "title", "tokens"];

struct Table {
    file: &'static str,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn malformed(&self, line: usize, reason: impl Into<String>) -> CorpusError {
        CorpusError::MalformedRow {
            file: self.file.to_string(),
            line,
            reason: reason.into(),
        }
    }
}

/// Reads one file. `optional_tail` trailing header columns may be omitted.
fn read_table(root: &Path, file: &'static str, header: &[&str], optional_tail: usize) -> Result<Table, CorpusError> {
    let path = root.join(file);
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(CorpusError::MissingFile(path)),
        Err(e) => return Err(e.into()),
    };
    let mut lines = text.lines().enumerate();
    let malformed = |line: usize, reason: String| CorpusError::MalformedRow {
        file: file.to_string(),
        line,
        reason,
    };
    let (_, head) = lines.next().ok_or_else(|| malformed(1, "missing header row".into()))?;
    let cols: Vec<&str> = head.split('\t').collect();
    let min = header.len() - optional_tail;
    if cols.len() < min || cols.len() > header.len() || cols[..] != header[..cols.len()] {
        return Err(malformed(1, format!("expected header {:?}, found {:?}", header.join("\t"), head)));
    }
    let width = cols.len();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields: Vec<String> = line.split('\t').map(str::to_string).collect();
        if fields.len() != width {
            return Err(malformed(
                line_no,
                format!("expected {width} columns, found {}", fields.len()),
            ));
        }
        fields.resize(header.len(), String::new());
        rows.push((line_no, fields));
    }
    Ok(Table { file, rows })
}

fn parse_lang(t: &Table, line: usize, s: &str) -> Result<LanguageCode, CorpusError> {
    LanguageCode::new(s).map_err(|e| t.malformed(line, e))
}

fn parse_num<N: std::str::FromStr>(t: &Table, line: usize, col: &str, s: &str) -> Result<N, CorpusError> {
    s.parse()
        .map_err(|_| t.malformed(line, format!("{col}: cannot parse {s:?} as a number")))
}

fn parse_bool(t: &Table, line: usize, col: &str, s: &str) -> Result<bool, CorpusError> {
    match s {
        "1" | "true" => Ok(true),
        "0" | "false" | "" => Ok(false),
        _ => Err(t.malformed(line, format!("{col}: expected 0/1, found {s:?}"))),
    }
}

fn non_empty(t: &Table, line: usize, col: &str, s: &str) -> Result<String, CorpusError> {
    if s.is_empty() {
        Err(t.malformed(line, format!("{col} is empty")))
    } else {
        Ok(s.to_string())
    }
}

fn optional(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

/// Remembers the first line each key was seen on.
struct UniqueKeys<K> {
    file: &'static str,
    seen: HashMap<K, usize>,
}

impl<K: std::hash::Hash + Eq + std::fmt::Debug> UniqueKeys<K> {
    fn new(file: &'static str) -> Self {
        Self {
            file,
            seen: HashMap::new(),
        }
    }

    fn insert(&mut self, key: K, line: usize) -> Result<(), CorpusError> {
        match self.seen.entry(key) {
            Entry::Occupied(e) => Err(CorpusError::DuplicateKey {
                file: self.file.to_string(),
                key: format!("{:?}", e.key()),
                first_line: *e.get(),
                second_line: line,
            }),
            Entry::Vacant(v) => {
                v.insert(line);
                Ok(())
            }
        }
    }
}

/// Loads and validates a corpus directory.
pub fn load_corpus(root: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let root = root.as_ref();
    let mut corpus = Corpus::default();

    let t = read_table(root, LANGUAGES_FILE, LANGUAGES_HEADER, 0)?;
    let mut keys = UniqueKeys::new(t.file);
    for (line, f) in &t.rows {
        let lang = parse_lang(&t, *line, &f[0])?;
        keys.insert(lang.clone(), *line)?;
        corpus.languages.push(lang);
    }

    let t = read_table(root, ARTICLES_FILE, ARTICLES_HEADER, 1)?;
    let mut keys = UniqueKeys::new(t.file);
    for (line, f) in &t.rows {
        let line = *line;
        let lang = parse_lang(&t, line, &f[0])?;
        let title = non_empty(&t, line, "title", &f[1])?;
        let is_redirect = parse_bool(&t, line, "is_redirect", &f[3])?;
        let redirect_target = optional(&f[4]);
        if is_redirect != redirect_target.is_some() {
            return Err(t.malformed(line, "redirect_target must be present iff is_redirect"));
        }
        let created_months_ago: u32 = parse_num(&t, line, "created_months_ago", &f[5])?;
        let last_edited_months_ago: u32 = parse_num(&t, line, "last_edited_months_ago", &f[6])?;
        if last_edited_months_ago > created_months_ago {
            return Err(t.malformed(line, "last edit is older than creation"));
        }
        keys.insert((lang.clone(), title.clone()), line)?;
        corpus.articles.push(ArticleRecord {
            lang,
            title,
            byte_length: parse_num(&t, line, "byte_length", &f[2])?,
            is_redirect,
            redirect_target,
            created_months_ago,
            last_edited_months_ago,
            editor_count: parse_num(&t, line, "editor_count", &f[7])?,
            quality_class: QualityClass::parse(&f[8]),
            importance_class: ImportanceClass::parse(&f[9]),
            is_disambiguation: parse_bool(&t, line, "is_disambiguation", &f[10])?,
        });
    }

    let t = read_table(root, SITELINKS_FILE, SITELINKS_HEADER, 0)?;
    let mut keys = UniqueKeys::new(t.file);
    for (line, f) in &t.rows {
        let concept_id = non_empty(&t, *line, "concept_id", &f[0])?;
        let lang = parse_lang(&t, *line, &f[1])?;
        keys.insert((concept_id.clone(), lang.clone()), *line)?;
        corpus.sitelinks.push(SitelinkRecord {
            concept_id,
            lang,
            title: non_empty(&t, *line, "title", &f[2])?,
        });
    }

    let t = read_table(root, LANGLINKS_FILE, LANGLINKS_HEADER, 0)?;
    for (line, f) in &t.rows {
        let from_lang = parse_lang(&t, *line, &f[0])?;
        let to_lang = parse_lang(&t, *line, &f[2])?;
        if from_lang == to_lang {
            return Err(t.malformed(*line, "inter-language link within one language"));
        }
        corpus.interlanguage_links.push(InterlanguageLinkRecord {
            from_lang,
            from_title: non_empty(&t, *line, "from_title", &f[1])?,
            to_lang,
            to_title: non_empty(&t, *line, "to_title", &f[3])?,
        });
    }

    let t = read_table(root, PAGEVIEWS_FILE, PAGEVIEWS_HEADER, 0)?;
    let mut keys = UniqueKeys::new(t.file);
    for (line, f) in &t.rows {
        let lang = parse_lang(&t, *line, &f[0])?;
        let title = non_empty(&t, *line, "title", &f[1])?;
        let country = optional(&f[3]);
        keys.insert((lang.clone(), title.clone(), country.clone()), *line)?;
        corpus.page_views.push(PageViewRecord {
            lang,
            title,
            views: parse_num(&t, *line, "views", &f[2])?,
            country,
        });
    }

    let t = read_table(root, PAGELINKS_FILE, PAGELINKS_HEADER, 0)?;
    for (line, f) in &t.rows {
        corpus.page_links.push(PageLinkRecord {
            lang: parse_lang(&t, *line, &f[0])?,
            from_title: non_empty(&t, *line, "from_title", &f[1])?,
            to_title: non_empty(&t, *line, "to_title", &f[2])?,
        });
    }

    let t = read_table(root, EDITS_FILE, EDITS_HEADER, 0)?;
    for (line, f) in &t.rows {
        corpus.edit_events.push(EditEventRecord {
            editor_id: non_empty(&t, *line, "editor_id", &f[0])?,
            lang: parse_lang(&t, *line, &f[1])?,
            title: non_empty(&t, *line, "title", &f[2])?,
            bytes_added: parse_num(&t, *line, "bytes_added", &f[3])?,
            timestamp: parse_num(&t, *line, "timestamp", &f[4])?,
        });
    }
    corpus.normalize_edit_order();

    let t = read_table(root, TOKENS_FILE, TOKENS_HEADER, 0)?;
    let mut keys = UniqueKeys::new(t.file);
    for (line, f) in &t.rows {
        let lang = parse_lang(&t, *line, &f[0])?;
        let title = non_empty(&t, *line, "title", &f[1])?;
        keys.insert((lang.clone(), title.clone()), *line)?;
        corpus.token_docs.push(TokenDoc {
            lang,
            title,
            tokens: f[2].split(' ').filter(|s| !s.is_empty()).map(str::to_string).collect(),
        });
    }

    corpus.warnings = referential_warnings(&corpus);
    Ok(corpus)
}

fn referential_warnings(c: &Corpus) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut check = |file: &str, lang: &LanguageCode| {
        if !c.languages.contains(lang) {
            warnings.push(format!("{file}: undeclared language {lang}"));
        }
    };
    for a in &c.articles {
        check(ARTICLES_FILE, &a.lang);
    }
    for s in &c.sitelinks {
        check(SITELINKS_FILE, &s.lang);
    }
    for l in &c.interlanguage_links {
        check(LANGLINKS_FILE, &l.from_lang);
        check(LANGLINKS_FILE, &l.to_lang);
    }
    for v in &c.page_views {
        check(PAGEVIEWS_FILE, &v.lang);
    }
    for p in &c.page_links {
        check(PAGELINKS_FILE, &p.lang);
    }
    for e in &c.edit_events {
        check(EDITS_FILE, &e.lang);
    }
    for d in &c.token_docs {
        check(TOKENS_FILE, &d.lang);
    }
    warnings.sort();
    warnings.dedup();
    warnings
}

fn write_file(path: &Path, header: &[&str], body: String) -> io::Result<()> {
    let mut out = header.join("\t");
    out.push('\n');
    out.push_str(&body);
    fs::write(path, out)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes a corpus in the interchange layout; the inverse of [`load_corpus`].
pub fn write_corpus(corpus: &Corpus, root: impl AsRef<Path>) -> io::Result<()> {
    let root = root.as_ref();
    fs::create_dir_all(root)?;

    let mut s = String::new();
    for l in &corpus.languages {
        writeln!(s, "{l}").unwrap();
    }
    write_file(&root.join(LANGUAGES_FILE), LANGUAGES_HEADER, s)?;

    let mut s = String::new();
    for a in &corpus.articles {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            a.lang,
            a.title,
            a.byte_length,
            flag(a.is_redirect),
            a.redirect_target.as_deref().unwrap_or(""),
            a.created_months_ago,
            a.last_edited_months_ago,
            a.editor_count,
            a.quality_class.map_or("", QualityClass::as_str),
            a.importance_class.map_or("", ImportanceClass::as_str),
            flag(a.is_disambiguation),
        )
        .unwrap();
    }
    write_file(&root.join(ARTICLES_FILE), ARTICLES_HEADER, s)?;

    let mut s = String::new();
    for r in &corpus.sitelinks {
        writeln!(s, "{}\t{}\t{}", r.concept_id, r.lang, r.title).unwrap();
    }
    write_file(&root.join(SITELINKS_FILE), SITELINKS_HEADER, s)?;

    let mut s = String::new();
    for r in &corpus.interlanguage_links {
        writeln!(s, "{}\t{}\t{}\t{}", r.from_lang, r.from_title, r.to_lang, r.to_title).unwrap();
    }
    write_file(&root.join(LANGLINKS_FILE), LANGLINKS_HEADER, s)?;

    let mut s = String::new();
    for r in &corpus.page_views {
        writeln!(s, "{}\t{}\t{}\t{}", r.lang, r.title, r.views, r.country.as_deref().unwrap_or("")).unwrap();
    }
    write_file(&root.join(PAGEVIEWS_FILE), PAGEVIEWS_HEADER, s)?;

    let mut s = String::new();
    for r in &corpus.page_links {
        writeln!(s, "{}\t{}\t{}", r.lang, r.from_title, r.to_title).unwrap();
    }
    write_file(&root.join(PAGELINKS_FILE), PAGELINKS_HEADER, s)?;

    let mut s = String::new();
    for r in &corpus.edit_events {
        writeln!(s, "{}\t{}\t{}\t{}\t{}", r.editor_id, r.lang, r.title, r.bytes_added, r.timestamp).unwrap();
    }
    write_file(&root.join(EDITS_FILE), EDITS_HEADER, s)?;

    let mut s = String::new();
    for r in &corpus.token_docs {
        writeln!(s, "{}\t{}\t{}", r.lang, r.title, r.tokens.join(" ")).unwrap();
    }
    write_file(&root.join(TOKENS_FILE), TOKENS_HEADER, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_headers_only(dir: &Path) {
        write_corpus(&Corpus::default(), dir).unwrap();
    }

    #[test]
    fn header_only_files_load_empty() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        let c = load_corpus(dir.path()).unwrap();
        assert!(c.row_counts().values().all(|&n| n == 0));
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn missing_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        fs::remove_file(dir.path().join(EDITS_FILE)).unwrap();
        match load_corpus(dir.path()) {
            Err(CorpusError::MissingFile(p)) => assert!(p.ends_with(EDITS_FILE)),
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_sitelink_names_both_lines() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        fs::write(
            dir.path().join(SITELINKS_FILE),
            "concept_id\tlang\ttitle\nQ1\ten\tAlpha\nQ2\ten\tBeta\nQ1\ten\tGamma\n",
        )
        .unwrap();
        match load_corpus(dir.path()) {
            Err(CorpusError::DuplicateKey {
                first_line,
                second_line,
                ..
            }) => assert_eq!((first_line, second_line), (2, 4)),
            other => panic!("expected DuplicateKey, got {other:?}"),
        }
    }

    #[test]
    fn redirect_without_target_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        let mut text = ARTICLES_HEADER.join("\t");
        text.push_str("\nen\tFoo\t10\t1\t\t3\t1\t2\t\t\t0\n");
        fs::write(dir.path().join(ARTICLES_FILE), text).unwrap();
        assert!(matches!(
            load_corpus(dir.path()),
            Err(CorpusError::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn last_edit_must_not_predate_creation() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        let mut text = ARTICLES_HEADER.join("\t");
        text.push_str("\nen\tFoo\t10\t0\t\t3\t9\t2\t\t\t0\n");
        fs::write(dir.path().join(ARTICLES_FILE), text).unwrap();
        assert!(matches!(load_corpus(dir.path()), Err(CorpusError::MalformedRow { .. })));
    }

    #[test]
    fn disambiguation_column_is_optional_and_unknown_classes_are_absent() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        let header = ARTICLES_HEADER[..10].join("\t");
        fs::write(
            dir.path().join(ARTICLES_FILE),
            format!("{header}\nen\tFoo\t10\t0\t\t3\t1\t2\tB-class\tmid\n"),
        )
        .unwrap();
        fs::write(dir.path().join(LANGUAGES_FILE), "code\nen\n").unwrap();
        let c = load_corpus(dir.path()).unwrap();
        assert_eq!(c.articles[0].quality_class, None);
        assert_eq!(c.articles[0].importance_class, Some(ImportanceClass::Mid));
        assert!(!c.articles[0].is_disambiguation);
    }

    #[test]
    fn same_language_langlink_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        fs::write(
            dir.path().join(LANGLINKS_FILE),
            "from_lang\tfrom_title\tto_lang\tto_title\nen\tA\ten\tB\n",
        )
        .unwrap();
        assert!(matches!(load_corpus(dir.path()), Err(CorpusError::MalformedRow { line: 2, .. })));
    }

    #[test]
    fn undeclared_language_is_a_warning() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        fs::write(dir.path().join(SITELINKS_FILE), "concept_id\tlang\ttitle\nQ1\txx\tFoo\n").unwrap();
        let c = load_corpus(dir.path()).unwrap();
        assert_eq!(c.warnings, vec!["sitelinks.tsv: undeclared language xx".to_string()]);
    }

    #[test]
    fn edits_are_sorted_by_editor_then_time() {
        let dir = tempfile::tempdir().unwrap();
        write_headers_only(dir.path());
        fs::write(
            dir.path().join(EDITS_FILE),
            "editor_id\tlang\ttitle\tbytes_added\ttimestamp\nb\ten\tX\t5\t1\na\ten\tY\t5\t9\na\ten\tZ\t-3\t2\n",
        )
        .unwrap();
        let c = load_corpus(dir.path()).unwrap();
        let order: Vec<_> = c.edit_events.iter().map(|e| (e.editor_id.as_str(), e.timestamp)).collect();
        assert_eq!(order, vec![("a", 2), ("a", 9), ("b", 1)]);
    }
}
