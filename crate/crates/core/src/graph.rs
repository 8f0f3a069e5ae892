//! Coverage graph over concepts and articles, and missing-article detection.
//!
//! Nodes are knowledge-base concepts and the source/target-language articles
//! they link to. Edges are sitelinks, inter-language links between the two
//! languages of the pair, and redirects inside either language. A concept is
//! missing in the target language when its weakly connected component holds no
//! target-language article that is not a redirect.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{ConceptId, Corpus, LanguageCode};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("language {0} is not declared in the corpus")]
    UnknownLanguage(LanguageCode),
    #[error("source and target language are both {0}")]
    SameLanguage(LanguageCode),
    #[error("components have not been computed")]
    ComponentsNotComputed,
    #[error("malformed graph file line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Concept(ConceptId),
    Article { lang: LanguageCode, title: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Only meaningful for articles.
    pub is_redirect: bool,
    pub byte_length: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Sitelink,
    InterLanguage,
    Redirect,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeCounts {
    pub sitelink: usize,
    pub interlanguage: usize,
    pub redirect: usize,
}

#[derive(Debug, Clone)]
pub struct CoverageGraph {
    source: LanguageCode,
    target: LanguageCode,
    nodes: Vec<Node>,
    index: HashMap<NodeKind, usize>,
    edges: Vec<(u32, u32, EdgeKind)>,
    edge_set: HashSet<(u32, u32, EdgeKind)>,
    components: Option<Vec<u32>>,
}

struct ArticleInfo {
    is_redirect: bool,
    byte_length: u64,
    redirect_target: Option<String>,
}

impl CoverageGraph {
    /// An empty graph for the pair; nodes and edges are added explicitly.
    pub fn new(source: LanguageCode, target: LanguageCode) -> Self {
        Self {
            source,
            target,
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
            edge_set: HashSet::new(),
            components: None,
        }
    }

    /// Builds the graph for one (source, target) pair. Articles and links in
    /// any other language are left out.
    pub fn build(corpus: &Corpus, source: &LanguageCode, target: &LanguageCode) -> Result<Self, GraphError> {
        for lang in [source, target] {
            if !corpus.has_language(lang) {
                return Err(GraphError::UnknownLanguage(lang.clone()));
            }
        }
        if source == target {
            return Err(GraphError::SameLanguage(source.clone()));
        }
        let in_pair = |l: &LanguageCode| l == source || l == target;

        let mut info: HashMap<(&LanguageCode, &str), ArticleInfo> = HashMap::new();
        for a in corpus.articles.iter().filter(|a| in_pair(&a.lang)) {
            info.insert(
                (&a.lang, a.title.as_str()),
                ArticleInfo {
                    is_redirect: a.is_redirect,
                    byte_length: a.byte_length,
                    redirect_target: a.redirect_target.clone(),
                },
            );
        }
        let sitelinked: HashSet<(&LanguageCode, &str)> = corpus
            .sitelinks
            .iter()
            .filter(|s| in_pair(&s.lang))
            .map(|s| (&s.lang, s.title.as_str()))
            .collect();

        let mut g = Self::new(source.clone(), target.clone());
        let article = |g: &mut Self, lang: &LanguageCode, title: &str| {
            let (is_redirect, byte_length) = info
                .get(&(lang, title))
                .map_or((false, 0), |i| (i.is_redirect, i.byte_length));
            g.add_node(
                NodeKind::Article {
                    lang: lang.clone(),
                    title: title.to_string(),
                },
                is_redirect,
                byte_length,
            )
        };

        for s in corpus.sitelinks.iter().filter(|s| in_pair(&s.lang)) {
            let c = g.add_node(NodeKind::Concept(s.concept_id.clone()), false, 0);
            let a = article(&mut g, &s.lang, &s.title);
            g.add_edge(c, a, EdgeKind::Sitelink);
        }
        for l in &corpus.interlanguage_links {
            if !(in_pair(&l.from_lang) && in_pair(&l.to_lang)) {
                continue;
            }
            let a = article(&mut g, &l.from_lang, &l.from_title);
            let b = article(&mut g, &l.to_lang, &l.to_title);
            g.add_edge(a, b, EdgeKind::InterLanguage);
        }
        // Redirects to titles that exist nowhere are kept as isolated pointers.
        let mut redirects: Vec<_> = info
            .iter()
            .filter_map(|((lang, title), i)| Some((*lang, *title, i.redirect_target.as_deref()?)))
            .collect();
        redirects.sort();
        for (lang, title, to) in redirects {
            let from = article(&mut g, lang, title);
            if info.contains_key(&(lang, to)) || sitelinked.contains(&(lang, to)) {
                let to = article(&mut g, lang, to);
                g.add_edge(from, to, EdgeKind::Redirect);
            }
        }
        Ok(g)
    }

    pub fn source(&self) -> &LanguageCode {
        &self.source
    }

    pub fn target(&self) -> &LanguageCode {
        &self.target
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u32, u32, EdgeKind)] {
        &self.edges
    }

    pub fn node_index(&self, kind: &NodeKind) -> Option<usize> {
        self.index.get(kind).copied()
    }

    pub fn article_index(&self, lang: &str, title: &str) -> Option<usize> {
        self.node_index(&NodeKind::Article {
            lang: LanguageCode::new(lang).ok()?,
            title: title.to_string(),
        })
    }

    pub fn concept_index(&self, concept: &str) -> Option<usize> {
        self.node_index(&NodeKind::Concept(concept.to_string()))
    }

    /// Returns the node's index, inserting it if new. Adding invalidates components.
    pub fn add_node(&mut self, kind: NodeKind, is_redirect: bool, byte_length: u64) -> usize {
        if let Some(&i) = self.index.get(&kind) {
            return i;
        }
        let i = self.nodes.len();
        self.index.insert(kind.clone(), i);
        self.nodes.push(Node {
            kind,
            is_redirect,
            byte_length,
        });
        self.components = None;
        i
    }

    /// Adds an undirected edge; parallel duplicates of the same kind collapse.
    pub fn add_edge(&mut self, a: usize, b: usize, kind: EdgeKind) {
        let key = (a.min(b) as u32, a.max(b) as u32, kind);
        if self.edge_set.insert(key) {
            self.edges.push(key);
            self.components = None;
        }
    }

    pub fn edge_counts(&self) -> EdgeCounts {
        let mut c = EdgeCounts::default();
        for (_, _, kind) in &self.edges {
            match kind {
                EdgeKind::Sitelink => c.sitelink += 1,
                EdgeKind::InterLanguage => c.interlanguage += 1,
                EdgeKind::Redirect => c.redirect += 1,
            }
        }
        c
    }

    /// Labels every node with its weakly connected component.
    ///
    /// Labels are dense and numbered in order of each component's smallest
    /// node index, so they are deterministic for a given graph.
    pub fn weakly_connected_components(&mut self) {
        let n = self.nodes.len();
        // CSR adjacency.
        let mut degree = vec![0u32; n + 1];
        for &(a, b, _) in &self.edges {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut adj = vec![0u32; offsets[n] as usize];
        for &(a, b, _) in &self.edges {
            adj[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            adj[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }

        const UNSEEN: u32 = u32::MAX;
        let mut label = vec![UNSEEN; n];
        let mut next = 0u32;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != UNSEEN {
                continue;
            }
            label[start] = next;
            stack.push(start as u32);
            while let Some(v) = stack.pop() {
                let v = v as usize;
                for &w in &adj[offsets[v] as usize..offsets[v + 1] as usize] {
                    if label[w as usize] == UNSEEN {
                        label[w as usize] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        self.components = Some(label);
    }

    pub fn components(&self) -> Option<&[u32]> {
        self.components.as_deref()
    }

    pub fn component_count(&self) -> usize {
        self.components
            .as_ref()
            .map_or(0, |c| c.iter().max().map_or(0, |m| *m as usize + 1))
    }

    /// One entry per component that has source coverage but no target coverage.
    pub fn find_missing(&self) -> Result<MissingSet, GraphError> {
        let comp = self.components.as_ref().ok_or(GraphError::ComponentsNotComputed)?;
        let n_comp = self.component_count();

        #[derive(Default, Clone)]
        struct Summary<'a> {
            size: usize,
            covered: bool,
            concept: Option<&'a str>,
            // (byte_length, title) of the best source article so far.
            source: Option<(u64, &'a str)>,
        }
        let mut summary = vec![Summary::default(); n_comp];
        for (node, &c) in self.nodes.iter().zip(comp) {
            let s = &mut summary[c as usize];
            s.size += 1;
            match &node.kind {
                NodeKind::Concept(id) => {
                    if s.concept.is_none_or(|cur| id.as_str() < cur) {
                        s.concept = Some(id);
                    }
                }
                NodeKind::Article { lang, title } if !node.is_redirect => {
                    if *lang == self.target {
                        s.covered = true;
                    } else if *lang == self.source {
                        let better = match s.source {
                            None => true,
                            Some((len, t)) => node.byte_length > len || (node.byte_length == len && title.as_str() < t),
                        };
                        if better {
                            s.source = Some((node.byte_length, title));
                        }
                    }
                }
                NodeKind::Article { .. } => {}
            }
        }

        let mut entries: Vec<MissingEntry> = summary
            .into_iter()
            .filter(|s| !s.covered)
            .filter_map(|s| {
                Some(MissingEntry {
                    concept_id: s.concept?.to_string(),
                    source_title: s.source?.1.to_string(),
                    component_size: s.size,
                })
            })
            .collect();
        entries.sort_by(|a, b| a.concept_id.cmp(&b.concept_id));
        Ok(MissingSet {
            source: self.source.clone(),
            target: self.target.clone(),
            entries,
        })
    }

    /// Source-language articles whose component contains target coverage.
    pub fn covered_source_titles(&self) -> Result<HashSet<String>, GraphError> {
        let comp = self.components.as_ref().ok_or(GraphError::ComponentsNotComputed)?;
        let mut covered = vec![false; self.component_count()];
        for (node, &c) in self.nodes.iter().zip(comp) {
            if let NodeKind::Article { lang, .. } = &node.kind {
                if *lang == self.target && !node.is_redirect {
                    covered[c as usize] = true;
                }
            }
        }
        Ok(self
            .nodes
            .iter()
            .zip(comp)
            .filter_map(|(node, &c)| match &node.kind {
                NodeKind::Article { lang, title } if *lang == self.source && covered[c as usize] => {
                    Some(title.clone())
                }
                _ => None,
            })
            .collect())
    }

    /// Node table with component labels, one row per node.
    pub fn write_components_tsv(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        let comp = self.components.as_ref().ok_or(GraphError::ComponentsNotComputed)?;
        let mut s = format!("#pair\t{}\t{}\n", self.source, self.target);
        s.push_str("component_id\tkind\tlang\tkey\tis_redirect\tbyte_length\n");
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| (comp[a], &self.nodes[a].kind).cmp(&(comp[b], &self.nodes[b].kind)));
        for i in order {
            let n = &self.nodes[i];
            let (kind, lang, key) = match &n.kind {
                NodeKind::Concept(id) => ("concept", "", id.as_str()),
                NodeKind::Article { lang, title } => ("article", lang.as_str(), title.as_str()),
            };
            writeln!(
                s,
                "{}\t{kind}\t{lang}\t{key}\t{}\t{}",
                comp[i],
                u8::from(n.is_redirect),
                n.byte_length
            )
            .unwrap();
        }
        std::fs::write(path, s)?;
        Ok(())
    }

    /// Restores nodes and component labels written by
    /// [`write_components_tsv`](Self::write_components_tsv). Edges are not kept.
    pub fn read_components_tsv(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path)?;
        let bad = |line: usize, reason: &str| GraphError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let pair: Vec<&str> = lines.next().ok_or_else(|| bad(1, "empty file"))?.1.split('\t').collect();
        if pair.len() != 3 || pair[0] != "#pair" {
            return Err(bad(1, "expected #pair line"));
        }
        let lang = |s: &str, line| LanguageCode::new(s).map_err(|e| bad(line, &e));
        let mut g = Self::new(lang(pair[1], 1)?, lang(pair[2], 1)?);
        lines.next();
        let mut labels = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(bad(i + 1, "expected 6 columns"));
            }
            let kind = match f[1] {
                "concept" => NodeKind::Concept(f[3].to_string()),
                "article" => NodeKind::Article {
                    lang: lang(f[2], i + 1)?,
                    title: f[3].to_string(),
                },
                _ => return Err(bad(i + 1, "unknown node kind")),
            };
            let num = |s: &str| s.parse::<u64>().map_err(|_| bad(i + 1, "bad number"));
            g.add_node(kind, f[4] == "1", num(f[5])?);
            labels.push(num(f[0])? as u32);
        }
        g.components = Some(labels);
        Ok(g)
    }
}

/// One missing concept, identified by its component's representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingEntry {
    /// Lexicographically smallest concept in the component.
    pub concept_id: ConceptId,
    /// Longest source-language article in the component.
    pub source_title: String,
    pub component_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingSet {
    pub source: LanguageCode,
    pub target: LanguageCode,
    pub entries: Vec<MissingEntry>,
}

impl MissingSet {
    pub fn concept_ids(&self) -> BTreeSet<ConceptId> {
        self.entries.iter().map(|e| e.concept_id.clone()).collect()
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.entries
            .binary_search_by(|e| e.concept_id.as_str().cmp(concept))
            .is_ok()
    }

    pub fn to_tsv(&self) -> String {
        let mut s = format!("#pair\t{}\t{}\n", self.source, self.target);
        s.push_str("concept_id\tsource_title\tcomponent_size\n");
        for e in &self.entries {
            writeln!(s, "{}\t{}\t{}", e.concept_id, e.source_title, e.component_size).unwrap();
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self, GraphError> {
        let bad = |line: usize, reason: &str| GraphError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let pair: Vec<&str> = lines.next().ok_or_else(|| bad(1, "empty file"))?.1.split('\t').collect();
        if pair.len() != 3 || pair[0] != "#pair" {
            return Err(bad(1, "expected #pair line"));
        }
        let lang = |s: &str| LanguageCode::new(s).map_err(|e| bad(1, &e));
        let (source, target) = (lang(pair[1])?, lang(pair[2])?);
        lines.next();
        let mut entries = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(bad(i + 1, "expected 3 columns"));
            }
            entries.push(MissingEntry {
                concept_id: f[0].to_string(),
                source_title: f[1].to_string(),
                component_size: f[2].parse().map_err(|_| bad(i + 1, "bad component size"))?,
            });
        }
        entries.sort_by(|a, b| a.concept_id.cmp(&b.concept_id));
        Ok(Self {
            source,
            target,
            entries,
        })
    }
}

/// Builds the graph, labels components and returns the missing set.
pub fn detect_missing(corpus: &Corpus, source: &LanguageCode, target: &LanguageCode) -> Result<MissingSet, GraphError> {
    let mut g = CoverageGraph::build(corpus, source, target)?;
    g.weakly_connected_components();
    g.find_missing()
}
