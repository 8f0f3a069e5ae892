//! Synthetic corpora with planted ground truth.
//!
//! Every concept gets a latent popularity, a topic mixture and a planted
//! coverage decision per language. Coverage of a language is realised in one
//! of four ways so that detection has to merge clusters:
//!
//! * a direct sitelink from the concept to the article;
//! * a separate near-synonym concept owning the article, joined to the source
//!   article by an inter-language link;
//! * the same, but the inter-language link lands on a redirect to the article;
//! * the same, but the link starts from a source-language redirect.
//!
//! Uncovered concepts may carry decoys that must not count as coverage: a link
//! to a dangling target-language redirect, or a link routed through a third
//! language.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use super::model::*;
use super::tsv::CorpusError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageSpec {
    pub code: LanguageCode,
    /// Probability that a concept is covered in this language.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_concepts: usize,
    pub source: LanguageCode,
    /// Non-source languages. The first one is the usual target.
    pub languages: Vec<LanguageSpec>,
    pub n_topics: usize,
    pub vocab_size: usize,
    pub doc_length: usize,
    pub n_editors: usize,
    pub edits_per_editor: usize,
    /// Probability that an editor's edit lands on their focus topic.
    pub editor_focus: f64,
    /// Fraction of covered concepts realised through a near-synonym concept.
    pub split_rate: f64,
    /// Fraction of uncovered concepts given a decoy link.
    pub decoy_rate: f64,
    /// Extra concepts per non-source language that exist only there, as a
    /// fraction of `n_concepts`.
    pub exclusive_fraction: f64,
    /// Std of per-language popularity noise (log-view scale units).
    pub view_noise: f64,
    /// Std of per-language, per-topic popularity offsets.
    pub topic_affinity: f64,
    /// How strongly popular concepts are more likely to be covered.
    pub coverage_popularity_bias: f64,
    pub n_countries: usize,
    pub links_per_article: usize,
    /// Concentration of the planted topic-word distributions.
    pub topic_word_concentration: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_concepts: 2000,
            source: "en".into(),
            languages: vec![
                LanguageSpec {
                    code: "fr".into(),
                    coverage: 0.5,
                },
                LanguageSpec {
                    code: "de".into(),
                    coverage: 0.6,
                },
                LanguageSpec {
                    code: "es".into(),
                    coverage: 0.5,
                },
            ],
            n_topics: 10,
            vocab_size: 400,
            doc_length: 60,
            n_editors: 50,
            edits_per_editor: 30,
            editor_focus: 0.9,
            split_rate: 0.15,
            decoy_rate: 0.1,
            exclusive_fraction: 0.2,
            view_noise: 0.35,
            topic_affinity: 0.6,
            coverage_popularity_bias: 1.0,
            n_countries: 12,
            links_per_article: 5,
            topic_word_concentration: 0.05,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: &str| Err(CorpusError::InvalidSpec(m.to_string()));
        if self.n_concepts == 0 {
            return bad("n_concepts must be positive");
        }
        if self.languages.is_empty() {
            return bad("need at least one non-source language");
        }
        let mut seen = BTreeSet::from([self.source.clone()]);
        for l in &self.languages {
            if !seen.insert(l.code.clone()) {
                return bad("duplicate language");
            }
            if !(0.0..=1.0).contains(&l.coverage) {
                return bad("coverage must lie in [0, 1]");
            }
        }
        if self.n_topics < 2 || self.vocab_size < self.n_topics {
            return bad("need n_topics >= 2 and vocab_size >= n_topics");
        }
        if self.doc_length == 0 {
            return bad("doc_length must be positive");
        }
        for (name, p) in [
            ("editor_focus", self.editor_focus),
            ("split_rate", self.split_rate),
            ("decoy_rate", self.decoy_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if self.exclusive_fraction < 0.0
            || self.view_noise < 0.0
            || self.topic_affinity < 0.0
            || self.topic_word_concentration <= 0.0
        {
            return bad("negative scale parameter");
        }
        if self.n_countries == 0 {
            return bad("n_countries must be positive");
        }
        Ok(())
    }

    /// All languages, source first.
    pub fn all_languages(&self) -> Vec<LanguageCode> {
        std::iter::once(self.source.clone())
            .chain(self.languages.iter().map(|l| l.code.clone()))
            .collect()
    }
}

/// What the generator planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub source: LanguageCode,
    /// Concepts truly missing per non-source language.
    pub missing: BTreeMap<LanguageCode, BTreeSet<ConceptId>>,
    /// Planted topic mixture of each concept with a source article.
    pub concept_topics: BTreeMap<ConceptId, Vec<f64>>,
    /// Dominant planted topic per concept.
    pub dominant_topic: BTreeMap<ConceptId, usize>,
    /// Planted topic-word distributions, one row per topic.
    pub topic_words: Vec<Vec<f64>>,
    pub editor_focus: BTreeMap<String, usize>,
    /// Latent popularity driving views in every language.
    pub popularity: BTreeMap<ConceptId, f64>,
}

impl GroundTruth {
    pub fn missing(&self, lang: &LanguageCode) -> BTreeSet<ConceptId> {
        self.missing.get(lang).cloned().unwrap_or_default()
    }
}

pub fn concept_id(i: usize) -> ConceptId {
    format!("Q{}", i + 1)
}

fn title(lang: &LanguageCode, i: usize) -> String {
    format!("{lang} concept {i}")
}

fn token(w: usize) -> String {
    format!("w{w}")
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        (p / (1.0 - p)).ln()
    }
}

fn sample_index(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Symmetric Dirichlet draw via normalized Gamma variates.
fn dirichlet(rng: &mut impl Rng, concentration: f64, n: usize) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = v.iter().sum();
        // Tiny concentrations can underflow every component.
        if total > 0.0 {
            v.iter_mut().for_each(|x| *x /= total);
            return v;
        }
    }
}

/// Topic-word distributions drawn from a symmetric Dirichlet.
pub fn planted_topic_words(rng: &mut impl Rng, n_topics: usize, vocab: usize, concentration: f64) -> Vec<Vec<f64>> {
    (0..n_topics).map(|_| dirichlet(rng, concentration, vocab)).collect()
}

/// A mixture with most of its mass on `dominant`.
fn planted_mixture(rng: &mut impl Rng, n_topics: usize, dominant: usize) -> Vec<f64> {
    let rest = dirichlet(rng, 0.3, n_topics);
    (0..n_topics)
        .map(|k| 0.3 * rest[k] + if k == dominant { 0.7 } else { 0.0 })
        .collect()
}

fn sample_doc(rng: &mut impl Rng, mixture: &[f64], topic_words: &[Vec<f64>], len: usize) -> Vec<String> {
    (0..len)
        .map(|_| {
            let k = sample_index(rng, mixture);
            token(sample_index(rng, &topic_words[k]))
        })
        .collect()
}

/// Documents drawn from planted topics, for topic-recovery checks.
pub fn planted_topic_docs(
    n_topics: usize,
    vocab: usize,
    n_docs: usize,
    doc_len: usize,
    seed: u64,
) -> (Vec<Vec<String>>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topic_words = planted_topic_words(&mut rng, n_topics, vocab, 0.05);
    let mut mixtures = Vec::with_capacity(n_docs);
    let docs = (0..n_docs)
        .map(|d| {
            let mixture = planted_mixture(&mut rng, n_topics, d % n_topics);
            let doc = sample_doc(&mut rng, &mixture, &topic_words, doc_len);
            mixtures.push(mixture);
            doc
        })
        .collect();
    (docs, topic_words, mixtures)
}

/// Vocabulary token for index `w` in planted topic-word rows.
pub fn planted_token(w: usize) -> String {
    token(w)
}

struct Planted {
    popularity: f64,
    mixture: Vec<f64>,
    dominant: usize,
}

/// Generates a corpus and its ground truth. Deterministic in `(spec, seed)`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<(Corpus, GroundTruth), CorpusError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let langs = spec.all_languages();
    let src = &spec.source;
    let k = spec.n_topics;
    let normal = Normal::new(0.0, 1.0).unwrap();

    let topic_words = planted_topic_words(&mut rng, k, spec.vocab_size, spec.topic_word_concentration);
    let affinity: Vec<Vec<f64>> = langs
        .iter()
        .map(|_| (0..k).map(|_| spec.topic_affinity * normal.sample(&mut rng)).collect())
        .collect();
    let country_weights: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..spec.n_countries).map(|_| (0.7 * normal.sample(&mut rng)).exp()).collect())
        .collect();
    let countries: Vec<String> = (0..spec.n_countries).map(|j| format!("c{j:02}")).collect();

    let planted: Vec<Planted> = (0..spec.n_concepts)
        .map(|_| {
            let dominant = rng.random_range(0..k);
            Planted {
                popularity: normal.sample(&mut rng),
                mixture: planted_mixture(&mut rng, k, dominant),
                dominant,
            }
        })
        .collect();

    let mut corpus = Corpus {
        languages: langs.clone(),
        ..Corpus::default()
    };
    let mut truth = GroundTruth {
        source: src.clone(),
        missing: BTreeMap::new(),
        concept_topics: BTreeMap::new(),
        dominant_topic: BTreeMap::new(),
        topic_words: topic_words.clone(),
        editor_focus: BTreeMap::new(),
        popularity: BTreeMap::new(),
    };

    // Popularity score of a concept in a language; views are exp of it.
    let score = |rng: &mut ChaCha8Rng, p: &Planted, li: usize| -> f64 {
        let aff: f64 = p.mixture.iter().zip(&affinity[li]).map(|(m, a)| m * a).sum();
        p.popularity + aff + spec.view_noise * normal.sample(rng)
    };
    let views_of = |s: f64| -> u64 { (1000.0 * (1.2 * s).exp()).round() as u64 };

    let mut next_extra = spec.n_concepts;
    // (lang, title) of every content article with its popularity score, for views and metadata.
    let mut content: Vec<(usize, String, f64, Option<usize>)> = Vec::new();

    for (i, p) in planted.iter().enumerate() {
        let qid = concept_id(i);
        let src_title = title(src, i);
        truth.popularity.insert(qid.clone(), p.popularity);
        truth.concept_topics.insert(qid.clone(), p.mixture.clone());
        truth.dominant_topic.insert(qid.clone(), p.dominant);
        corpus.sitelinks.push(SitelinkRecord {
            concept_id: qid.clone(),
            lang: src.clone(),
            title: src_title.clone(),
        });
        let s = score(&mut rng, p, 0);
        content.push((0, src_title.clone(), s, Some(i)));
        corpus.token_docs.push(TokenDoc {
            lang: src.clone(),
            title: src_title.clone(),
            tokens: sample_doc(&mut rng, &p.mixture, &topic_words, spec.doc_length),
        });

        for (li0, lspec) in spec.languages.iter().enumerate() {
            let li = li0 + 1;
            let lang = &lspec.code;
            let p_cover = logistic(logit(lspec.coverage) + spec.coverage_popularity_bias * p.popularity);
            let covered = rng.random::<f64>() < p_cover;
            if !covered {
                truth.missing.entry(lang.clone()).or_default().insert(qid.clone());
                if rng.random::<f64>() < spec.decoy_rate {
                    // A link to a target-language redirect whose target was never written.
                    let redirect = format!("{lang} dangling {i}");
                    corpus.articles.push(ArticleRecord::redirect(
                        lang.clone(),
                        redirect.clone(),
                        format!("{lang} deleted {i}"),
                    ));
                    corpus.interlanguage_links.push(InterlanguageLinkRecord {
                        from_lang: src.clone(),
                        from_title: src_title.clone(),
                        to_lang: lang.clone(),
                        to_title: redirect,
                    });
                }
                continue;
            }
            let lt = title(lang, i);
            let s = score(&mut rng, p, li);
            content.push((li, lt.clone(), s, Some(i)));
            if rng.random::<f64>() >= spec.split_rate {
                corpus.sitelinks.push(SitelinkRecord {
                    concept_id: qid.clone(),
                    lang: lang.clone(),
                    title: lt.clone(),
                });
                if rng.random::<f64>() < 0.2 {
                    corpus.interlanguage_links.push(InterlanguageLinkRecord {
                        from_lang: lang.clone(),
                        from_title: lt,
                        to_lang: src.clone(),
                        to_title: src_title.clone(),
                    });
                }
                continue;
            }
            // Near-synonym concept owning the article in this language.
            let syn = concept_id(next_extra);
            next_extra += 1;
            corpus.sitelinks.push(SitelinkRecord {
                concept_id: syn,
                lang: lang.clone(),
                title: lt.clone(),
            });
            match rng.random_range(0..3) {
                0 => corpus.interlanguage_links.push(InterlanguageLinkRecord {
                    from_lang: src.clone(),
                    from_title: src_title.clone(),
                    to_lang: lang.clone(),
                    to_title: lt,
                }),
                1 => {
                    let redirect = format!("{lang} synonym {i}");
                    corpus.articles.push(ArticleRecord::redirect(lang.clone(), redirect.clone(), lt));
                    corpus.interlanguage_links.push(InterlanguageLinkRecord {
                        from_lang: src.clone(),
                        from_title: src_title.clone(),
                        to_lang: lang.clone(),
                        to_title: redirect,
                    });
                }
                _ => {
                    let redirect = format!("{src} synonym {i} {lang}");
                    corpus.articles.push(ArticleRecord::redirect(
                        src.clone(),
                        redirect.clone(),
                        src_title.clone(),
                    ));
                    corpus.interlanguage_links.push(InterlanguageLinkRecord {
                        from_lang: lang.clone(),
                        from_title: lt,
                        to_lang: src.clone(),
                        to_title: redirect,
                    });
                }
            }
        }
    }

    // Links through a third language must never merge clusters for a pair.
    if spec.languages.len() >= 2 {
        let (t, x) = (&spec.languages[0].code, &spec.languages[1].code);
        let covered_t: Vec<usize> = (0..spec.n_concepts)
            .filter(|i| !truth.missing(t).contains(&concept_id(*i)))
            .collect();
        let sitelinked: BTreeSet<(LanguageCode, String)> =
            corpus.sitelinks.iter().map(|s| (s.lang.clone(), s.title.clone())).collect();
        let has = |lang: &LanguageCode, i: usize| sitelinked.contains(&(lang.clone(), title(lang, i)));
        let missing_t: Vec<usize> = (0..spec.n_concepts)
            .filter(|i| truth.missing(t).contains(&concept_id(*i)))
            .collect();
        if !covered_t.is_empty() {
            for &i in &missing_t {
                if rng.random::<f64>() < spec.decoy_rate && has(x, i) {
                    let j = *covered_t.choose(&mut rng).unwrap();
                    if has(t, j) {
                        corpus.interlanguage_links.push(InterlanguageLinkRecord {
                            from_lang: x.clone(),
                            from_title: title(x, i),
                            to_lang: t.clone(),
                            to_title: title(t, j),
                        });
                    }
                }
            }
        }
    }

    // Concepts that exist in exactly one non-source language.
    let n_exclusive = (spec.exclusive_fraction * spec.n_concepts as f64).round() as usize;
    for (li0, lspec) in spec.languages.iter().enumerate() {
        let li = li0 + 1;
        for j in 0..n_exclusive {
            let qid = concept_id(next_extra);
            next_extra += 1;
            let t = format!("{} exclusive {j}", lspec.code);
            let dominant = rng.random_range(0..k);
            let p = Planted {
                popularity: normal.sample(&mut rng) - 0.5,
                mixture: planted_mixture(&mut rng, k, dominant),
                dominant,
            };
            let s = score(&mut rng, &p, li);
            content.push((li, t.clone(), s, None));
            corpus.sitelinks.push(SitelinkRecord {
                concept_id: qid,
                lang: lspec.code.clone(),
                title: t,
            });
        }
    }

    // View counts are made distinct within each language, keeping their order.
    let mut views: Vec<u64> = content.iter().map(|c| views_of(c.2)).collect();
    let mut order: Vec<usize> = (0..content.len()).collect();
    order.sort_by(|&a, &b| (content[a].0, views[a], &content[a].1).cmp(&(content[b].0, views[b], &content[b].1)));
    let mut prev: Option<(usize, u64)> = None;
    for i in order {
        if let Some((li, v)) = prev {
            if li == content[i].0 && views[i] <= v {
                views[i] = v + 1;
            }
        }
        prev = Some((content[i].0, views[i]));
    }

    // Article metadata and views for content articles.
    for (idx, (li, t, s, concept)) in content.iter().enumerate() {
        let lang = &langs[*li];
        let views = views[idx];
        let len_noise = LogNormal::new(0.0, 0.5).unwrap().sample(&mut rng);
        let byte_length = (4000.0 * (0.5 * s).exp() * len_noise).round() as u64 + 200;
        let created = rng.random_range(1..180u32);
        let last = rng.random_range(0..=created.min(24));
        let quality = match *s {
            s if s > 2.0 => Some(QualityClass::Featured),
            s if s > 1.2 => Some(QualityClass::Good),
            s if s < -0.5 => Some(QualityClass::Stub),
            _ => None,
        };
        let importance = if rng.random::<f64>() < 0.6 {
            Some(match *s {
                s if s > 1.5 => ImportanceClass::Top,
                s if s > 0.5 => ImportanceClass::High,
                s if s > -0.5 => ImportanceClass::Mid,
                _ => ImportanceClass::Low,
            })
        } else {
            None
        };
        corpus.articles.push(ArticleRecord {
            lang: lang.clone(),
            title: t.clone(),
            byte_length,
            is_redirect: false,
            redirect_target: None,
            created_months_ago: created,
            last_edited_months_ago: last,
            editor_count: (3.0 * (0.6 * s).exp() * len_noise).round() as u32 + 1,
            quality_class: quality,
            importance_class: importance,
            is_disambiguation: false,
        });
        corpus.page_views.push(PageViewRecord {
            lang: lang.clone(),
            title: t.clone(),
            views,
            country: None,
        });
        if *li == 0 {
            let dominant = concept.map(|i| planted[i].dominant).unwrap_or(0);
            let w = &country_weights[dominant];
            let total: f64 = w.iter().sum();
            for (c, wc) in countries.iter().zip(w) {
                let v = (views as f64 * wc / total).round() as u64;
                if v > 0 {
                    corpus.page_views.push(PageViewRecord {
                        lang: lang.clone(),
                        title: t.clone(),
                        views: v,
                        country: Some(c.clone()),
                    });
                }
            }
        }
    }

    // Intra-language page links, biased towards the same dominant topic.
    let mut by_topic: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, p) in planted.iter().enumerate() {
        by_topic[p.dominant].push(i);
    }
    for (i, p) in planted.iter().enumerate() {
        let mut targets = BTreeSet::new();
        for _ in 0..spec.links_per_article {
            let j = if rng.random::<f64>() < 0.7 {
                *by_topic[p.dominant].choose(&mut rng).unwrap()
            } else {
                rng.random_range(0..spec.n_concepts)
            };
            if j != i {
                targets.insert(j);
            }
        }
        for j in targets {
            corpus.page_links.push(PageLinkRecord {
                lang: src.clone(),
                from_title: title(src, i),
                to_title: title(src, j),
            });
        }
    }

    // Editors with a planted focus topic.
    let other_langs: Vec<usize> = (1..langs.len()).collect();
    let direct: BTreeSet<(usize, usize)> = corpus
        .sitelinks
        .iter()
        .filter_map(|s| {
            let li = langs.iter().position(|l| *l == s.lang)?;
            let i: usize = s.concept_id[1..].parse().ok()?;
            (i >= 1 && i <= spec.n_concepts && s.title == title(&s.lang, i - 1)).then_some((li, i - 1))
        })
        .collect();
    let bytes_dist = LogNormal::new(6.0f64, 1.0).unwrap();
    for e in 0..spec.n_editors {
        let editor = format!("editor{e:04}");
        let focus = rng.random_range(0..k);
        truth.editor_focus.insert(editor.clone(), focus);
        let mut ts = 0i64;
        for _ in 0..spec.edits_per_editor {
            let i = if rng.random::<f64>() < spec.editor_focus && !by_topic[focus].is_empty() {
                *by_topic[focus].choose(&mut rng).unwrap()
            } else {
                rng.random_range(0..spec.n_concepts)
            };
            let mut li = 0;
            if !other_langs.is_empty() && rng.random::<f64>() < 0.15 {
                let cand = *other_langs.choose(&mut rng).unwrap();
                if direct.contains(&(cand, i)) {
                    li = cand;
                }
            }
            let mut bytes = bytes_dist.sample(&mut rng).round() as i64 + 1;
            if rng.random::<f64>() < 0.15 {
                bytes = -bytes / 2;
            }
            ts += rng.random_range(1..100);
            corpus.edit_events.push(EditEventRecord {
                editor_id: editor.clone(),
                lang: langs[li].clone(),
                title: title(&langs[li], i),
                bytes_added: bytes,
                timestamp: ts,
            });
        }
    }

    for lspec in &spec.languages {
        truth.missing.entry(lspec.code.clone()).or_default();
    }
    corpus.articles.sort_by(|a, b| (&a.lang, &a.title).cmp(&(&b.lang, &b.title)));
    corpus.normalize_edit_order();
    Ok((corpus, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            n_concepts: 300,
            n_editors: 5,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_synthetic(&small(), 11).unwrap();
        let b = generate_synthetic(&small(), 11).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let c = generate_synthetic(&small(), 12).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn full_coverage_means_nothing_missing() {
        let mut spec = small();
        spec.languages[0].coverage = 1.0;
        let (_, truth) = generate_synthetic(&spec, 3).unwrap();
        assert!(truth.missing(&"fr".into()).is_empty());
    }

    #[test]
    fn missing_count_is_binomial() {
        let spec = SyntheticSpec {
            n_concepts: 2000,
            languages: vec![LanguageSpec {
                code: "fr".into(),
                coverage: 0.5,
            }],
            n_editors: 0,
            ..SyntheticSpec::default()
        };
        let (_, truth) = generate_synthetic(&spec, 7).unwrap();
        let n = truth.missing(&"fr".into()).len() as f64;
        // Binomial(2000, 0.5): mean 1000, sigma = sqrt(500).
        let sigma = (2000.0f64 * 0.25).sqrt();
        assert!((n - 1000.0).abs() <= 3.0 * sigma, "missing = {n}");
    }

    #[test]
    fn missing_concepts_have_source_but_no_target_sitelink() {
        let (corpus, truth) = generate_synthetic(&small(), 5).unwrap();
        let fr: LanguageCode = "fr".into();
        for q in truth.missing(&fr) {
            assert!(corpus.sitelinks.iter().any(|s| s.concept_id == q && s.lang == truth.source));
            assert!(!corpus.sitelinks.iter().any(|s| s.concept_id == q && s.lang == fr));
        }
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let mut spec = small();
        spec.languages[0].coverage = 1.5;
        assert!(matches!(generate_synthetic(&spec, 1), Err(CorpusError::InvalidSpec(_))));
        let spec = SyntheticSpec {
            n_concepts: 0,
            ..small()
        };
        assert!(generate_synthetic(&spec, 1).is_err());
    }
}
