use std::collections::BTreeMap;

use gapfinder::corpus::{
    generate_synthetic, neoplasm_fixture, ArticleRecord, Corpus, LanguageCode, LanguageSpec, PageLinkRecord,
    PageViewRecord, SitelinkRecord, SyntheticSpec,
};
use gapfinder::graph::CoverageGraph;
use gapfinder::ranking::*;
use gapfinder::topics::TopicVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lang(s: &str) -> LanguageCode {
    s.into()
}

fn graph(corpus: &Corpus, s: &str, t: &str) -> CoverageGraph {
    let mut g = CoverageGraph::build(corpus, &lang(s), &lang(t)).unwrap();
    g.weakly_connected_components();
    g
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

#[test]
fn mean_normalized_rank_matches_rank_sum_identity() {
    let mut c = Corpus {
        languages: vec![lang("fr")],
        ..Corpus::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..1000 {
        let t = format!("a{i}");
        c.articles.push(ArticleRecord::new("fr", t.clone(), 10));
        c.sitelinks.push(SitelinkRecord {
            concept_id: format!("Q{i}"),
            lang: lang("fr"),
            title: t.clone(),
        });
        c.page_views.push(PageViewRecord {
            lang: lang("fr"),
            title: t,
            // Many ties on purpose.
            views: rng.random_range(0..50),
            country: None,
        });
    }
    let targets = compute_rank_targets(&c, &lang("fr")).unwrap();
    let n = targets.len() as f64;
    let rank_sum: f64 = targets.values().map(|t| t.rank).sum();
    assert_eq!(rank_sum, n * (n + 1.0) / 2.0);
    let mean = targets.values().map(|t| t.y).sum::<f64>() / n;
    assert!((mean - (n + 1.0) / (2.0 * n)).abs() < 1e-9);
    assert!(targets.values().all(|t| t.y > 0.0 && t.y <= 1.0));
}

#[test]
fn mean_baseline_toy_rmse() {
    let truth = [0.2, 0.5, 0.8];
    let pred = mean_baseline(&truth).predict(3);
    assert!((rmse(&pred, &truth) - 0.06f64.sqrt()).abs() < 1e-15);
}

#[test]
fn wikidata_count_and_absent_languages() {
    let c = neoplasm_fixture();
    // fr -> en: the tumour concept has de, fr and hr articles.
    let g = graph(&c, "fr", "en");
    let tv = BTreeMap::new();
    let ctx = FeatureContext::new(&c, &g, &tv, 3).unwrap();
    let row = &ctx.extract(&["Q133212".to_string()]).unwrap()[0];
    assert_eq!(row.wikidata_count, 3);
    assert!(!ctx.schema().languages.contains(&lang("en")));
    assert_eq!(row.topic_vector, TopicVector::zero(3));

    // en -> de: Neoplasm exists only in English among its own sitelinks.
    let g = graph(&c, "en", "de");
    let ctx = FeatureContext::new(&c, &g, &tv, 3).unwrap();
    let row = &ctx.extract(&["Q1216998".to_string()]).unwrap()[0];
    assert_eq!(row.wikidata_count, 1);
    let s = ctx.schema();
    for (i, l) in s.languages.iter().enumerate() {
        if *l != lang("en") {
            assert_eq!(row.views[i], 0);
            assert_eq!(row.normrank[i], 0.0);
        }
    }
    assert!(matches!(
        ctx.extract(&["Q404".to_string()]),
        Err(RankingError::UnknownConcept(_))
    ));
}

#[test]
fn covered_link_counts_match_hand_recount() {
    let mut c = Corpus {
        languages: vec![lang("en"), lang("fr")],
        ..Corpus::default()
    };
    let add = |c: &mut Corpus, q: &str, l: &str, t: &str| {
        c.articles.push(ArticleRecord::new(l, t, 100));
        c.sitelinks.push(SitelinkRecord {
            concept_id: q.into(),
            lang: lang(l),
            title: t.into(),
        });
    };
    add(&mut c, "Q1", "en", "Hub");
    add(&mut c, "Q2", "en", "A");
    add(&mut c, "Q2", "fr", "A fr");
    add(&mut c, "Q3", "en", "B");
    add(&mut c, "Q4", "en", "C");
    add(&mut c, "Q4", "fr", "C fr");
    let link = |from: &str, to: &str| PageLinkRecord {
        lang: lang("en"),
        from_title: from.into(),
        to_title: to.into(),
    };
    c.page_links = vec![
        link("A", "Hub"),
        link("B", "Hub"),
        link("C", "Hub"),
        link("Hub", "Hub"),
        link("Hub", "A"),
        link("Hub", "B"),
    ];
    let g = graph(&c, "en", "fr");
    let tv = BTreeMap::new();
    let ctx = FeatureContext::new(&c, &g, &tv, 2).unwrap();
    let row = &ctx.extract(&["Q1".to_string()]).unwrap()[0];
    // Inlinks from A, B, C of which A and C exist in French; the self-link is ignored.
    assert_eq!(row.total_indegree, 3);
    assert_eq!(row.inlinks_covered, 2);
    assert_eq!(row.total_outdegree, 2);
    assert_eq!(row.outlinks_covered, 1);
}

/// Strips every trace of one concept's target-language article.
fn without_target_article(c: &Corpus, concept: &str, target: &LanguageCode) -> Corpus {
    let title = c
        .sitelinks
        .iter()
        .find(|s| s.concept_id == concept && s.lang == *target)
        .unwrap()
        .title
        .clone();
    let hit = |l: &LanguageCode, t: &str| l == target && t == title;
    let mut d = c.clone();
    d.articles.retain(|a| !hit(&a.lang, &a.title) && !(a.lang == *target && a.redirect_target.as_deref() == Some(&title)));
    d.sitelinks.retain(|s| !hit(&s.lang, &s.title));
    d.interlanguage_links
        .retain(|l| !hit(&l.from_lang, &l.from_title) && !hit(&l.to_lang, &l.to_title));
    d.page_views.retain(|v| !hit(&v.lang, &v.title));
    d.page_links
        .retain(|l| !hit(&l.lang, &l.from_title) && !hit(&l.lang, &l.to_title));
    d.edit_events.retain(|e| !hit(&e.lang, &e.title));
    d.token_docs.retain(|t| !hit(&t.lang, &t.title));
    d
}

#[test]
fn features_do_not_leak_the_target_article() {
    let spec = SyntheticSpec {
        n_concepts: 300,
        ..SyntheticSpec::default()
    };
    let (corpus, _) = generate_synthetic(&spec, 11).unwrap();
    let (s, t) = (lang("en"), lang("fr"));
    let targets = training_targets(&corpus, &s, &t).unwrap();
    let tv = BTreeMap::new();
    let g = graph(&corpus, "en", "fr");
    let ctx = FeatureContext::new(&corpus, &g, &tv, 4).unwrap();
    for (concept, _) in targets.iter().take(15) {
        let before = ctx.extract(std::slice::from_ref(concept)).unwrap();
        let stripped = without_target_article(&corpus, concept, &t);
        let g2 = graph(&stripped, "en", "fr");
        let ctx2 = FeatureContext::new(&stripped, &g2, &tv, 4).unwrap();
        assert_eq!(ctx2.schema(), ctx.schema());
        let after = ctx2.extract(std::slice::from_ref(concept)).unwrap();
        assert_eq!(format!("{before:?}"), format!("{after:?}"), "{concept}");
    }
}

#[test]
fn feature_table_round_trips_and_detects_tampering() {
    let c = neoplasm_fixture();
    let g = graph(&c, "fr", "en");
    let tv = BTreeMap::new();
    let ctx = FeatureContext::new(&c, &g, &tv, 2).unwrap();
    let row = &ctx.extract(&["Q133212".to_string()]).unwrap()[0];
    let mut table = FeatureTable::new(ctx.schema());
    table.push(ctx.schema(), row, RowRole::Train, Some(0.25));
    table.push(ctx.schema(), row, RowRole::Apply, None);
    let text = table.to_tsv();
    assert_eq!(FeatureTable::from_tsv(&text).unwrap(), table);
    let tampered = text.replacen("source_length", "source_len", 1);
    assert!(matches!(
        FeatureTable::from_tsv(&tampered),
        Err(RankingError::SchemaMismatch { .. })
    ));
}

#[test]
fn forest_learns_a_planted_monotone_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x: Vec<Vec<f64>> = (0..625).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| 0.01 + 0.99 * r[2].powi(2)).collect();
    let (train, test) = (0..500, 500..625);
    let cols: Vec<String> = (0..5).map(|i| format!("f{i}")).collect();
    let cfg = ForestConfig {
        n_trees_grid: vec![50],
        max_depth_grid: vec![Some(8), None],
        folds: 3,
        seed: 2,
        ..ForestConfig::default()
    };
    let model = train_forest(&x[train.clone()], &y[train], &cols, &cfg).unwrap();
    let pred = model.predict_rows(&x[test.clone()]).unwrap();
    let forest = rmse(&pred, &y[test.clone()]);
    let mean = rmse(&mean_baseline(&[]).predict(125), &y[test]);
    assert!(forest < mean / 3.0, "forest {forest} mean {mean}");

    let again = train_forest(&x[..500], &y[..500], &cols, &cfg).unwrap();
    assert_eq!(again.predict_rows(&x[500..]).unwrap(), pred);
}

#[test]
fn source_baseline_is_exact_when_languages_agree() {
    let spec = SyntheticSpec {
        n_concepts: 400,
        languages: vec![LanguageSpec {
            code: lang("fr"),
            coverage: 1.0,
        }],
        view_noise: 0.0,
        topic_affinity: 0.0,
        split_rate: 0.0,
        exclusive_fraction: 0.0,
        ..SyntheticSpec::default()
    };
    let (corpus, _) = generate_synthetic(&spec, 5).unwrap();
    let targets = training_targets(&corpus, &lang("en"), &lang("fr")).unwrap();
    assert_eq!(targets.len(), 400);
    let g = graph(&corpus, "en", "fr");
    let tv = BTreeMap::new();
    let ctx = FeatureContext::new(&corpus, &g, &tv, 2).unwrap();
    let ids: Vec<String> = targets.iter().map(|(c, _)| c.clone()).collect();
    let rows: Vec<Vec<f64>> = ctx
        .extract(&ids)
        .unwrap()
        .iter()
        .map(|r| ctx.schema().vectorize(r))
        .collect();
    let pred = source_language_baseline(ctx.schema(), &rows);
    let truth: Vec<f64> = targets.iter().map(|t| t.1).collect();
    assert!(rmse(&pred, &truth) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictions_stay_in_unit_interval(
        rows in prop::collection::vec((0.0f64..10.0, -5.0f64..5.0, 0.0f64..1.0), 1..40),
        probe in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..10),
        seed in 0u64..1000,
    ) {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.0, r.1]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.2.max(1e-6)).collect();
        let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        let f = fit_forest(&x, &y, 5, None, None, seed);
        for p in probe {
            let v = f.predict_one(&[p.0, p.1]);
            prop_assert!(v > 0.0 && v <= 1.0);
            // Leaf means never leave the observed target range.
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
