mod common;

use std::collections::{BTreeSet, HashSet};

use gapfinder::corpus::{generate_synthetic, LanguageCode, SyntheticSpec};
use gapfinder::graph::{detect_missing, CoverageGraph, EdgeKind};

#[test]
fn synthetic_missing_set_matches_ground_truth() {
    for seed in [1, 2, 3] {
        let (corpus, truth) = generate_synthetic(&SyntheticSpec::default(), seed).unwrap();
        for target in ["fr", "de", "es"] {
            let target = LanguageCode::from(target);
            let found = detect_missing(&corpus, &truth.source, &target).unwrap();
            assert_eq!(found.concept_ids(), truth.missing(&target), "seed {seed} target {target}");
        }
    }
}

/// Recounts edges straight from the raw records.
#[test]
fn edge_counts_match_independent_recount() {
    let spec = SyntheticSpec {
        n_concepts: 500,
        ..SyntheticSpec::default()
    };
    let (corpus, truth) = generate_synthetic(&spec, 9).unwrap();
    let (s, t) = (truth.source.clone(), LanguageCode::from("fr"));
    let pair = |l: &LanguageCode| *l == s || *l == t;

    let sitelinks = corpus.sitelinks.iter().filter(|r| pair(&r.lang)).count();
    let langlinks: HashSet<BTreeSet<(String, String)>> = corpus
        .interlanguage_links
        .iter()
        .filter(|r| pair(&r.from_lang) && pair(&r.to_lang))
        .map(|r| {
            BTreeSet::from([
                (r.from_lang.to_string(), r.from_title.clone()),
                (r.to_lang.to_string(), r.to_title.clone()),
            ])
        })
        .collect();
    let known: HashSet<(String, String)> = corpus
        .articles
        .iter()
        .map(|a| (a.lang.to_string(), a.title.clone()))
        .chain(corpus.sitelinks.iter().map(|r| (r.lang.to_string(), r.title.clone())))
        .collect();
    let redirects = corpus
        .articles
        .iter()
        .filter(|a| pair(&a.lang) && a.is_redirect)
        .filter(|a| known.contains(&(a.lang.to_string(), a.redirect_target.clone().unwrap())))
        .count();

    let g = CoverageGraph::build(&corpus, &s, &t).unwrap();
    let counts = g.edge_counts();
    assert_eq!(counts.sitelink, sitelinks);
    assert_eq!(counts.interlanguage, langlinks.len());
    assert_eq!(counts.redirect, redirects);
    assert!(g.edges().iter().any(|e| e.2 == EdgeKind::Redirect));
}

#[test]
fn components_agree_with_union_find_on_random_graphs() {
    use gapfinder::graph::NodeKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..3000);
        let m = rng.random_range(0..n + n / 2);
        let mut g = CoverageGraph::new("en".into(), "fr".into());
        for i in 0..n {
            g.add_node(NodeKind::Concept(format!("Q{i}")), false, 0);
        }
        let edges: Vec<(usize, usize)> = (0..m).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        for &(a, b) in &edges {
            g.add_edge(a, b, EdgeKind::Sitelink);
        }
        g.weakly_connected_components();
        let oracle = common::union_find(n, &edges);
        assert!(common::same_partition(g.components().unwrap(), &oracle), "seed {seed}");
    }
}
