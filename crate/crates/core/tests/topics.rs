mod common;

use common::{best_alignment, recovered_rows};
use gapfinder::corpus::synth::{planted_token, planted_topic_docs};
use gapfinder::topics::{topic_distance, train_lda, GibbsSampler, LdaConfig, TopicModel, TopicVector};
use proptest::prelude::*;

fn planted_setup() -> (Vec<Vec<String>>, Vec<Vec<f64>>, TopicModel) {
    let (docs, planted, _) = planted_topic_docs(5, 100, 500, 80, 21);
    let config = LdaConfig {
        n_topics: 5,
        alpha: Some(0.1),
        iterations: 200,
        seed: 5,
        ..LdaConfig::default()
    };
    let (model, _) = train_lda(&docs, &config).unwrap();
    (docs, planted, model)
}

#[test]
fn planted_topics_are_recovered() {
    let (_, planted, model) = planted_setup();
    let aligned = best_alignment(&planted, &recovered_rows(&model, 100));
    let mean_tv = aligned.iter().map(|a| a.2).sum::<f64>() / aligned.len() as f64;
    assert!(mean_tv <= 0.2, "mean TV {mean_tv}");
}

#[test]
fn single_topic_document_aligns_with_its_planted_topic() {
    let (_, planted, model) = planted_setup();
    let aligned = best_alignment(&planted, &recovered_rows(&model, 100));
    let recovered_for = |p: usize| aligned.iter().find(|a| a.0 == p).unwrap().1;
    // A document drawn only from planted topic 3: its 60 most likely words.
    let mut words: Vec<usize> = (0..100).collect();
    words.sort_by(|a, b| planted[3][*b].total_cmp(&planted[3][*a]));
    let doc: Vec<String> = words.iter().take(8).cycle().take(60).map(|&w| planted_token(w)).collect();
    assert_eq!(model.infer(&doc).argmax(), recovered_for(3));
}

#[test]
fn counts_are_conserved_and_perplexity_drops() {
    let (docs, _, _) = planted_topic_docs(5, 100, 200, 40, 4);
    let config = LdaConfig {
        n_topics: 5,
        iterations: 50,
        seed: 1,
        ..LdaConfig::default()
    };
    let mut sampler = GibbsSampler::new(&docs, config).unwrap();
    let n = sampler.n_tokens() as u64;
    let mut first = None;
    let mut last = 0.0;
    for _ in 0..50 {
        sampler.sweep();
        assert_eq!(sampler.table_totals(), (n, n, n));
        last = sampler.perplexity();
        first.get_or_insert(last);
    }
    assert!(last < first.unwrap());
}

fn unit(v: Vec<f64>) -> TopicVector {
    TopicVector::normalized(v)
}

proptest! {
    #[test]
    fn distance_matches_cosine_identity(a in prop::collection::vec(0.01f64..1.0, 6), b in prop::collection::vec(0.01f64..1.0, 6)) {
        let (a, b) = (unit(a), unit(b));
        let d = topic_distance(&a, &b).unwrap();
        prop_assert!((d - (2.0 - 2.0 * a.dot(&b)).max(0.0).sqrt()).abs() < 1e-9);
        prop_assert!((0.0..=2.0).contains(&d));
    }

    #[test]
    fn distance_order_equals_cosine_order(q in prop::collection::vec(0.01f64..1.0, 5), pts in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 5), 2..12)) {
        let q = unit(q);
        let pts: Vec<TopicVector> = pts.into_iter().map(unit).collect();
        let mut by_dist: Vec<usize> = (0..pts.len()).collect();
        by_dist.sort_by(|&i, &j| topic_distance(&q, &pts[i]).unwrap().total_cmp(&topic_distance(&q, &pts[j]).unwrap()).then(i.cmp(&j)));
        let mut by_cos: Vec<usize> = (0..pts.len()).collect();
        by_cos.sort_by(|&i, &j| q.dot(&pts[j]).total_cmp(&q.dot(&pts[i])).then(i.cmp(&j)));
        // Equal up to float ties.
        for (i, j) in by_dist.iter().zip(&by_cos) {
            prop_assert!((q.dot(&pts[*i]) - q.dot(&pts[*j])).abs() < 1e-12);
        }
    }
}
