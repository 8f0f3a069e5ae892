use std::collections::BTreeMap;

use gapfinder::corpus::{generate_synthetic, SyntheticSpec};
use gapfinder::interest::*;
use gapfinder::topics::{topic_distance, TopicVector};
use proptest::prelude::*;

fn unit(v: &[f64]) -> TopicVector {
    TopicVector::normalized(v.to_vec())
}

fn history(entries: &[(&str, u64)]) -> EditHistory {
    EditHistory {
        editor_id: "ed".into(),
        entries: entries
            .iter()
            .enumerate()
            .map(|(i, (t, b))| HistoryEntry {
                title: t.to_string(),
                concept_id: None,
                bytes: *b,
                last_edit: 1000 - i as i64,
            })
            .collect(),
    }
}

fn vectors(pairs: &[(&str, &[f64])]) -> BTreeMap<String, TopicVector> {
    pairs.iter().map(|(t, v)| (t.to_string(), unit(v))).collect()
}

#[test]
fn single_article_history_returns_its_vector() {
    let tv = vectors(&[("a", &[0.3, 0.1, 0.9])]);
    for m in InterestMethod::ALL {
        let iv = interest_vector(&history(&[("a", 40)]), &tv, m, 16).unwrap();
        for (x, y) in iv.values.values().iter().zip(tv["a"].values()) {
            assert!((x - y).abs() < 1e-15, "{m}");
        }
    }
}

#[test]
fn equal_bytes_make_weighted_average_equal_average() {
    let tv = vectors(&[("a", &[1.0, 0.2, 0.0]), ("b", &[0.1, 1.0, 0.3]), ("c", &[0.0, 0.4, 1.0])]);
    let h = history(&[("a", 77), ("b", 77), ("c", 77)]);
    let avg = interest_vector(&h, &tv, InterestMethod::Average, 16).unwrap();
    let wavg = interest_vector(&h, &tv, InterestMethod::WeightedAverage, 16).unwrap();
    assert_eq!(avg.values, wavg.values);
}

#[test]
fn medoid_matches_exhaustive_argmin() {
    let tv = vectors(&[
        ("a", &[1.0, 0.0, 0.1]),
        ("b", &[0.9, 0.3, 0.0]),
        ("c", &[0.2, 1.0, 0.2]),
        ("d", &[0.7, 0.6, 0.2]),
        ("e", &[0.0, 0.1, 1.0]),
    ]);
    let bytes = [("a", 10u64), ("b", 4000), ("c", 300), ("d", 25), ("e", 900)];
    let h = history(&bytes);
    let got = interest_vector(&h, &tv, InterestMethod::WeightedMedoid, 16).unwrap();
    // Oracle: Euclidean distances computed componentwise, log weights recomputed.
    let cost = |m: &str| -> f64 {
        bytes
            .iter()
            .map(|(t, b)| {
                let d: f64 = tv[m]
                    .values()
                    .iter()
                    .zip(tv[*t].values())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                (1.0 + *b as f64).ln() * d
            })
            .sum()
    };
    let best = bytes
        .iter()
        .map(|(t, _)| *t)
        .min_by(|a, b| cost(a).partial_cmp(&cost(b)).unwrap())
        .unwrap();
    assert_eq!(got.values, tv[best]);
}

#[test]
fn scoring_orders_by_distance() {
    let interest = unit(&[1.0, 0.0]);
    let cands = vec![
        ("Q3".to_string(), unit(&[0.0, 1.0])),
        ("Q1".to_string(), unit(&[1.0, 0.0])),
        ("Q2".to_string(), unit(&[1.0, 1.0])),
    ];
    let s = score_concepts(&interest, &cands).unwrap();
    let order: Vec<&str> = s.iter().map(|c| c.concept_id.as_str()).collect();
    assert_eq!(order, ["Q1", "Q2", "Q3"]);
    assert_eq!(s[0].distance, 0.0);
    // |(1,0) - (1,1)/√2|² = (1 - 1/√2)² + 1/2 = 2 - √2.
    assert!((s[1].distance - (2.0 - 2f64.sqrt()).sqrt()).abs() < 1e-12);
    assert!((s[2].distance - 2f64.sqrt()).abs() < 1e-12);

    let zero = vec![("Q9".to_string(), TopicVector::zero(2))];
    assert!(matches!(score_concepts(&interest, &zero), Err(InterestError::ZeroVector(_))));
}

#[test]
fn planted_editors_are_recommended_their_focus_topic() {
    let spec = SyntheticSpec {
        n_concepts: 1000,
        n_editors: 20,
        ..SyntheticSpec::default()
    };
    let (corpus, truth) = generate_synthetic(&spec, 4).unwrap();
    // Planted mixtures stand in for learned topic vectors.
    let tv: BTreeMap<String, TopicVector> = corpus
        .sitelinks
        .iter()
        .filter(|s| s.lang == truth.source)
        .filter_map(|s| Some((s.title.clone(), unit(truth.concept_topics.get(&s.concept_id)?))))
        .collect();
    let concept_of: BTreeMap<&str, &str> = corpus
        .sitelinks
        .iter()
        .filter(|s| s.lang == truth.source)
        .map(|s| (s.title.as_str(), s.concept_id.as_str()))
        .collect();
    let cands: Vec<(String, TopicVector)> = tv.iter().map(|(t, v)| (concept_of[t.as_str()].to_string(), v.clone())).collect();
    let histories = build_histories(&corpus, &truth.source);
    let (interests, warnings) = build_interests(&histories, &tv, InterestMethod::WeightedAverage, 16).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(interests.len(), 20);
    for iv in &interests {
        let focus = truth.editor_focus[&iv.editor_id];
        let top = score_concepts(&iv.values, &cands).unwrap();
        let on_topic = top[..10]
            .iter()
            .filter(|s| truth.dominant_topic[&s.concept_id] == focus)
            .count();
        assert!(on_topic > 5, "{} got {on_topic}/10 on topic", iv.editor_id);
    }
}

#[test]
fn interests_file_round_trips_to_six_decimals() {
    let tv = vectors(&[("a", &[0.3, 0.1, 0.9]), ("b", &[0.5, 0.5, 0.1])]);
    let h = history(&[("a", 40), ("b", 9)]);
    let iv = interest_vector(&h, &tv, InterestMethod::WeightedAverage, 16).unwrap();
    let text = interests_to_tsv(std::slice::from_ref(&iv));
    let back = interests_from_tsv(&text).unwrap();
    assert_eq!(back[0].editor_id, "ed");
    assert_eq!(back[0].method, InterestMethod::WeightedAverage);
    for (x, y) in back[0].values.values().iter().zip(iv.values.values()) {
        assert!((x - y).abs() < 2e-6);
    }
}

fn arb_history() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u64>)> {
    (1usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), n),
            prop::collection::vec(1u64..100_000, n),
        )
    })
}

fn build(vs: &[Vec<f64>], bytes: &[u64]) -> (EditHistory, BTreeMap<String, TopicVector>) {
    let titles: Vec<String> = (0..vs.len()).map(|i| format!("t{i}")).collect();
    let h = EditHistory {
        editor_id: "p".into(),
        entries: titles
            .iter()
            .zip(bytes)
            .enumerate()
            .map(|(i, (t, b))| HistoryEntry {
                title: t.clone(),
                concept_id: None,
                bytes: *b,
                last_edit: -(i as i64),
            })
            .collect(),
    };
    let tv = titles.into_iter().zip(vs.iter().map(|v| unit(v))).collect();
    (h, tv)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn older_entries_beyond_w_are_ignored((vs, bytes) in arb_history(), w in 1usize..6, extra in arb_history()) {
        let (h, mut tv) = build(&vs, &bytes);
        let mut longer = h.clone();
        for (i, (v, b)) in extra.0.iter().zip(&extra.1).enumerate() {
            let t = format!("old{i}");
            tv.insert(t.clone(), unit(v));
            longer.entries.push(HistoryEntry { title: t, concept_id: None, bytes: *b, last_edit: -1000 - i as i64 });
        }
        let w = w.min(vs.len());
        for m in InterestMethod::ALL {
            let a = interest_vector(&h, &tv, m, w).unwrap();
            let b = interest_vector(&longer, &tv, m, w).unwrap();
            prop_assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn medoid_is_a_member_and_outputs_are_unit((vs, bytes) in arb_history()) {
        let (h, tv) = build(&vs, &bytes);
        let med = interest_vector(&h, &tv, InterestMethod::WeightedMedoid, 16).unwrap();
        prop_assert!(tv.values().any(|v| *v == med.values));
        for m in InterestMethod::ALL {
            let iv = interest_vector(&h, &tv, m, 16).unwrap();
            prop_assert!((iv.values.norm() - 1.0).abs() < 1e-9);
            prop_assert!(topic_distance(&iv.values, &iv.values).unwrap() == 0.0);
        }
    }

    #[test]
    fn average_ignores_byte_scaling((vs, bytes) in arb_history(), k in 2u64..50) {
        let (h, tv) = build(&vs, &bytes);
        let scaled: Vec<u64> = bytes.iter().map(|b| b * k).collect();
        let (h2, _) = build(&vs, &scaled);
        let a = interest_vector(&h, &tv, InterestMethod::Average, 16).unwrap();
        let b = interest_vector(&h2, &tv, InterestMethod::Average, 16).unwrap();
        prop_assert_eq!(a.values, b.values);
    }
}
