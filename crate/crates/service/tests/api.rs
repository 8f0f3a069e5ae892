mod common;

use std::collections::BTreeMap;
use std::fs;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use gapfinder::provenance::{hash_files, Stamp, Timing};
use gapfinder_service::*;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn loaded_app() -> (Router, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixture(dir.path());
    let artifacts = Artifacts::load(dir.path()).unwrap();
    (router(AppState::loaded(artifacts), None), dir)
}

#[tokio::test]
async fn unavailable_until_loaded() {
    let state = AppState::default();
    let app = router(state.clone(), None);
    let (s, body) = get(&app, "/api/health").await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["error"], "artifacts_not_loaded");
    let (s, _) = get(&app, "/api/recommendations?source=en&target=de&seed=Helix").await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);

    let dir = tempfile::tempdir().unwrap();
    common::write_fixture(dir.path());
    state.set(Artifacts::load(dir.path()).unwrap());
    let (s, body) = get(&app, "/api/health").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["pairs"][0]["source"], "en");
    assert_eq!(body["pairs"][0]["target"], "de");
}

#[tokio::test]
async fn seed_neighbour_ranks_first() {
    let (app, _dir) = loaded_app();
    let (s, body) = get(&app, "/api/recommendations?source=en&target=de&seed=Helix&count=10").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["seed_title"], "Helix");
    assert_eq!(body["api_version"], 1);
    let items = body["items"].as_array().unwrap();
    let ids: Vec<&str> = items.iter().map(|i| i["concept_id"].as_str().unwrap()).collect();
    // Hand-scored: cos(Helix, Beta) ≈ 0.987, Gamma ≈ 0.747, Alpha ≈ 0.108.
    assert_eq!(ids, ["Q2", "Q3", "Q1"]);
    let seed = common::raw("Helix");
    for item in items {
        let title = item["source_title"].as_str().unwrap();
        let expected = common::cosine(&seed, &common::raw(title));
        assert!((item["interest_score"].as_f64().unwrap() - expected).abs() < 1e-12);
        let (c, _, y) = common::MISSING.iter().find(|m| m.1 == title).unwrap();
        assert_eq!(item["concept_id"], *c);
        assert_eq!(item["y_pred"].as_f64().unwrap(), *y);
    }
    // `Existing` is the seed's exact twin but already has a German article.
    assert!(items.iter().all(|i| i["source_title"] != "Existing"));
}

#[tokio::test]
async fn count_limits_and_zero_is_empty() {
    let (app, _dir) = loaded_app();
    let (s, body) = get(&app, "/api/recommendations?source=en&target=de&seed=Helix&count=0").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["items"], Value::Array(vec![]));
    let (_, body) = get(&app, "/api/recommendations?source=en&target=de&seed=Helix&count=2").await;
    assert_eq!(body["items"].as_array().unwrap().len(), 2);
    let (s, body) = get(&app, "/api/recommendations?source=en&target=de&seed=Helix&count=-1").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "bad_count");
}

#[tokio::test]
async fn unknown_seed_gets_suggestions() {
    let (app, _dir) = loaded_app();
    let (s, body) = get(&app, "/api/recommendations?source=en&target=de&seed=Helx").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "seed_not_found");
    let suggestions = body["suggestions"].as_array().unwrap();
    assert_eq!(suggestions[0], "Helix");
    assert!(suggestions.len() <= MAX_SUGGESTIONS);
}

#[tokio::test]
async fn unserved_pair_is_rejected() {
    let (app, _dir) = loaded_app();
    for uri in [
        "/api/recommendations?source=en&target=fr&seed=Helix",
        "/api/recommendations?source=EN&target=de&seed=Helix",
        "/api/recommendations?seed=Helix",
    ] {
        let (s, body) = get(&app, uri).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(body["error"], "bad_language_pair");
    }
}

#[tokio::test]
async fn identical_queries_return_identical_bodies() {
    let (app, _dir) = loaded_app();
    let uri = "/api/recommendations?source=en&target=de&seed=Gamma&count=3";
    assert_eq!(get(&app, uri).await, get(&app, uri).await);
}

#[tokio::test]
async fn top_k_restricts_the_pool() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixture(dir.path());
    fs::write(dir.path().join("run.conf"), "source = en\ntarget = de\ntop_k = 2\n").unwrap();
    let app = router(AppState::loaded(Artifacts::load(dir.path()).unwrap()), None);
    let (_, body) = get(&app, "/api/recommendations?source=en&target=de&seed=Helix").await;
    let ids: Vec<&str> = body["items"].as_array().unwrap().iter().map(|i| i["concept_id"].as_str().unwrap()).collect();
    // Q2 has the lowest predicted rank and falls outside the top 2.
    assert_eq!(ids, ["Q3", "Q1"]);
}

#[tokio::test]
async fn health_versions_match_stamps() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path();
    common::write_fixture(w);
    let stamp = Stamp {
        stage: "rank".into(),
        inputs: BTreeMap::new(),
        outputs: hash_files(w, &["predictions.tsv".into()]).unwrap(),
        config: BTreeMap::new(),
        seed: 0,
        timing: Timing { elapsed_ms: 0 },
    };
    stamp.write(w).unwrap();
    let app = router(AppState::loaded(Artifacts::load(w).unwrap()), None);
    let (s, body) = get(&app, "/api/health").await;
    assert_eq!(s, StatusCode::OK);
    let versions = &body["pairs"][0]["model_versions"];
    assert_eq!(versions["predictions.tsv"], stamp.outputs["predictions.tsv"]);
    let unstamped = hash_files(w, &["candidates.tsv".into()]).unwrap();
    assert_eq!(versions["candidates.tsv"], unstamped["candidates.tsv"]);
    let (_, rec) = get(&app, "/api/recommendations?source=en&target=de&seed=Helix").await;
    assert_eq!(&rec["model_versions"], versions);
}

#[tokio::test]
async fn several_pairs_from_one_root() {
    let root = tempfile::tempdir().unwrap();
    for (name, target) in [("en-de", "de"), ("en-fr", "fr")] {
        let d = root.path().join(name);
        fs::create_dir(&d).unwrap();
        common::write_fixture(&d);
        let c = fs::read_to_string(d.join("candidates.tsv")).unwrap().replace("\tde\n", &format!("\t{target}\n"));
        fs::write(d.join("candidates.tsv"), c).unwrap();
    }
    let artifacts = Artifacts::load(root.path()).unwrap();
    assert_eq!(artifacts.pairs.len(), 2);
    let app = router(AppState::loaded(artifacts), None);
    let (s, _) = get(&app, "/api/recommendations?source=en&target=fr&seed=Helix").await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn cors_allows_the_ui_origin() {
    let dir = tempfile::tempdir().unwrap();
    common::write_fixture(dir.path());
    let origin = "http://localhost:5173";
    let app = router(AppState::loaded(Artifacts::load(dir.path()).unwrap()), Some(origin.parse().unwrap()));
    let resp = app
        .oneshot(Request::get("/api/health").header("origin", origin).body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], origin);
}
