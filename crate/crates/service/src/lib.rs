//! HTTP recommendations over the artifacts of one or more pipeline runs.
//!
//! A run directory holds `run.conf`, `candidates.tsv`, `predictions.tsv` and
//! `topic_vectors.tsv`. The artifacts root is either such a directory or a
//! directory of them, one per language pair.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use axum::extract::{Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use gapfinder::config::{files, RunConfig};
use gapfinder::corpus::{ConceptId, LanguageCode};
use gapfinder::graph::MissingSet;
use gapfinder::interest::score_concepts;
use gapfinder::matching::{candidate_pool, PoolEntry};
use gapfinder::provenance::{producer, read_stamps, sha256_file};
use gapfinder::ranking::predictions_from_tsv;
use gapfinder::topics::{topic_vectors_from_tsv, TopicVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const API_VERSION: u32 = 1;
pub const DEFAULT_COUNT: usize = 10;
pub const MAX_COUNT: usize = 500;
pub const MAX_SUGGESTIONS: usize = 5;

/// Files whose versions are reported by the service.
pub const VERSIONED_FILES: [&str; 3] = [files::CANDIDATES, files::PREDICTIONS, files::TOPIC_VECTORS];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
    #[error("no run directory under {0}")]
    Empty(PathBuf),
    #[error("two run directories serve {0}->{1}")]
    DuplicatePair(LanguageCode, LanguageCode),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationItem {
    pub source_title: String,
    pub concept_id: ConceptId,
    pub y_pred: f64,
    pub interest_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub api_version: u32,
    pub source: LanguageCode,
    pub target: LanguageCode,
    pub seed_title: String,
    pub items: Vec<RecommendationItem>,
    pub model_versions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub api_version: u32,
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suggestions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVersions {
    pub source: LanguageCode,
    pub target: LanguageCode,
    pub model_versions: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub api_version: u32,
    pub status: String,
    pub pairs: Vec<PairVersions>,
}

/// Loaded, read-only artifacts of one language pair.
#[derive(Debug)]
pub struct PairArtifacts {
    pub source: LanguageCode,
    pub target: LanguageCode,
    /// The top-K pool, restricted to candidates with a usable topic vector.
    pool: Vec<PoolEntry>,
    pool_vectors: Vec<(ConceptId, TopicVector)>,
    vectors: BTreeMap<String, TopicVector>,
    pub model_versions: BTreeMap<String, String>,
}

/// Why a seed could not be served.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedNotFound {
    pub suggestions: Vec<String>,
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl PairArtifacts {
    pub fn load(dir: &Path) -> Result<Self, LoadError> {
        let invalid = |file: &str, reason: String| LoadError::Invalid {
            path: dir.join(file),
            reason,
        };
        let config = RunConfig::parse(&read(&dir.join(files::RUN_CONF))?).map_err(|e| invalid(files::RUN_CONF, e.to_string()))?;
        let candidates =
            MissingSet::from_tsv(&read(&dir.join(files::CANDIDATES))?).map_err(|e| invalid(files::CANDIDATES, e.to_string()))?;
        let predictions =
            predictions_from_tsv(&read(&dir.join(files::PREDICTIONS))?).map_err(|e| invalid(files::PREDICTIONS, e.to_string()))?;
        let vectors = topic_vectors_from_tsv(&read(&dir.join(files::TOPIC_VECTORS))?)
            .map_err(|e| invalid(files::TOPIC_VECTORS, e.to_string()))?
            .into_iter()
            .map(|(t, v)| (t, TopicVector::normalized(v.values().to_vec())))
            .collect::<BTreeMap<_, _>>();
        let pool = candidate_pool(&candidates, &predictions, config.top_k).map_err(|e| invalid(files::PREDICTIONS, e.to_string()))?;
        let pool: Vec<PoolEntry> = pool
            .into_iter()
            .filter(|p| vectors.get(&p.source_title).is_some_and(|v| !v.is_zero()))
            .collect();
        let pool_vectors = pool
            .iter()
            .map(|p| (p.concept_id.clone(), vectors[&p.source_title].clone()))
            .collect();
        Ok(Self {
            source: candidates.source,
            target: candidates.target,
            pool,
            pool_vectors,
            vectors,
            model_versions: model_versions(dir)?,
        })
    }

    /// Pool entries closest to the seed's topic vector, best first.
    pub fn recommend(&self, seed: &str, count: usize) -> Result<Vec<RecommendationItem>, SeedNotFound> {
        let seed_vector = self
            .vectors
            .get(seed)
            .filter(|v| !v.is_zero())
            .ok_or_else(|| SeedNotFound {
                suggestions: self.suggestions(seed),
            })?;
        let by_concept: HashMap<&str, &PoolEntry> = self.pool.iter().map(|p| (p.concept_id.as_str(), p)).collect();
        let scored = score_concepts(seed_vector, &self.pool_vectors).expect("pool and seed vectors are non-zero");
        Ok(scored
            .into_iter()
            .take(count)
            .map(|s| {
                let p = by_concept[s.concept_id.as_str()];
                RecommendationItem {
                    source_title: p.source_title.clone(),
                    concept_id: s.concept_id,
                    y_pred: p.y_pred,
                    interest_score: s.similarity,
                }
            })
            .collect())
    }

    /// Known titles most similar to `query`.
    pub fn suggestions(&self, query: &str) -> Vec<String> {
        let q = query.to_lowercase();
        let mut scored: Vec<(f64, &String)> = self
            .vectors
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(t, _)| (strsim::jaro_winkler(&q, &t.to_lowercase()), t))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(MAX_SUGGESTIONS).map(|(_, t)| t.clone()).collect()
    }

    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }
}

/// Output hash recorded by the producing stage, or the file's own hash when
/// it has no stamp.
fn model_versions(dir: &Path) -> Result<BTreeMap<String, String>, LoadError> {
    let stamps = read_stamps(dir).map_err(|e| LoadError::Invalid {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })?;
    VERSIONED_FILES
        .iter()
        .map(|f| {
            let v = match producer(&stamps, f) {
                Some(s) => s.outputs[*f].clone(),
                None => sha256_file(&dir.join(f)).map_err(|e| LoadError::Invalid {
                    path: dir.join(f),
                    reason: e.to_string(),
                })?,
            };
            Ok((f.to_string(), v))
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct Artifacts {
    pub pairs: BTreeMap<(LanguageCode, LanguageCode), PairArtifacts>,
}

impl Artifacts {
    pub fn load(root: &Path) -> Result<Self, LoadError> {
        let mut dirs = Vec::new();
        if root.join(files::RUN_CONF).is_file() {
            dirs.push(root.to_path_buf());
        } else {
            let entries = fs::read_dir(root).map_err(|source| LoadError::Io {
                path: root.to_path_buf(),
                source,
            })?;
            for e in entries.flatten() {
                if e.path().join(files::RUN_CONF).is_file() {
                    dirs.push(e.path());
                }
            }
            dirs.sort();
        }
        if dirs.is_empty() {
            return Err(LoadError::Empty(root.to_path_buf()));
        }
        let mut pairs = BTreeMap::new();
        for d in dirs {
            let p = PairArtifacts::load(&d)?;
            let key = (p.source.clone(), p.target.clone());
            if pairs.contains_key(&key) {
                return Err(LoadError::DuplicatePair(key.0, key.1));
            }
            pairs.insert(key, p);
        }
        Ok(Self { pairs })
    }

    pub fn health(&self) -> HealthResponse {
        HealthResponse {
            api_version: API_VERSION,
            status: "ok".into(),
            pairs: self
                .pairs
                .values()
                .map(|p| PairVersions {
                    source: p.source.clone(),
                    target: p.target.clone(),
                    model_versions: p.model_versions.clone(),
                })
                .collect(),
        }
    }
}

/// Shared handle. Empty until loading finishes.
#[derive(Clone, Default)]
pub struct AppState {
    artifacts: Arc<OnceLock<Artifacts>>,
}

impl AppState {
    pub fn loaded(artifacts: Artifacts) -> Self {
        let s = Self::default();
        s.set(artifacts);
        s
    }

    /// Publishes the artifacts. Later calls are ignored.
    pub fn set(&self, artifacts: Artifacts) {
        let _ = self.artifacts.set(artifacts);
    }

    pub fn get(&self) -> Option<&Artifacts> {
        self.artifacts.get()
    }
}

fn error(status: StatusCode, code: &str, message: String, suggestions: Vec<String>) -> Response {
    let body = ErrorBody {
        api_version: API_VERSION,
        error: code.into(),
        message,
        suggestions,
    };
    (status, Json(body)).into_response()
}

fn not_loaded() -> Response {
    error(
        StatusCode::SERVICE_UNAVAILABLE,
        "artifacts_not_loaded",
        "artifacts are still loading".into(),
        Vec::new(),
    )
}

async fn health(State(state): State<AppState>) -> Response {
    match state.get() {
        Some(a) => Json(a.health()).into_response(),
        None => not_loaded(),
    }
}

async fn recommendations(State(state): State<AppState>, Query(q): Query<HashMap<String, String>>) -> Response {
    let Some(artifacts) = state.get() else {
        return not_loaded();
    };
    let bad = |code: &str, message: String| error(StatusCode::BAD_REQUEST, code, message, Vec::new());
    let (Some(source), Some(target)) = (q.get("source"), q.get("target")) else {
        return bad("bad_language_pair", "source and target are required".into());
    };
    let pair = LanguageCode::new(source.as_str())
        .ok()
        .zip(LanguageCode::new(target.as_str()).ok())
        .and_then(|key| artifacts.pairs.get(&key));
    let Some(pair) = pair else {
        let served: Vec<String> = artifacts.pairs.keys().map(|(s, t)| format!("{s}->{t}")).collect();
        return bad(
            "bad_language_pair",
            format!("{source}->{target} is not served; available: {}", served.join(", ")),
        );
    };
    let Some(seed) = q.get("seed").filter(|s| !s.is_empty()) else {
        return bad("missing_seed", "seed is required".into());
    };
    let count = match q.get("count") {
        None => DEFAULT_COUNT,
        Some(c) => match c.parse::<usize>() {
            Ok(c) => c.min(MAX_COUNT),
            Err(_) => return bad("bad_count", format!("count {c:?} is not a non-negative integer")),
        },
    };
    match pair.recommend(seed, count) {
        Ok(items) => Json(RecommendationResponse {
            api_version: API_VERSION,
            source: pair.source.clone(),
            target: pair.target.clone(),
            seed_title: seed.clone(),
            items,
            model_versions: pair.model_versions.clone(),
        })
        .into_response(),
        Err(e) => error(
            StatusCode::NOT_FOUND,
            "seed_not_found",
            format!("no {} article titled {seed:?}", pair.source),
            e.suggestions,
        ),
    }
}

/// `cors_origin` of `None` allows any origin.
pub fn router(state: AppState, cors_origin: Option<HeaderValue>) -> Router {
    let cors = CorsLayer::new().allow_origin(match cors_origin {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    });
    Router::new()
        .route("/api/health", get(health))
        .route("/api/recommendations", get(recommendations))
        .layer(cors)
        .with_state(state)
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Binds `addr`, answers 503 while the artifacts load, then serves until the
/// process stops. Returns early if loading fails.
pub async fn serve(addr: SocketAddr, artifacts_dir: PathBuf, cors_origin: Option<HeaderValue>) -> Result<(), ServeError> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    let state = AppState::default();
    let app = router(state.clone(), cors_origin);
    let server = tokio::spawn(async move { axum::serve(listener, app).await });
    let loaded = tokio::task::spawn_blocking(move || Artifacts::load(&artifacts_dir))
        .await
        .expect("loader does not panic");
    match loaded {
        Ok(artifacts) => {
            eprintln!("loaded {} language pair(s)", artifacts.pairs.len());
            state.set(artifacts);
        }
        Err(e) => {
            server.abort();
            return Err(e.into());
        }
    }
    Ok(server.await.expect("server task does not panic")?)
}
