use std::collections::BTreeMap;

use gapfinder::config::{files, Matcher};
use gapfinder::corpus::{generate_synthetic, write_corpus, ConceptId};
use gapfinder::evaluation::{
    family_sets, mrr_holdout, mrr_sweep_tsv, precision_sample, precision_sheet_tsv, random_mrr, rmse_spearman, stepwise_feature_selection,
    tally_precision, BetaPrior, BootstrapConfig, MetricReport,
};
use gapfinder::graph::{CoverageGraph, MissingSet};
use gapfinder::interest::{build_histories, build_interests, interests_from_tsv, interests_to_tsv};
use gapfinder::matching::{candidate_pool, greedy_match, optimal_match, PoolEntry, ScoreMatrix};
use gapfinder::ranking::{
    predictions_from_tsv, predictions_to_tsv, stratified_split, train_forest, training_targets, CandidateFilter, FeatureContext,
    FeatureTable, ForestModel, RowRole, MEAN_BASELINE,
};
use gapfinder::seeds::derive_seed;
use gapfinder::topics::{article_topic_vectors, language_docs, topic_vectors_from_tsv, topic_vectors_to_tsv, train_lda, TopicVector};
use serde_json::json;

use crate::error::CliError;
use crate::workdir::{Stage, Workdir, CORPUS_FILES};

/// Stream ids for seeds derived from the run seed.
pub mod streams {
    pub const LDA: u64 = 1;
    pub const FOREST: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
}

fn seed(wd: &Workdir, stream: u64) -> u64 {
    derive_seed(wd.config.seed, stream)
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

pub fn gen_synth(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("gen-synth");
    let spec = wd.config.synthetic_spec();
    let (corpus, truth) = generate_synthetic(&spec, wd.config.seed).map_err(|e| CliError::Config(e.to_string()))?;
    write_corpus(&corpus, wd.path(&wd.config.corpus))?;
    for f in CORPUS_FILES {
        st.wrote(&wd.corpus_file(f));
    }
    st.write(files::GROUND_TRUTH, serde_json::to_string_pretty(&truth)? + "\n")?;
    println!(
        "wrote {} articles over {} languages to {}",
        corpus.articles.len(),
        corpus.languages.len(),
        wd.config.corpus
    );
    st.finish()
}

pub fn build_graph(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("build-graph");
    let corpus = st.corpus()?;
    let mut g = CoverageGraph::build(&corpus, &wd.config.source, &wd.config.target)?;
    g.weakly_connected_components();
    g.write_components_tsv(wd.path(files::COMPONENTS))?;
    st.wrote(files::COMPONENTS);
    println!("{} nodes in {} components", g.nodes().len(), g.component_count());
    st.finish()
}

pub fn find_missing(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("find-missing");
    let path = st.require(files::COMPONENTS)?;
    let g = CoverageGraph::read_components_tsv(path)?;
    check_pair(wd, g.source(), g.target(), files::COMPONENTS)?;
    let missing = g.find_missing()?;
    st.write(files::MISSING, missing.to_tsv())?;
    println!("{} concepts missing in {}", missing.entries.len(), missing.target);
    st.finish()
}

fn check_pair(wd: &Workdir, source: &gapfinder::corpus::LanguageCode, target: &gapfinder::corpus::LanguageCode, file: &str) -> Result<(), CliError> {
    if *source != wd.config.source || *target != wd.config.target {
        return Err(CliError::Stale(format!(
            "{file} is for {source}->{target} but the config asks for {}->{}",
            wd.config.source, wd.config.target
        )));
    }
    Ok(())
}

pub fn train_lda_stage(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("train-lda");
    let corpus = st.corpus()?;
    let docs: Vec<Vec<String>> = language_docs(&corpus, &wd.config.source)
        .into_iter()
        .map(|(_, d)| d.to_vec())
        .collect();
    let (model, report) = train_lda(&docs, &wd.config.lda_config(seed(wd, streams::LDA)))?;
    let vectors = article_topic_vectors(&model, &corpus, &wd.config.source);
    st.write(files::LDA_MODEL, model.to_tsv())?;
    st.write(files::TOPIC_VECTORS, topic_vectors_to_tsv(&vectors))?;
    println!(
        "{} topics over {} documents, perplexity {:.2}",
        model.n_topics(),
        docs.len(),
        report.perplexity.last().copied().unwrap_or(f64::NAN)
    );
    st.finish()
}

fn read_vectors(st: &mut Stage) -> Result<BTreeMap<String, TopicVector>, CliError> {
    Ok(topic_vectors_from_tsv(&st.read(files::TOPIC_VECTORS)?)?)
}

fn read_missing(st: &mut Stage, file: &str) -> Result<MissingSet, CliError> {
    let m = MissingSet::from_tsv(&st.read(file)?)?;
    check_pair(st.wd, &m.source, &m.target, file)?;
    Ok(m)
}

pub fn extract_features(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("extract-features");
    let corpus = st.corpus()?;
    let g = CoverageGraph::read_components_tsv(st.require(files::COMPONENTS)?)?;
    check_pair(wd, g.source(), g.target(), files::COMPONENTS)?;
    let vectors = read_vectors(&mut st)?;
    let missing = read_missing(&mut st, files::MISSING)?;
    let n_topics = vectors.values().next().map_or(0, |v| v.len());
    let ctx = FeatureContext::new(&corpus, &g, &vectors, n_topics)?;
    let schema = ctx.schema().clone();
    let mut table = FeatureTable::new(&schema);
    let targets = training_targets(&corpus, &wd.config.source, &wd.config.target)?;
    let train_ids: Vec<ConceptId> = targets.iter().map(|(c, _)| c.clone()).collect();
    for (row, (_, y)) in ctx.extract(&train_ids)?.iter().zip(&targets) {
        table.push(&schema, row, RowRole::Train, Some(*y));
    }
    let filter = CandidateFilter {
        min_bytes: wd.config.min_bytes,
        min_views: wd.config.min_views,
        exclude_disambiguation: true,
    };
    let candidates = filter.apply(&corpus, &missing);
    for e in &candidates.entries {
        let row = ctx.row(&e.concept_id, &e.source_title);
        table.push(&schema, &row, RowRole::Apply, None);
    }
    st.write(files::FEATURES, table.to_tsv())?;
    st.write(files::CANDIDATES, candidates.to_tsv())?;
    println!(
        "{} training rows, {} of {} missing concepts pass the filters, {} columns",
        train_ids.len(),
        candidates.entries.len(),
        missing.entries.len(),
        table.columns.len()
    );
    st.finish()
}

/// Training rows as (x, y) split into train and test by the run's split seed.
struct Split {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    test_x: Vec<Vec<f64>>,
    test_y: Vec<f64>,
}

fn split_training_rows(wd: &Workdir, table: &FeatureTable) -> Split {
    let rows: Vec<_> = table.rows.iter().filter(|r| r.role == RowRole::Train).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.target.expect("training rows carry a target")).collect();
    let (train, test) = stratified_split(&y, wd.config.test_fraction, seed(wd, streams::SPLIT));
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) { idx.iter().map(|&i| (rows[i].values.clone(), y[i])).unzip() };
    let (train_x, train_y) = pick(&train);
    let (test_x, test_y) = pick(&test);
    Split {
        train_x,
        train_y,
        test_x,
        test_y,
    }
}

fn source_column(wd: &Workdir, table: &FeatureTable) -> Result<usize, CliError> {
    let name = format!("normrank.{}", wd.config.source);
    table
        .column(&name)
        .ok_or_else(|| CliError::Data(format!("{} has no {name} column", files::FEATURES)))
}

/// Test-split metrics of the forest and both baselines.
fn test_metrics(wd: &Workdir, table: &FeatureTable, model: &ForestModel, split: &Split) -> Result<serde_json::Value, CliError> {
    let col = source_column(wd, table)?;
    let forest = rmse_spearman(&model.predict_rows(&split.test_x)?, &split.test_y)?;
    let source: Vec<f64> = split.test_x.iter().map(|r| r[col]).collect();
    let source = rmse_spearman(&source, &split.test_y)?;
    let mean = rmse_spearman(&vec![MEAN_BASELINE; split.test_y.len()], &split.test_y)?;
    Ok(json!({ "forest": forest, "source_baseline": source, "mean_baseline": mean }))
}

pub fn train_ranker(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("train-ranker");
    let table = FeatureTable::from_tsv(&st.read(files::FEATURES)?)?;
    let split = split_training_rows(wd, &table);
    let config = wd.config.forest_config(seed(wd, streams::FOREST));
    let model = train_forest(&split.train_x, &split.train_y, &table.columns, &config)?;
    let metrics = test_metrics(wd, &table, &model, &split)?;
    st.write(files::MODEL, model.to_json() + "\n")?;
    let report = json!({
        "n_train": split.train_y.len(),
        "n_test": split.test_y.len(),
        "n_trees": model.n_trees,
        "max_depth": model.max_depth,
        "mtry": model.mtry,
        "cv": model.cv,
        "test": metrics,
    });
    st.write(files::RANKER_REPORT, json_text(&report))?;
    println!(
        "forest {} trees, depth {}; test rmse {:.4} (source {:.4}, mean {:.4})",
        model.n_trees,
        model.max_depth.map_or("unlimited".into(), |d| d.to_string()),
        metrics["forest"]["rmse"].as_f64().unwrap_or(f64::NAN),
        metrics["source_baseline"]["rmse"].as_f64().unwrap_or(f64::NAN),
        metrics["mean_baseline"]["rmse"].as_f64().unwrap_or(f64::NAN),
    );
    st.finish()
}

fn read_model(st: &mut Stage, table: &FeatureTable) -> Result<ForestModel, CliError> {
    let model = ForestModel::from_json(&st.read(files::MODEL)?)?;
    if model.schema_hash != table.schema_hash {
        return Err(CliError::Stale(format!(
            "{} was trained on schema {} but {} has schema {}; rerun train-ranker",
            files::MODEL,
            model.schema_hash,
            files::FEATURES,
            table.schema_hash
        )));
    }
    Ok(model)
}

pub fn rank(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("rank");
    let table = FeatureTable::from_tsv(&st.read(files::FEATURES)?)?;
    let model = read_model(&mut st, &table)?;
    let rows: Vec<_> = table.rows.iter().filter(|r| r.role == RowRole::Apply).collect();
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
    let y = model.predict_rows(&x)?;
    let predictions: BTreeMap<ConceptId, f64> = rows.iter().map(|r| r.concept_id.clone()).zip(y).collect();
    st.write(files::PREDICTIONS, predictions_to_tsv(&predictions))?;
    println!("ranked {} candidates", predictions.len());
    st.finish()
}

pub fn build_interests_stage(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("build-interests");
    let corpus = st.corpus()?;
    let vectors = read_vectors(&mut st)?;
    let histories = build_histories(&corpus, &wd.config.source);
    let (interests, warnings) = build_interests(&histories, &vectors, wd.config.interest_method, wd.config.history_size)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    st.write(files::INTERESTS, interests_to_tsv(&interests))?;
    println!("{} interest vectors, {} editors skipped", interests.len(), warnings.len());
    st.finish()
}

/// The top-K pool, keeping only entries whose source article has a topic vector.
fn scored_pool(st: &mut Stage) -> Result<(Vec<PoolEntry>, BTreeMap<String, TopicVector>), CliError> {
    let candidates = read_missing(st, files::CANDIDATES)?;
    let predictions = predictions_from_tsv(&st.read(files::PREDICTIONS)?)?;
    let vectors = read_vectors(st)?;
    let pool = candidate_pool(&candidates, &predictions, st.config().top_k)?
        .into_iter()
        .filter(|p| vectors.get(&p.source_title).is_some_and(|v| !v.is_zero()))
        .collect();
    Ok((pool, vectors))
}

pub fn match_stage(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("match");
    let (pool, vectors) = scored_pool(&mut st)?;
    let interests = interests_from_tsv(&st.read(files::INTERESTS)?)?;
    let cands: Vec<(ConceptId, TopicVector)> = pool
        .iter()
        .map(|p| (p.concept_id.clone(), vectors[&p.source_title].clone()))
        .collect();
    let m = ScoreMatrix::from_vectors(&interests, &cands);
    let k = wd.config.k_per_editor;
    let plan = match wd.config.matcher {
        Matcher::Greedy => greedy_match(&m, k),
        Matcher::Optimal => optimal_match(&m, k, wd.config.max_edges)?,
    };
    st.write(files::PLAN, plan.to_tsv(&pool))?;
    println!(
        "{} assignments for {} editors from a pool of {}; objective {:.4}, mean score {:.4}",
        plan.assignments.len(),
        interests.len(),
        pool.len(),
        plan.objective,
        plan.average()
    );
    st.finish()
}

/// Compares two prediction files on their shared concepts.
pub fn evaluate_files(wd: &Workdir, pred: &str, truth: &str) -> Result<(), CliError> {
    let mut st = wd.stage("evaluate");
    let pred = predictions_from_tsv(&st.read(pred)?)?;
    let truth = predictions_from_tsv(&st.read(truth)?)?;
    let (p, t): (Vec<f64>, Vec<f64>) = pred
        .iter()
        .filter_map(|(c, y)| Some((*y, *truth.get(c)?)))
        .unzip();
    if p.is_empty() {
        return Err(CliError::Data("prediction and truth files share no concept".into()));
    }
    let metrics = rmse_spearman(&p, &t)?;
    let report = json!({ "config": wd.config.to_map(), "ranking": { "predictions": metrics } });
    st.write(files::REPORT, json_text(&report))?;
    print_metrics("predictions", &metrics);
    st.finish()
}

fn print_metrics(name: &str, m: &MetricReport) {
    match m.spearman {
        Some(s) => println!("{name}: rmse {:.4}, spearman {s:.4}, n {}", m.rmse, m.n),
        None => println!("{name}: rmse {:.4}, n {}", m.rmse, m.n),
    }
}

pub fn evaluate(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("evaluate");
    let table = FeatureTable::from_tsv(&st.read(files::FEATURES)?)?;
    let model = read_model(&mut st, &table)?;
    let split = split_training_rows(wd, &table);
    let ranking = test_metrics(wd, &table, &model, &split)?;
    for name in ["forest", "source_baseline", "mean_baseline"] {
        let m: MetricReport = serde_json::from_value(ranking[name].clone())?;
        print_metrics(name, &m);
    }

    let mut report = json!({ "config": wd.config.to_map(), "ranking": ranking });
    if wd.config.evaluate_stepwise {
        let sets = family_sets(&table.families());
        let steps = stepwise_feature_selection(
            &sets,
            (&split.train_x, &split.train_y),
            (&split.test_x, &split.test_y),
            &wd.config.forest_config(seed(wd, streams::FOREST)),
        )?;
        for s in &steps {
            println!("+ {}: cv rmse {:.4}, test rmse {:.4}", s.added, s.cv_rmse, s.test.rmse);
        }
        report["stepwise"] = serde_json::to_value(&steps)?;
    }

    let corpus = st.corpus()?;
    let vectors = read_vectors(&mut st)?;
    let histories = build_histories(&corpus, &wd.config.source);
    let bootstrap = BootstrapConfig {
        resamples: wd.config.bootstrap_resamples,
        seed: seed(wd, streams::BOOTSTRAP),
    };
    let mut sweep = Vec::new();
    for &method in &wd.config.mrr_methods {
        for &w in &wd.config.mrr_history_sizes {
            let r = mrr_holdout(&histories, &vectors, method, w, &bootstrap)?;
            println!("mrr {method} w={w}: {:.4} [{:.4}, {:.4}]", r.mrr, r.ci_low, r.ci_high);
            sweep.push(r);
        }
    }
    let n_candidates = sweep.first().map_or(0, |r| r.n_candidates);
    report["mrr"] = json!({
        "random_expectation": random_mrr(n_candidates),
        "sweep": sweep,
    });
    st.write(files::MRR_SWEEP, mrr_sweep_tsv(&sweep))?;
    st.write(files::REPORT, json_text(&report))?;
    st.finish()
}

pub fn sample_precision(wd: &Workdir) -> Result<(), CliError> {
    let mut st = wd.stage("sample-precision");
    let (pool, _) = scored_pool(&mut st)?;
    let rows = precision_sample(&pool)?;
    st.write(files::PRECISION_SAMPLE, precision_sheet_tsv(&rows))?;
    println!("{} rows to label in {}", rows.len(), files::PRECISION_SAMPLE);
    st.finish()
}

pub fn tally(wd: &Workdir, sheet: &str, prior: BetaPrior) -> Result<(), CliError> {
    let mut st = wd.stage("tally-precision");
    let tallies = tally_precision(&st.read(sheet)?, prior)?;
    for t in &tallies {
        println!(
            "ranks {}..{}: strict {}/{} [{:.2}, {:.2}], lenient {}/{} [{:.2}, {:.2}]",
            t.stratum,
            t.stratum + 19,
            t.strict.correct,
            t.strict.n,
            t.strict.low,
            t.strict.high,
            t.lenient.correct,
            t.lenient.n,
            t.lenient.low,
            t.lenient.high
        );
    }
    let report = json!({ "prior": format!("{prior:?}").to_lowercase(), "strata": tallies });
    st.write(files::PRECISION_TALLY, json_text(&report))?;
    st.finish()
}

/// Every stage after corpus generation, in order.
pub fn run_all(wd: &Workdir) -> Result<(), CliError> {
    build_graph(wd)?;
    let wd = reopen(wd)?;
    find_missing(&wd)?;
    let wd = reopen(&wd)?;
    train_lda_stage(&wd)?;
    let wd = reopen(&wd)?;
    extract_features(&wd)?;
    let wd = reopen(&wd)?;
    train_ranker(&wd)?;
    let wd = reopen(&wd)?;
    rank(&wd)?;
    let wd = reopen(&wd)?;
    build_interests_stage(&wd)?;
    let wd = reopen(&wd)?;
    match_stage(&wd)?;
    let wd = reopen(&wd)?;
    evaluate(&wd)
}

/// Picks up the stamps written by the previous stage.
fn reopen(wd: &Workdir) -> Result<Workdir, CliError> {
    Workdir::open(&wd.root, None, &[])
}
