use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use gapfinder::config::{files, RunConfig};
use gapfinder::evaluation::BetaPrior;

mod commands;
mod error;
mod workdir;

use error::CliError;
use workdir::Workdir;

/// Finds articles missing from one language edition, ranks them by expected
/// readership and matches them to editors.
///
/// Every config key can also be given as a flag, e.g. `--n-topics 50`.
#[derive(Parser)]
#[command(name = "gapfinder", version)]
struct Cli {
    /// Directory holding run.conf and every stage artifact.
    #[arg(long, global = true, default_value = ".")]
    workdir: PathBuf,
    /// Config file, relative to the workdir. Defaults to run.conf when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Prior {
    Uniform,
    Jeffreys,
}

#[derive(Subcommand)]
enum Command {
    /// Write a planted synthetic corpus and its ground truth.
    GenSynth,
    /// Build the coverage graph and label its components.
    BuildGraph,
    /// List concepts with no target-language article.
    FindMissing,
    /// Fit topics on source-language articles and infer a vector per article.
    TrainLda,
    /// Write the feature table for training concepts and filtered candidates.
    ExtractFeatures,
    /// Cross-validate and fit the random forest.
    TrainRanker,
    /// Predict the target-language rank of every candidate.
    Rank,
    /// Summarize each editor's recent history as a topic vector.
    BuildInterests,
    /// Assign candidates to editors.
    Match,
    /// Ranking metrics, optional feature selection and the interest-vector sweep.
    Evaluate {
        /// Predictions file to score against `--truth` instead.
        #[arg(long, requires = "truth")]
        pred: Option<String>,
        #[arg(long, requires = "pred")]
        truth: Option<String>,
    },
    /// Draw the rank windows to label for precision.
    SamplePrecision,
    /// Precision with credible intervals from a labelled sheet.
    TallyPrecision {
        #[arg(long, default_value = files::PRECISION_SAMPLE)]
        sheet: String,
        #[arg(long, value_enum, default_value = "uniform")]
        prior: Prior,
    },
    /// Every stage from build-graph through evaluate.
    RunAll,
    /// Serve recommendations over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Run directory, or a directory of run directories. Defaults to the workdir.
        #[arg(long)]
        artifacts: Option<PathBuf>,
        /// Allowed CORS origin. Any origin when omitted.
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

fn flag(key: &str) -> String {
    key.replace('_', "-")
}

fn command() -> clap::Command {
    let defaults: Vec<(&'static str, String)> = RunConfig::default().entries();
    Cli::command().args(defaults.into_iter().map(|(k, v)| {
        Arg::new(k)
            .long(flag(k))
            .global(true)
            .value_name("VALUE")
            .help(format!("config key {k} [default: {v}]"))
            .help_heading("Config overrides")
    }))
}

fn overrides(m: &ArgMatches) -> Vec<(String, String)> {
    let sub = m.subcommand().map(|(_, s)| s);
    RunConfig::KEYS
        .iter()
        .filter_map(|k| {
            let v = sub
                .and_then(|s| s.get_one::<String>(k))
                .or_else(|| m.get_one::<String>(k))?;
            Some((k.to_string(), v.clone()))
        })
        .collect()
}

fn run(cli: Cli, overrides: &[(String, String)]) -> Result<(), CliError> {
    let wd = Workdir::open(&cli.workdir, cli.config.as_deref(), overrides)?;
    match cli.command {
        Command::GenSynth => commands::gen_synth(&wd),
        Command::BuildGraph => commands::build_graph(&wd),
        Command::FindMissing => commands::find_missing(&wd),
        Command::TrainLda => commands::train_lda_stage(&wd),
        Command::ExtractFeatures => commands::extract_features(&wd),
        Command::TrainRanker => commands::train_ranker(&wd),
        Command::Rank => commands::rank(&wd),
        Command::BuildInterests => commands::build_interests_stage(&wd),
        Command::Match => commands::match_stage(&wd),
        Command::Evaluate { pred: Some(p), truth: Some(t) } => commands::evaluate_files(&wd, &p, &t),
        Command::Evaluate { .. } => commands::evaluate(&wd),
        Command::SamplePrecision => commands::sample_precision(&wd),
        Command::TallyPrecision { sheet, prior } => {
            let prior = match prior {
                Prior::Uniform => BetaPrior::Uniform,
                Prior::Jeffreys => BetaPrior::Jeffreys,
            };
            commands::tally(&wd, &sheet, prior)
        }
        Command::RunAll => commands::run_all(&wd),
        Command::Serve {
            port,
            artifacts,
            cors_origin,
        } => {
            let origin = cors_origin
                .map(|o| o.parse().map_err(|_| CliError::Config(format!("bad CORS origin {o:?}"))))
                .transpose()?;
            let dir = artifacts.map_or_else(|| wd.root.clone(), |a| wd.root.join(a));
            let addr = SocketAddr::from(([0, 0, 0, 0], port));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(gapfinder_service::serve(addr, dir, origin)).map_err(|e| match e {
                gapfinder_service::ServeError::Io(e) => CliError::Config(e.to_string()),
                gapfinder_service::ServeError::Load(e) => CliError::Data(e.to_string()),
            })
        }
    }
}

fn main() -> ExitCode {
    let matches = command().get_matches();
    let overrides = overrides(&matches);
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
