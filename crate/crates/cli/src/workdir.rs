use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gapfinder::config::{files, RunConfig};
use gapfinder::corpus::{self, load_corpus, Corpus};
use gapfinder::provenance::{check_fresh, hash_files, read_stamps, Stamp, Timing};

use crate::error::CliError;

pub const CORPUS_FILES: [&str; 8] = [
    corpus::LANGUAGES_FILE,
    corpus::ARTICLES_FILE,
    corpus::SITELINKS_FILE,
    corpus::LANGLINKS_FILE,
    corpus::PAGEVIEWS_FILE,
    corpus::PAGELINKS_FILE,
    corpus::EDITS_FILE,
    corpus::TOKENS_FILE,
];

/// The working directory of one run: effective config plus existing stamps.
pub struct Workdir {
    pub root: PathBuf,
    pub config: RunConfig,
    stamps: BTreeMap<String, Stamp>,
}

impl Workdir {
    /// Reads `config_file` (or `run.conf` when present), applies the command
    /// line overrides and saves the result back to `run.conf`.
    pub fn open(root: &Path, config_file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Config(format!("{}: {e}", root.display())))?;
        let mut config = RunConfig::default();
        let file = match config_file {
            Some(f) => Some(root.join(f)),
            None => Some(root.join(files::RUN_CONF)).filter(|p| p.is_file()),
        };
        if let Some(f) = file {
            let text = fs::read_to_string(&f).map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?;
            config.apply_text(&text)?;
        }
        for (k, v) in overrides {
            config.set(k, v)?;
        }
        if config.source == config.target {
            return Err(CliError::Config(format!("source and target are both {}", config.source)));
        }
        let conf_path = root.join(files::RUN_CONF);
        let text = config.to_text();
        if fs::read_to_string(&conf_path).ok().as_deref() != Some(text.as_str()) {
            fs::write(&conf_path, text)?;
        }
        let stamps = read_stamps(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            config,
            stamps,
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn corpus_file(&self, name: &str) -> String {
        Path::new(&self.config.corpus).join(name).to_string_lossy().into_owned()
    }

    pub fn stage(&self, name: &'static str) -> Stage<'_> {
        Stage {
            wd: self,
            name,
            inputs: BTreeSet::new(),
            outputs: BTreeSet::new(),
            start: Instant::now(),
        }
    }
}

/// One subcommand's bookkeeping: which files it read and wrote.
pub struct Stage<'a> {
    pub wd: &'a Workdir,
    name: &'static str,
    inputs: BTreeSet<String>,
    outputs: BTreeSet<String>,
    start: Instant,
}

impl Stage<'_> {
    pub fn config(&self) -> &RunConfig {
        &self.wd.config
    }

    /// Records `rel` as an input after checking that it exists and is fresh.
    pub fn require(&mut self, rel: &str) -> Result<PathBuf, CliError> {
        let path = self.wd.path(rel);
        if !path.is_file() {
            return Err(CliError::Data(format!("{} not found; run the stage that writes it first", path.display())));
        }
        check_fresh(&self.wd.root, &self.wd.stamps, rel)?;
        self.inputs.insert(rel.to_string());
        Ok(path)
    }

    pub fn read(&mut self, rel: &str) -> Result<String, CliError> {
        let path = self.require(rel)?;
        Ok(fs::read_to_string(path)?)
    }

    pub fn corpus(&mut self) -> Result<Corpus, CliError> {
        for f in CORPUS_FILES {
            let rel = self.wd.corpus_file(f);
            if self.wd.path(&rel).is_file() {
                self.require(&rel)?;
            }
        }
        Ok(load_corpus(self.wd.path(&self.wd.config.corpus))?)
    }

    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.wd.path(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, contents)?;
        self.outputs.insert(rel.to_string());
        Ok(())
    }

    /// Records a file that was written by other means.
    pub fn wrote(&mut self, rel: &str) {
        self.outputs.insert(rel.to_string());
    }

    pub fn finish(self) -> Result<(), CliError> {
        let root = &self.wd.root;
        let inputs: Vec<String> = self.inputs.into_iter().collect();
        let outputs: Vec<String> = self.outputs.into_iter().collect();
        let stamp = Stamp {
            stage: self.name.to_string(),
            inputs: hash_files(root, &inputs)?,
            outputs: hash_files(root, &outputs)?,
            config: self.wd.config.to_map(),
            seed: self.wd.config.seed,
            timing: Timing {
                elapsed_ms: self.start.elapsed().as_millis() as u64,
            },
        };
        stamp.write(root)?;
        Ok(())
    }
}
