//! Interchange data model, TSV loading and synthetic corpora.

mod fixtures;
mod model;
pub mod synth;
mod tsv;

pub use fixtures::neoplasm_fixture;
pub use model::*;
pub use synth::{generate_synthetic, GroundTruth, LanguageSpec, SyntheticSpec};
pub use tsv::*;
