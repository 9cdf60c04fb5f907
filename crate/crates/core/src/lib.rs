//! Corpus engineering and evaluation toolkit for measuring how consistently
//! a translation system behaves when the same target sentence is reachable
//! from many equivalent source variants.
//!
//! The data model is the *cluster*: one target sentence paired with a
//! weighted set of source variants that all mean the same thing. Clusters
//! are imported from prompt/variant block files, stored as JSON Lines,
//! subselected, perturbed, exported to parallel text, and scored.
//!
//! Modules:
//!
//! - [`corpus`]: cluster model, import/export, canonical JSONL.
//! - [`tokenize`]: the `13a` tokenizer used by every token-level metric.
//! - [`metrics`]: BLEU, consistency, pairwise BLEU, exact-match, group counts.
//! - [`subselect`]: weight-based and seeded-random variant selection.
//! - [`perturb`]: character-level and Japanese rule-based variant synthesis.
//! - [`seed`]: the deterministic seed-derivation scheme shared by everything
//!   that consumes randomness.

pub mod corpus;
pub mod metrics;
pub mod perturb;
pub mod seed;
pub mod subselect;
pub mod tokenize;

mod normalize;

pub use corpus::{Cluster, Corpus, CorpusError, CorpusStats, ExtremeMode, VariantEntry};
pub use metrics::{MetricReport, MetricsError};
