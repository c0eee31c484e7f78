//! Core library of the `perfpatch` pipeline.
//!
//! The pipeline mines performance-improvement commits from git histories,
//! turns them into model-ready input/output example pairs, ranks candidate
//! patches from a pluggable suggestion backend, scores them against developer
//! ground truth, and validates live suggestions through a staged
//! syntax/compile/unit-test funnel with a statistical benchmark verdict.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`corpus_miner`] — walk a repository history and emit before/after file
//!   pairs for performance commits.
//! - [`code_model`] — parse subject-language (C#) sources into classes and
//!   methods, normalize and pair method versions, compute call relations and
//!   abstract variable names.
//! - [`example_builder`] — assemble token-budgeted input/output examples,
//!   deduplicate and split datasets at project granularity.
//! - [`suggestion_engine`] — produce and rank patch hypotheses via a backend
//!   contract (deterministic rewrite rules or a remote endpoint).
//! - [`eval_metrics`] — verbatim/abstracted match, CodeBLEU, closest-match
//!   retrieval and Top-K accuracy.
//! - [`patch_validator`] — splice suggestions into a working tree and run the
//!   compile/unit-test funnel with error categorization.
//! - [`bench_stats`] — benchmark summary parsing and the Welch/Tukey
//!   improvement verdict.


pub mod code_model;
pub mod example_builder;
pub mod corpus_miner;


pub mod patch_format;


pub mod syntax;
pub mod tokenize;
