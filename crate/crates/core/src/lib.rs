//! Query generators for entity search engines, with a fully automatic
//! evaluation harness over a seeded search-engine simulator.
//!
//! The pipeline: a [`corpus`] supplies input datasets and a noisy
//! [`engine`] index; a query generator from [`generators`] turns a dataset
//! into a query plan; the [`evaluator`] executes the plan page by page,
//! matches results back to the inputs with the [`matcher`] and computes
//! coverage, recall, precision and efficiency. [`cli`] wires the stages
//! together behind the `qf` binary.

pub mod cli;
pub mod corpus;
pub mod engine;
pub mod evaluator;
pub mod generators;
pub mod matcher;
pub mod seed;
pub mod text;
