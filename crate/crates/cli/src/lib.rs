//! Command-line companion to the search engine: configuration layering,
//! checksum-verified dataset loading, memoized candidate evaluation, run
//! orchestration, and the file outputs.

pub mod config;
pub mod evaluator;
pub mod genome_io;
pub mod loaders;
pub mod outputs;
pub mod run;
