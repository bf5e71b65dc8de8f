//! Pointer-isolated code clone detection with constraint verification.
//!
//! The pipeline: parse a C-subset corpus, taint from each pointer over a
//! per-function dependency graph to find the variables that can affect it,
//! slice the function down to those variables, vectorize the slices by AST
//! node kind, cluster the vectors with LSH under a similarity threshold,
//! then verify sampled clone pairs by extracting array-bound constraint
//! sets through bounded symbolic execution. Pairs whose constraints differ
//! feed weight adjustments back into the vectors until clustering stops
//! producing false positives.

pub mod ast;
pub mod error;
pub mod lexer;
pub mod parser;
pub mod pipeline;
pub mod printer;
pub mod cluster;
pub mod constraints;
pub mod depgraph;
pub mod feedback;
pub mod slicer;
pub mod symexec;
pub mod treediff;
pub mod vectors;
