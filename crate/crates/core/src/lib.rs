//! Performance-improvement localisation for MiniLang programs.
//!
//! Every AST node of a program is ranked by one of four techniques:
//! statement profiling, deletion analysis, exhaustive first-order mutation,
//! and exhaustive mutation with deletion gap filling. The evaluation module
//! scores those rankings against known improvement locations.

pub mod corpus;
pub mod evaluation;
pub mod interpreter;
pub mod minilang;
pub mod mutation;
pub mod pipeline;
pub mod profiler;
pub mod report;

pub use minilang::{parse, render, NodeId, Program};
