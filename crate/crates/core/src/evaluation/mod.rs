//! Scoring localisation techniques against known improvement nodes.

mod bootstrap;
mod ranking;
mod tables;

use thiserror::Error;

use crate::minilang::NodeId;

pub use bootstrap::{bootstrap_diff, quantile, BootstrapConfig, BootstrapResult};
pub use ranking::{
    accuracy_pct, fractional_rank, fractional_rank_values, ideal_ranking, percent_rank_error, ImprovementAnnotation,
    NodeRankError, RankErrorReport, Ranking,
};
pub use tables::{
    accuracy_table, band_of, summary_table, AccuracyTable, SummaryTable, BANDS, LOWER_HALF_BAND, SUMMARY_ROWS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("problem `{0}` has no improvement nodes")]
    EmptyAnnotation(String),
    #[error("{nodes} improvement nodes in a program of {n_total}")]
    AnnotationTooLarge { nodes: usize, n_total: usize },
    #[error("node {0} is not in the ranking")]
    UnknownNode(NodeId),
    #[error("bootstrap needs at least one paired value")]
    EmptyInput,
    #[error("bootstrap inputs are not paired ({a} vs {b} values)")]
    Unpaired { a: usize, b: usize },
}
