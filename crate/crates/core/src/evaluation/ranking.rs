use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::minilang::NodeId;
use crate::mutation::{NodeScore, Technique};

/// Fractional ranks (1 = best), indexed by node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub ranks: Vec<f64>,
    pub n_total: usize,
}

impl Ranking {
    pub fn rank(&self, n: NodeId) -> Option<f64> {
        self.ranks.get(n.index()).copied()
    }
}

/// Ranks scores in descending order of value; tied values share the mean
/// of the positions they occupy. `scores[i]` must describe node `i`.
pub fn fractional_rank(scores: &[NodeScore]) -> Ranking {
    let values: Vec<f64> = scores.iter().map(|s| s.value).collect();
    fractional_rank_values(&values)
}

pub fn fractional_rank_values(values: &[f64]) -> Ranking {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end.
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    Ranking { ranks, n_total: values.len() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementAnnotation {
    pub problem: String,
    pub nodes: BTreeSet<NodeId>,
    /// Documentation only.
    pub improvement_pct: f64,
}

/// Rank every improvement node would get if all of them tied at the top.
pub fn ideal_ranking(annotation: &ImprovementAnnotation, n_total: usize) -> Result<f64, EvalError> {
    let k = annotation.nodes.len();
    if k == 0 {
        return Err(EvalError::EmptyAnnotation(annotation.problem.clone()));
    }
    if k > n_total {
        return Err(EvalError::AnnotationTooLarge { nodes: k, n_total });
    }
    Ok((k as f64 + 1.0) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRankError {
    pub node: NodeId,
    pub r_i: f64,
    pub r_l: f64,
    pub error: f64,
    pub upper_half: bool,
}

impl NodeRankError {
    /// `100 * (1 - (R_i - 1) / N)`: rank 1 scores 100.
    pub fn accuracy_pct(&self, n_total: usize) -> f64 {
        accuracy_pct(self.r_i, n_total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankErrorReport {
    pub problem: String,
    pub technique: Technique,
    pub n_total: usize,
    pub per_node: Vec<NodeRankError>,
}

impl RankErrorReport {
    pub fn percentiles(&self) -> Vec<f64> {
        self.per_node.iter().map(|e| e.accuracy_pct(self.n_total)).collect()
    }
}

pub fn accuracy_pct(r_i: f64, n_total: usize) -> f64 {
    100.0 * (1.0 - (r_i - 1.0) / n_total as f64)
}

/// `(R_i - R_l) / N` for every improvement node, in node id order.
pub fn percent_rank_error(
    ranking: &Ranking,
    annotation: &ImprovementAnnotation,
    technique: Technique,
) -> Result<RankErrorReport, EvalError> {
    let n = ranking.n_total;
    let r_l = ideal_ranking(annotation, n)?;
    let per_node = annotation
        .nodes
        .iter()
        .map(|&node| {
            let r_i = ranking.rank(node).ok_or(EvalError::UnknownNode(node))?;
            Ok(NodeRankError { node, r_i, r_l, error: (r_i - r_l) / n as f64, upper_half: r_i <= n as f64 / 2.0 })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(RankErrorReport { problem: annotation.problem.clone(), technique, n_total: n, per_node })
}
