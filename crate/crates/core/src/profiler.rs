//! Statement execution counting and the profiling-based node ranking.

use std::collections::BTreeMap;

use crate::interpreter::{Baseline, Executable, InterpError, TestCase, BOOTSTRAP_CAP, DEFAULT_TIMEOUT_FACTOR};
use crate::minilang::{NodeId, Program};
use crate::mutation::{NodeScore, Technique};

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    /// Entry count of every statement, summed over the suite.
    pub counts: BTreeMap<NodeId, u64>,
    /// Per node (indexed by id): count of the nearest enclosing statement,
    /// 0 for nodes outside any statement.
    pub node_scores: Vec<u64>,
}

impl ProfileReport {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub fn profile(p: &Program, suite: &[TestCase]) -> Result<ProfileReport, InterpError> {
    // Fails with BaselineDiverged exactly when the original cannot finish.
    Baseline::measure(p, suite, DEFAULT_TIMEOUT_FACTOR)?;
    let exe = Executable::compile(p)?;
    let mut raw = vec![0u64; p.len()];
    for t in suite {
        exe.execute_counting(t, BOOTSTRAP_CAP, &mut raw)?;
    }
    let counts: BTreeMap<NodeId, u64> =
        p.nodes().iter().filter(|n| n.kind.is_statement()).map(|n| (n.id, raw[n.id.index()])).collect();
    let node_scores = p.nodes().iter().map(|n| p.enclosing_statement(n.id).map_or(0, |s| counts[&s])).collect();
    Ok(ProfileReport { counts, node_scores })
}

/// Inherited counts as a fraction of the total statement count.
pub fn profile_ranking(r: &ProfileReport) -> Vec<NodeScore> {
    let total = r.total();
    r.node_scores
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let value = if total == 0 { 0.0 } else { c as f64 / total as f64 };
            NodeScore::new(NodeId(i), value, Technique::Profiler)
        })
        .collect()
}
