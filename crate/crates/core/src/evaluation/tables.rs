use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{NodeRankError, RankErrorReport};
use crate::mutation::Technique;

pub const BANDS: [&str; 11] =
    ["99-100%", "90-99%", "80-90%", "70-80%", "60-70%", "50-60%", "40-50%", "30-40%", "20-30%", "10-20%", "0-10%"];

/// Index of the first band below the 50% line.
pub const LOWER_HALF_BAND: usize = 6;

/// Accuracy band of one improvement node. A node outside the upper half
/// never lands above the 50% line, even when its percentile rounds into
/// the 50-60 band (possible only for ranks just past N/2).
pub fn band_of(e: &NodeRankError, n_total: usize) -> usize {
    let pct = e.accuracy_pct(n_total);
    if !e.upper_half && pct >= 50.0 {
        return LOWER_HALF_BAND;
    }
    if pct >= 99.0 {
        0
    } else if pct >= 90.0 {
        1
    } else {
        10 - (pct / 10.0).floor().clamp(0.0, 8.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    /// `counts[technique][band]`, every technique present.
    pub counts: BTreeMap<Technique, [usize; 11]>,
}

pub fn accuracy_table(reports: &[RankErrorReport]) -> AccuracyTable {
    let mut counts: BTreeMap<Technique, [usize; 11]> = Technique::ALL.iter().map(|&t| (t, [0; 11])).collect();
    for r in reports {
        let row = counts.get_mut(&r.technique).expect("all techniques present");
        for e in &r.per_node {
            row[band_of(e, r.n_total)] += 1;
        }
    }
    AccuracyTable { counts }
}

pub const SUMMARY_ROWS: [&str; 7] = [
    "Nodes most accurate",
    "Nodes least accurate",
    "Nodes ranked in upper half",
    "Nodes ranked in lower half",
    "Problems with only accurate nodes",
    "Problems majority nodes deceived",
    "Best on problems",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    /// `rows[i][technique]` in `SUMMARY_ROWS` order.
    pub rows: Vec<BTreeMap<Technique, usize>>,
    pub total_nodes: usize,
    pub total_problems: usize,
}

impl SummaryTable {
    pub fn get(&self, row: usize, t: Technique) -> usize {
        self.rows[row].get(&t).copied().unwrap_or(0)
    }
}

const TIE_EPS: f64 = 1e-9;

/// Ties for most or least accurate credit every tied technique. A problem
/// counts as "best" for a technique that is most accurate on a strict
/// majority of its nodes, and as "deceived" when a strict majority of its
/// nodes sit in the lower half.
pub fn summary_table(reports: &[RankErrorReport]) -> SummaryTable {
    let mut rows: Vec<BTreeMap<Technique, usize>> =
        (0..SUMMARY_ROWS.len()).map(|_| Technique::ALL.iter().map(|&t| (t, 0)).collect()).collect();
    let mut by_problem: BTreeMap<&str, Vec<&RankErrorReport>> = BTreeMap::new();
    for r in reports {
        by_problem.entry(r.problem.as_str()).or_default().push(r);
    }
    let mut total_nodes = 0;
    for group in by_problem.values() {
        let k = group.iter().map(|r| r.per_node.len()).max().unwrap_or(0);
        total_nodes += k;
        let mut most: BTreeMap<Technique, usize> = BTreeMap::new();
        for i in 0..k {
            let pcts: Vec<(Technique, f64)> = group
                .iter()
                .filter_map(|r| r.per_node.get(i).map(|e| (r.technique, e.accuracy_pct(r.n_total))))
                .collect();
            let best = pcts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let worst = pcts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            for &(t, p) in &pcts {
                if (p - best).abs() <= TIE_EPS {
                    *rows[0].get_mut(&t).unwrap() += 1;
                    *most.entry(t).or_insert(0) += 1;
                }
                if (p - worst).abs() <= TIE_EPS {
                    *rows[1].get_mut(&t).unwrap() += 1;
                }
            }
        }
        for r in group {
            let upper = r.per_node.iter().filter(|e| e.upper_half).count();
            let lower = r.per_node.len() - upper;
            *rows[2].get_mut(&r.technique).unwrap() += upper;
            *rows[3].get_mut(&r.technique).unwrap() += lower;
            if lower == 0 && upper > 0 {
                *rows[4].get_mut(&r.technique).unwrap() += 1;
            }
            if 2 * lower > r.per_node.len() {
                *rows[5].get_mut(&r.technique).unwrap() += 1;
            }
            if 2 * most.get(&r.technique).copied().unwrap_or(0) > r.per_node.len() {
                *rows[6].get_mut(&r.technique).unwrap() += 1;
            }
        }
    }
    SummaryTable { rows, total_nodes, total_problems: by_problem.len() }
}
