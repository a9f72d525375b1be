//! Deletion analysis, exhaustive first-order mutation and the combined
//! technique, plus the seven-way variant classifier.

mod analysis;
mod donors;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::interpreter::{SuiteResult, DEFAULT_TIMEOUT_FACTOR};
use crate::minilang::{delete_statement, render_inline, replace_node, EditError, NodeId, NodeKind, Program, Tree};

pub use analysis::{
    combine_reports, combined_analysis, deletion_analysis, evaluate_variant, exhaustive_analysis, recompute_scores,
    AnalysisReport, VariantRecord,
};
pub use donors::generate_replacements;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Technique {
    Profiler,
    Deletion,
    Exhaustive,
    Combined,
}

impl Technique {
    pub const ALL: [Technique; 4] =
        [Technique::Profiler, Technique::Deletion, Technique::Exhaustive, Technique::Combined];

    /// Name used on the command line.
    pub fn flag(self) -> &'static str {
        match self {
            Technique::Profiler => "profile",
            Technique::Deletion => "deletion",
            Technique::Exhaustive => "exhaustive",
            Technique::Combined => "combined",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technique::Profiler => "Profiler",
            Technique::Deletion => "Deletion",
            Technique::Exhaustive => "Exhaustive",
            Technique::Combined => "Combined",
        })
    }
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Technique::ALL
            .into_iter()
            .find(|t| t.flag().eq_ignore_ascii_case(s) || t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown technique `{s}` (expected profile, deletion, exhaustive or combined)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScore {
    pub node: NodeId,
    pub value: f64,
    pub n_reduced: usize,
    pub n_compiled: usize,
    pub source: Technique,
    pub gap_filled: bool,
}

impl NodeScore {
    pub fn new(node: NodeId, value: f64, source: Technique) -> Self {
        NodeScore { node, value, n_reduced: 0, n_compiled: 0, source, gap_filled: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MutationKind {
    Delete,
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationDescriptor {
    pub kind: MutationKind,
    /// Node in the original program.
    pub target: NodeId,
    /// Replacement subtree; operators are single `Operator` leaves.
    pub donor: Option<Tree>,
}

impl MutationDescriptor {
    pub fn delete(target: NodeId) -> Self {
        MutationDescriptor { kind: MutationKind::Delete, target, donor: None }
    }

    pub fn replace(target: NodeId, donor: Tree) -> Self {
        MutationDescriptor { kind: MutationKind::Replace, target, donor: Some(donor) }
    }

    pub fn apply(&self, p: &Program) -> Result<Program, EditError> {
        match (&self.kind, &self.donor) {
            (MutationKind::Delete, _) => delete_statement(p, self.target).map(|d| d.program),
            (MutationKind::Replace, Some(donor)) => replace_node(p, self.target, donor),
            (MutationKind::Replace, None) => Err(EditError::UnknownNode(self.target)),
        }
    }

    /// Single-line donor text as written to the variant log.
    pub fn donor_text(&self) -> String {
        match &self.donor {
            None => "<delete>".to_string(),
            Some(Tree { kind: NodeKind::Operator(op), .. }) => op.to_string(),
            Some(t) => render_inline(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariantClass {
    NotCompilable,
    InfiniteLoop,
    RuntimeErrorDiffers,
    FunctionallyDegraded,
    MoreExpensive,
    Identical,
    LessExpensive,
}

impl VariantClass {
    pub const ALL: [VariantClass; 7] = [
        VariantClass::NotCompilable,
        VariantClass::InfiniteLoop,
        VariantClass::RuntimeErrorDiffers,
        VariantClass::FunctionallyDegraded,
        VariantClass::MoreExpensive,
        VariantClass::Identical,
        VariantClass::LessExpensive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VariantClass::NotCompilable => "NotCompilable",
            VariantClass::InfiniteLoop => "InfiniteLoop",
            VariantClass::RuntimeErrorDiffers => "RuntimeErrorDiffers",
            VariantClass::FunctionallyDegraded => "FunctionallyDegraded",
            VariantClass::MoreExpensive => "MoreExpensive",
            VariantClass::Identical => "Identical",
            VariantClass::LessExpensive => "LessExpensive",
        }
    }
}

impl fmt::Display for VariantClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantClass::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown variant class `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub descriptor: MutationDescriptor,
    pub compiled: bool,
    /// Present iff `compiled`.
    pub outcome: Option<SuiteResult>,
    pub class: VariantClass,
}

impl Variant {
    pub fn cost(&self) -> Option<u64> {
        self.outcome.as_ref().map(|o| o.total_cost)
    }

    pub fn correctness(&self) -> Option<f64> {
        self.outcome.as_ref().map(SuiteResult::correctness)
    }
}

/// Precedence: NotCompilable, InfiniteLoop, RuntimeErrorDiffers,
/// LessExpensive, FunctionallyDegraded, MoreExpensive, Identical.
/// Cheaper-but-wrong variants are LessExpensive.
pub fn classify_variant(original: &SuiteResult, v: &Variant) -> VariantClass {
    let Some(out) = v.outcome.as_ref().filter(|_| v.compiled) else { return VariantClass::NotCompilable };
    if out.any_timeout() {
        return VariantClass::InfiniteLoop;
    }
    let new_error = out
        .per_test
        .iter()
        .enumerate()
        .any(|(i, o)| o.error_kind().is_some() && original.per_test.get(i).map(|b| b.status) != Some(o.status));
    if new_error {
        return VariantClass::RuntimeErrorDiffers;
    }
    if out.total_cost < original.total_cost {
        VariantClass::LessExpensive
    } else if out.correct < original.correct {
        VariantClass::FunctionallyDegraded
    } else if out.total_cost > original.total_cost {
        VariantClass::MoreExpensive
    } else {
        VariantClass::Identical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    pub timeout_factor: f64,
    /// Count correct-and-cheaper variants as reductions too.
    pub hint_include_correct: bool,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig { timeout_factor: DEFAULT_TIMEOUT_FACTOR, hint_include_correct: false }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisCost {
    pub variants_generated: usize,
    pub compiled: usize,
    pub executed: usize,
    /// Suite evaluations, the baseline run included.
    pub evaluations: usize,
}

impl AnalysisCost {
    /// Profiling costs a single evaluation.
    pub fn profiler() -> Self {
        AnalysisCost { evaluations: 1, ..AnalysisCost::default() }
    }
}

impl std::ops::Add for AnalysisCost {
    type Output = AnalysisCost;

    fn add(self, o: AnalysisCost) -> AnalysisCost {
        AnalysisCost {
            variants_generated: self.variants_generated + o.variants_generated,
            compiled: self.compiled + o.compiled,
            executed: self.executed + o.executed,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

/// Totals over a set of evaluated variants, plus one baseline evaluation.
pub fn analysis_cost(variants: &[Variant]) -> AnalysisCost {
    let compiled = variants.iter().filter(|v| v.compiled).count();
    AnalysisCost { variants_generated: variants.len(), compiled, executed: compiled, evaluations: compiled + 1 }
}
