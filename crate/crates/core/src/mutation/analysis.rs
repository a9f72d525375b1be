use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::donors::DonorPool;
use super::{
    analysis_cost, classify_variant, AnalysisCost, MutationConfig, MutationDescriptor, NodeScore, Technique, Variant,
    VariantClass,
};
use crate::interpreter::{Baseline, Executable, InterpError, SuiteResult, TestCase};
use crate::minilang::{enumerate_nodes, Category, NodeId, Program};

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub technique: Technique,
    /// One score per node, indexed by node id.
    pub scores: Vec<NodeScore>,
    pub variants: Vec<Variant>,
    pub cost: AnalysisCost,
    pub original: SuiteResult,
    /// Indices into `variants` of fully correct, cheaper variants.
    pub direct_improvements: Vec<usize>,
}

impl AnalysisReport {
    pub fn records(&self) -> Vec<VariantRecord> {
        self.variants.iter().map(VariantRecord::from).collect()
    }

    pub fn class_counts(&self) -> BTreeMap<VariantClass, usize> {
        let mut counts = BTreeMap::new();
        for v in &self.variants {
            *counts.entry(v.class).or_insert(0) += 1;
        }
        counts
    }
}

/// One row of the variant log. Scores are computed from these rows only,
/// so a persisted log reproduces the scores exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub target: NodeId,
    pub donor: String,
    pub class: VariantClass,
    pub cost: Option<u64>,
    pub correctness: Option<f64>,
}

impl VariantRecord {
    pub fn is_deletion(&self) -> bool {
        self.donor == "<delete>"
    }

    fn compiled(&self) -> bool {
        self.class != VariantClass::NotCompilable
    }

    fn cheaper(&self, original_cost: u64) -> bool {
        self.cost.is_some_and(|c| c < original_cost)
    }

    fn fully_correct(&self) -> bool {
        self.correctness == Some(1.0)
    }
}

impl From<&Variant> for VariantRecord {
    fn from(v: &Variant) -> Self {
        VariantRecord {
            target: v.descriptor.target,
            donor: v.descriptor.donor_text(),
            class: v.class,
            cost: v.cost(),
            correctness: v.correctness(),
        }
    }
}

fn evaluate_all(p: &Program, suite: &[TestCase], baseline: &Baseline, ds: Vec<MutationDescriptor>) -> Vec<Variant> {
    ds.into_par_iter().map(|d| evaluate_variant(p, suite, baseline, d)).collect()
}

/// Applies one mutation and runs the suite under the baseline's limits.
pub fn evaluate_variant(p: &Program, suite: &[TestCase], baseline: &Baseline, d: MutationDescriptor) -> Variant {
    let program = d.apply(p).expect("descriptors come from the same program");
    let outcome = match Executable::compile(&program) {
        Ok(exe) => Some(exe.run_suite(suite, &baseline.limits).expect("entry signature is preserved by mutation")),
        Err(_) => None,
    };
    let mut v = Variant { descriptor: d, compiled: outcome.is_some(), outcome, class: VariantClass::NotCompilable };
    v.class = classify_variant(&baseline.result, &v);
    v
}

fn report(
    technique: Technique,
    p: &Program,
    baseline: Baseline,
    variants: Vec<Variant>,
    cfg: &MutationConfig,
) -> AnalysisReport {
    let records: Vec<VariantRecord> = variants.iter().map(VariantRecord::from).collect();
    let scores = recompute_scores(p, technique, &records, baseline.cost(), cfg.hint_include_correct);
    let direct_improvements = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.class == VariantClass::LessExpensive && r.fully_correct())
        .map(|(i, _)| i)
        .collect();
    AnalysisReport {
        technique,
        scores,
        cost: analysis_cost(&variants),
        variants,
        original: baseline.result,
        direct_improvements,
    }
}

fn deletion_targets(p: &Program) -> Vec<MutationDescriptor> {
    enumerate_nodes(p, Some(Category::Statement))
        .into_iter()
        .filter(|&s| !p.is_function_body(s))
        .map(MutationDescriptor::delete)
        .collect()
}

fn replacement_targets(p: &Program) -> Vec<MutationDescriptor> {
    let pool = DonorPool::new(p);
    enumerate_nodes(p, None).into_iter().flat_map(|n| pool.replacements(p, n)).collect()
}

/// Removes each statement in breadth-first order and scores it by the
/// fraction of suite cost saved.
pub fn deletion_analysis(p: &Program, suite: &[TestCase], cfg: &MutationConfig) -> Result<AnalysisReport, InterpError> {
    let baseline = Baseline::measure(p, suite, cfg.timeout_factor)?;
    let variants = evaluate_all(p, suite, &baseline, deletion_targets(p));
    Ok(report(Technique::Deletion, p, baseline, variants, cfg))
}

/// Every first-order replacement of every node, scored by
/// `n_reduced / n_compiled`.
pub fn exhaustive_analysis(
    p: &Program,
    suite: &[TestCase],
    cfg: &MutationConfig,
) -> Result<AnalysisReport, InterpError> {
    let baseline = Baseline::measure(p, suite, cfg.timeout_factor)?;
    let variants = evaluate_all(p, suite, &baseline, replacement_targets(p));
    Ok(report(Technique::Exhaustive, p, baseline, variants, cfg))
}

/// Exhaustive scores, with deletion values filling nodes that produced
/// no compilable variant.
pub fn combined_analysis(p: &Program, suite: &[TestCase], cfg: &MutationConfig) -> Result<AnalysisReport, InterpError> {
    let baseline = Baseline::measure(p, suite, cfg.timeout_factor)?;
    let mut descriptors = deletion_targets(p);
    descriptors.extend(replacement_targets(p));
    let variants = evaluate_all(p, suite, &baseline, descriptors);
    Ok(report(Technique::Combined, p, baseline, variants, cfg))
}

/// The combined technique from already computed deletion and exhaustive
/// reports of the same program, without re-running any variant.
pub fn combine_reports(
    p: &Program,
    deletion: &AnalysisReport,
    exhaustive: &AnalysisReport,
    cfg: &MutationConfig,
) -> AnalysisReport {
    let variants: Vec<Variant> = deletion.variants.iter().chain(&exhaustive.variants).cloned().collect();
    let baseline_cost = deletion.original.total_cost;
    let records: Vec<VariantRecord> = variants.iter().map(VariantRecord::from).collect();
    let scores = recompute_scores(p, Technique::Combined, &records, baseline_cost, cfg.hint_include_correct);
    let offset = deletion.variants.len();
    let direct_improvements = deletion
        .direct_improvements
        .iter()
        .copied()
        .chain(exhaustive.direct_improvements.iter().map(|i| i + offset))
        .collect();
    AnalysisReport {
        technique: Technique::Combined,
        scores,
        cost: analysis_cost(&variants),
        variants,
        original: deletion.original.clone(),
        direct_improvements,
    }
}

/// Node scores from a variant log. Deletion rows feed deletion scoring,
/// replacement rows feed the exhaustive quotient.
pub fn recompute_scores(
    p: &Program,
    technique: Technique,
    records: &[VariantRecord],
    original_cost: u64,
    hint_include_correct: bool,
) -> Vec<NodeScore> {
    let (deletions, replacements): (Vec<&VariantRecord>, Vec<&VariantRecord>) =
        records.iter().partition(|r| r.is_deletion());
    match technique {
        Technique::Deletion => deletion_scores(p, &deletions, original_cost),
        Technique::Exhaustive => {
            eq1_scores(p, &replacements, original_cost, hint_include_correct, Technique::Exhaustive)
        }
        Technique::Combined => {
            let fill = deletion_scores(p, &deletions, original_cost);
            let mut scores = eq1_scores(p, &replacements, original_cost, hint_include_correct, Technique::Combined);
            for (s, f) in scores.iter_mut().zip(fill) {
                if s.n_compiled == 0 {
                    s.value = f.value;
                    s.gap_filled = true;
                }
            }
            scores
        }
        Technique::Profiler => panic!("profiler scores do not come from variants"),
    }
}

fn deletion_scores(p: &Program, deletions: &[&VariantRecord], original_cost: u64) -> Vec<NodeScore> {
    let mut own: Vec<Option<(f64, bool)>> = vec![None; p.len()];
    for r in deletions {
        if !r.compiled() {
            continue;
        }
        let savings = match (r.class, r.cost) {
            (VariantClass::InfiniteLoop, _) | (_, None) => 0.0,
            (_, Some(c)) => (original_cost.saturating_sub(c)) as f64 / original_cost.max(1) as f64,
        };
        own[r.target.index()] = Some((savings, r.cheaper(original_cost)));
    }
    // Ids are breadth-first, so a parent's value is final before its children.
    let mut scores: Vec<NodeScore> = Vec::with_capacity(p.len());
    for n in p.nodes() {
        let mut s = NodeScore::new(n.id, 0.0, Technique::Deletion);
        if let Some((savings, reduced)) = own[n.id.index()] {
            s.value = savings;
            s.n_compiled = 1;
            s.n_reduced = usize::from(reduced);
        } else if let Some(parent) = n.parent {
            s.value = scores[parent.index()].value;
        }
        scores.push(s);
    }
    scores
}

fn eq1_scores(
    p: &Program,
    replacements: &[&VariantRecord],
    original_cost: u64,
    hint_include_correct: bool,
    source: Technique,
) -> Vec<NodeScore> {
    let mut scores: Vec<NodeScore> = p.nodes().iter().map(|n| NodeScore::new(n.id, 0.0, source)).collect();
    for r in replacements {
        let s = &mut scores[r.target.index()];
        if r.compiled() {
            s.n_compiled += 1;
            if r.cheaper(original_cost) && (hint_include_correct || !r.fully_correct()) {
                s.n_reduced += 1;
            }
        }
    }
    for s in &mut scores {
        if s.n_compiled > 0 {
            s.value = s.n_reduced as f64 / s.n_compiled as f64;
        }
    }
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::{parse, NodeKind};

    fn sort_suite() -> Vec<TestCase> {
        [vec![3, 1, 2], vec![1, 2, 3], vec![5, 4, 3, 2, 1]]
            .into_iter()
            .map(|input| {
                let mut expected = input.clone();
                expected.sort();
                TestCase { extra_args: vec![input.len() as i64], input_array: input, expected_output: expected }
            })
            .collect()
    }

    const BUBBLE: &str = "void sort(int[] a, int length) {
        for (int i = 0; i < length; i++) {
            for (int j = 0; j < length - 1; j++) {
                if (a[j] > a[j + 1]) {
                    int k = a[j];
                    a[j] = a[j + 1];
                    a[j + 1] = k;
                }
            }
        }
    }";

    #[test]
    fn deletion_inherits_through_non_compilable_statements() {
        let p = parse(BUBBLE).unwrap();
        let r = deletion_analysis(&p, &sort_suite(), &MutationConfig::default()).unwrap();
        let find = |pred: &dyn Fn(&NodeKind) -> bool| p.nodes().iter().find(|n| pred(&n.kind)).unwrap().id;
        let decl_k = find(&|k| matches!(k, NodeKind::VarDecl { .. }));
        let if_stmt = find(&|k| matches!(k, NodeKind::If { .. }));
        assert_eq!(r.scores[decl_k.index()].n_compiled, 0);
        assert_eq!(r.scores[decl_k.index()].value, r.scores[if_stmt.index()].value);
        let outer = find(&|k| matches!(k, NodeKind::For { var } if var == "i"));
        assert!(r.scores[outer.index()].value > 0.9);
        assert!(r.cost.executed <= deletion_targets(&p).len());
        assert_eq!(r.cost.evaluations, r.cost.executed + 1);
    }

    #[test]
    fn exhaustive_scores_obey_eq1() {
        let p = parse(BUBBLE).unwrap();
        let r = exhaustive_analysis(&p, &sort_suite(), &MutationConfig::default()).unwrap();
        let total: usize = p.nodes().iter().map(|n| generate_count(&p, n.id)).sum();
        assert_eq!(r.variants.len(), total);
        for s in &r.scores {
            assert!((0.0..=1.0).contains(&s.value));
            assert_eq!(s.value * s.n_compiled as f64, s.n_reduced as f64);
        }
        let recomputed = recompute_scores(&p, Technique::Exhaustive, &r.records(), r.original.total_cost, false);
        assert_eq!(recomputed, r.scores);
    }

    fn generate_count(p: &Program, n: NodeId) -> usize {
        super::super::generate_replacements(p, n).len()
    }

    #[test]
    fn combined_fills_only_uncompiled_nodes() {
        let p = parse(BUBBLE).unwrap();
        let cfg = MutationConfig::default();
        let c = combined_analysis(&p, &sort_suite(), &cfg).unwrap();
        let e = exhaustive_analysis(&p, &sort_suite(), &cfg).unwrap();
        let d = deletion_analysis(&p, &sort_suite(), &cfg).unwrap();
        for ((cs, es), ds) in c.scores.iter().zip(&e.scores).zip(&d.scores) {
            if es.n_compiled == 0 {
                assert!(cs.gap_filled);
                assert_eq!(cs.value, ds.value);
            } else {
                assert!(!cs.gap_filled);
                assert_eq!(cs.value, es.value);
            }
        }
        assert_eq!(c.cost.variants_generated, d.cost.variants_generated + e.cost.variants_generated);
        let joined = combine_reports(&p, &d, &e, &cfg);
        assert_eq!(joined.scores, c.scores);
        assert_eq!(joined.cost, c.cost);
    }
}
