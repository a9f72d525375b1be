//! Corpus-wide evaluation: every technique on every problem, then the
//! accuracy, summary, bootstrap and cost tables.

use serde::Serialize;

use crate::corpus::{validate_problem, ProblemSpec, ProblemSummary};
use crate::evaluation::{
    accuracy_table, bootstrap_diff, fractional_rank, percent_rank_error, summary_table, AccuracyTable, BootstrapConfig,
    BootstrapResult, EvalError, RankErrorReport, SummaryTable,
};
use crate::interpreter::InterpError;
use crate::mutation::{
    combine_reports, deletion_analysis, exhaustive_analysis, AnalysisCost, MutationConfig, NodeScore, Technique,
};
use crate::profiler::{profile, profile_ranking};

/// Pairs compared by the bootstrap, as (a, b) with differences a - b.
pub const BOOTSTRAP_PAIRS: [(Technique, Technique); 3] = [
    (Technique::Deletion, Technique::Profiler),
    (Technique::Exhaustive, Technique::Deletion),
    (Technique::Combined, Technique::Exhaustive),
];

#[derive(Debug, Clone)]
pub struct TechniqueRun {
    pub technique: Technique,
    pub scores: Vec<NodeScore>,
    pub cost: AnalysisCost,
    pub errors: RankErrorReport,
}

#[derive(Debug, Clone)]
pub struct ProblemRun {
    pub summary: ProblemSummary,
    /// In `Technique::ALL` order.
    pub techniques: Vec<TechniqueRun>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapRow {
    pub a: Technique,
    pub b: Technique,
    pub result: BootstrapResult,
}

#[derive(Debug, Clone)]
pub struct EvaluationRun {
    pub problems: Vec<ProblemRun>,
    pub accuracy: AccuracyTable,
    pub summary: SummaryTable,
    pub bootstrap: Vec<BootstrapRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{problem}: {source}")]
    Interp { problem: String, source: InterpError },
    #[error("{problem}: {source}")]
    Eval { problem: String, source: EvalError },
    #[error("corpus invalid:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

/// All four techniques on one problem.
pub fn run_problem(spec: &ProblemSpec, cfg: &MutationConfig) -> Result<ProblemRun, PipelineError> {
    let problem = spec.name().to_string();
    let summary = validate_problem(spec).map_err(PipelineError::Invalid)?;
    let interp = |source| PipelineError::Interp { problem: problem.clone(), source };
    let p = &spec.original;
    let profiler = profile_ranking(&profile(p, &spec.suite).map_err(interp)?);
    let deletion = deletion_analysis(p, &spec.suite, cfg).map_err(interp)?;
    let exhaustive = exhaustive_analysis(p, &spec.suite, cfg).map_err(interp)?;
    let combined = combine_reports(p, &deletion, &exhaustive, cfg);
    let runs = [
        (Technique::Profiler, profiler, AnalysisCost::profiler()),
        (Technique::Deletion, deletion.scores, deletion.cost),
        (Technique::Exhaustive, exhaustive.scores, exhaustive.cost),
        (Technique::Combined, combined.scores, combined.cost),
    ];
    let techniques = runs
        .into_iter()
        .map(|(technique, scores, cost)| {
            let ranking = fractional_rank(&scores);
            let errors = percent_rank_error(&ranking, &spec.annotation, technique)
                .map_err(|source| PipelineError::Eval { problem: problem.clone(), source })?;
            Ok(TechniqueRun { technique, scores, cost, errors })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(ProblemRun { summary, techniques })
}

/// Improvement-node percentiles of one technique across the corpus, in
/// problem then node order.
pub fn percentiles(problems: &[ProblemRun], t: Technique) -> Vec<f64> {
    problems
        .iter()
        .flat_map(|p| p.techniques.iter().filter(|r| r.technique == t).flat_map(|r| r.errors.percentiles()))
        .collect()
}

pub fn evaluate(
    specs: &[ProblemSpec],
    cfg: &MutationConfig,
    boot: &BootstrapConfig,
) -> Result<EvaluationRun, PipelineError> {
    let problems = specs.iter().map(|s| run_problem(s, cfg)).collect::<Result<Vec<_>, _>>()?;
    tabulate(problems, boot)
}

pub fn tabulate(problems: Vec<ProblemRun>, boot: &BootstrapConfig) -> Result<EvaluationRun, PipelineError> {
    let reports: Vec<RankErrorReport> =
        problems.iter().flat_map(|p| p.techniques.iter().map(|t| t.errors.clone())).collect();
    let bootstrap = BOOTSTRAP_PAIRS
        .iter()
        .map(|&(a, b)| {
            let result = bootstrap_diff(&percentiles(&problems, a), &percentiles(&problems, b), boot)
                .map_err(|source| PipelineError::Eval { problem: "<corpus>".into(), source })?;
            Ok(BootstrapRow { a, b, result })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    Ok(EvaluationRun { accuracy: accuracy_table(&reports), summary: summary_table(&reports), bootstrap, problems })
}
