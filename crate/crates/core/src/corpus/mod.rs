//! Benchmark problems on disk, improvement-node annotation and test-suite
//! generation.
//!
//! Layout of one problem directory:
//!
//! ```text
//! corpus/<problem>/original.mini
//! corpus/<problem>/improved-<k>.mini     k = 1, 2, ...
//! corpus/<problem>/problem.json          name, notes, improvement_pct, designated, suite_seed
//! corpus/<problem>/suite.json            [{input, args, expected}, ...]
//! ```

mod diff;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::ImprovementAnnotation;
use crate::interpreter::{Baseline, Executable, TestCase, DEFAULT_TIMEOUT_FACTOR};
use crate::minilang::{parse, Program};

pub use diff::{diff_improvement_nodes, tree_edit, EditScript};

pub const SIZES: std::ops::RangeInclusive<usize> = 1..=10;
pub const MAX_RANDOM_VALUE: i64 = 99;
/// Version of the on-disk corpus layout.
pub const CORPUS_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("corpus invalid:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Sorted, reverse-sorted and seeded random arrays for every size, in
/// that order per size. Each test passes the array length as the extra
/// argument; expected outputs come from the standard library sort.
pub fn generate_tests(seed: u64) -> Vec<TestCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(SIZES.count() * 3);
    for n in SIZES {
        let sorted: Vec<i64> = (0..n as i64).collect();
        let reverse: Vec<i64> = sorted.iter().rev().copied().collect();
        let random: Vec<i64> = (0..n).map(|_| rng.random_range(0..=MAX_RANDOM_VALUE)).collect();
        for input in [sorted, reverse, random] {
            let mut expected = input.clone();
            expected.sort_unstable();
            out.push(TestCase { extra_args: vec![n as i64], input_array: input, expected_output: expected });
        }
    }
    out
}

/// Contents of `problem.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub name: String,
    pub notes: String,
    /// Reference improvement percentage, reported for comparison only.
    pub improvement_pct: f64,
    /// `k` of the `improved-<k>.mini` used for annotation.
    pub designated: usize,
    pub suite_seed: u64,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub dir: PathBuf,
    pub meta: ProblemMeta,
    pub original_source: String,
    pub original: Program,
    /// `(k, source, program)` sorted by `k`.
    pub improved: Vec<(usize, String, Program)>,
    pub annotation: ImprovementAnnotation,
    pub suite: Vec<TestCase>,
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn designated(&self) -> Option<&Program> {
        self.improved.iter().find(|i| i.0 == self.meta.designated).map(|i| &i.2)
    }
}

fn read(path: &Path, problems: &mut Vec<String>) -> Option<String> {
    match fs::read_to_string(path) {
        Ok(s) => Some(s),
        Err(e) => {
            problems.push(format!("{}: {e}", path.display()));
            None
        }
    }
}

fn parse_file(path: &Path, problems: &mut Vec<String>) -> Option<(String, Program)> {
    let src = read(path, problems)?;
    match parse(&src) {
        Ok(p) => Some((src, p)),
        Err(e) => {
            problems.push(format!("{}: {e}", path.display()));
            None
        }
    }
}

fn improved_files(dir: &Path) -> Vec<(usize, PathBuf)> {
    let mut out: Vec<(usize, PathBuf)> = fs::read_dir(dir)
        .into_iter()
        .flatten()
        .flatten()
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let k = name.strip_prefix("improved-")?.strip_suffix(".mini")?.parse().ok()?;
            Some((k, e.path()))
        })
        .collect();
    out.sort();
    out
}

/// Reads one problem directory. Only checks that every file is present
/// and well-formed; [`validate_problem`] checks the semantic invariants.
pub fn load_problem(dir: &Path) -> Result<ProblemSpec, CorpusError> {
    let mut problems = Vec::new();
    let meta: Option<ProblemMeta> = read(&dir.join("problem.json"), &mut problems).and_then(|s| {
        serde_json::from_str(&s).map_err(|e| problems.push(format!("{}: {e}", dir.join("problem.json").display()))).ok()
    });
    let original = parse_file(&dir.join("original.mini"), &mut problems);
    let suite: Option<Vec<TestCase>> = read(&dir.join("suite.json"), &mut problems).and_then(|s| {
        serde_json::from_str(&s).map_err(|e| problems.push(format!("{}: {e}", dir.join("suite.json").display()))).ok()
    });
    let files = improved_files(dir);
    if files.is_empty() {
        problems.push(format!("{}: no improved-<k>.mini files", dir.display()));
    }
    let improved: Vec<(usize, String, Program)> =
        files.iter().filter_map(|(k, path)| parse_file(path, &mut problems).map(|(s, p)| (*k, s, p))).collect();
    if let Some(meta) = &meta {
        if !files.iter().any(|f| f.0 == meta.designated) {
            problems.push(format!("{}: designated improved-{}.mini does not exist", dir.display(), meta.designated));
        }
    }
    match (meta, original, suite) {
        (Some(meta), Some((original_source, original)), Some(suite)) if problems.is_empty() => {
            let designated = improved.iter().find(|i| i.0 == meta.designated).expect("checked above");
            let annotation = ImprovementAnnotation {
                problem: meta.name.clone(),
                nodes: diff_improvement_nodes(&original, &designated.2),
                improvement_pct: meta.improvement_pct,
            };
            Ok(ProblemSpec { dir: dir.to_path_buf(), meta, original_source, original, improved, annotation, suite })
        }
        _ => Err(CorpusError::Invalid(problems)),
    }
}

/// Problem directories under `root`, sorted by directory name.
pub fn problem_dirs(root: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let entries =
        fs::read_dir(root).map_err(|e| CorpusError::Io { path: root.to_path_buf(), message: e.to_string() })?;
    let mut dirs: Vec<PathBuf> = entries.flatten().map(|e| e.path()).filter(|p| p.is_dir()).collect();
    dirs.sort();
    Ok(dirs)
}

pub fn load_corpus(root: &Path) -> Result<Vec<ProblemSpec>, CorpusError> {
    let mut specs = Vec::new();
    let mut problems = Vec::new();
    for dir in problem_dirs(root)? {
        match load_problem(&dir) {
            Ok(s) => specs.push(s),
            Err(CorpusError::Invalid(v)) => problems.extend(v),
            Err(e) => problems.push(e.to_string()),
        }
    }
    if specs.is_empty() && problems.is_empty() {
        problems.push(format!("{}: no problems found", root.display()));
    }
    if problems.is_empty() {
        Ok(specs)
    } else {
        Err(CorpusError::Invalid(problems))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovedSummary {
    pub k: usize,
    pub cost: u64,
    pub correctness: f64,
    /// Measured cost reduction, percent of the original's cost.
    pub reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSummary {
    pub name: String,
    pub nodes: usize,
    pub statements: usize,
    pub improvement_nodes: BTreeSet<usize>,
    pub original_cost: u64,
    pub improved: Vec<ImprovedSummary>,
    pub reference_pct: f64,
}

/// Semantic invariants of one problem; returns the measured summary or
/// every violated invariant.
pub fn validate_problem(spec: &ProblemSpec) -> Result<ProblemSummary, Vec<String>> {
    let name = spec.name().to_string();
    let mut problems = Vec::new();
    if spec.suite != generate_tests(spec.meta.suite_seed) {
        problems
            .push(format!("{name}: suite.json does not match the suite generated from seed {}", spec.meta.suite_seed));
    }
    if spec.suite.iter().any(|t| {
        let mut s = t.input_array.clone();
        s.sort_unstable();
        s != t.expected_output
    }) {
        problems.push(format!("{name}: suite.json has a wrong expected output"));
    }
    if spec.annotation.nodes.is_empty() {
        problems.push(format!("{name}: designated improvement does not differ from the original"));
    }
    let baseline = match Baseline::measure(&spec.original, &spec.suite, DEFAULT_TIMEOUT_FACTOR) {
        Ok(b) => Some(b),
        Err(e) => {
            problems.push(format!("{name}: original.mini: {e}"));
            None
        }
    };
    if let Some(b) = &baseline {
        if !b.result.fully_correct() {
            problems.push(format!("{name}: original.mini passes {}/{} tests", b.result.correct, b.result.tests()));
        }
    }
    let mut improved = Vec::new();
    for (k, _, p) in &spec.improved {
        let file = format!("{name}: improved-{k}.mini");
        let exe = match Executable::compile(p) {
            Ok(exe) => exe,
            Err(e) => {
                problems.push(format!("{file}: {e}"));
                continue;
            }
        };
        let Some(b) = &baseline else { continue };
        let r = match exe.run_suite(&spec.suite, &b.limits) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("{file}: {e}"));
                continue;
            }
        };
        if !r.fully_correct() {
            problems.push(format!("{file}: passes {}/{} tests", r.correct, r.tests()));
        }
        if r.total_cost >= b.cost() {
            problems.push(format!("{file}: cost {} is not below the original's {}", r.total_cost, b.cost()));
        }
        improved.push(ImprovedSummary {
            k: *k,
            cost: r.total_cost,
            correctness: r.correctness(),
            reduction_pct: 100.0 * (b.cost() as f64 - r.total_cost as f64) / b.cost() as f64,
        });
    }
    match baseline {
        Some(b) if problems.is_empty() => Ok(ProblemSummary {
            name,
            nodes: spec.original.len(),
            statements: spec.original.nodes().iter().filter(|n| n.kind.is_statement()).count(),
            improvement_nodes: spec.annotation.nodes.iter().map(|n| n.index()).collect(),
            original_cost: b.cost(),
            improved,
            reference_pct: spec.meta.improvement_pct,
        }),
        _ => Err(problems),
    }
}

/// Loads and checks every problem, reporting all violations at once.
pub fn validate_corpus(root: &Path) -> Result<Vec<ProblemSummary>, CorpusError> {
    let specs = load_corpus(root)?;
    let mut out = Vec::new();
    let mut problems = Vec::new();
    for s in &specs {
        match validate_problem(s) {
            Ok(summary) => out.push(summary),
            Err(v) => problems.extend(v),
        }
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(CorpusError::Invalid(problems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_deterministic_tests() {
        let s = generate_tests(3);
        assert_eq!(s.len(), 30);
        assert_eq!(s, generate_tests(3));
        assert_ne!(s, generate_tests(4));
        assert_eq!(s[0].input_array, s[1].input_array);
        let rev10 = &s[28];
        assert_eq!(rev10.input_array, vec![9, 8, 7, 6, 5, 4, 3, 2, 1, 0]);
        assert_eq!(rev10.expected_output, (0..10).collect::<Vec<i64>>());
        assert!(s.iter().all(|t| t.extra_args == vec![t.input_array.len() as i64]));
        assert!(s.iter().flat_map(|t| &t.input_array).all(|v| (0..=MAX_RANDOM_VALUE).contains(v)));
    }
}
