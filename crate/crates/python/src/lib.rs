//! Python bindings: programs, test suites, the four localisation
//! techniques and corpus evaluation.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use perfloc::corpus;
use perfloc::evaluation::{self, BootstrapConfig};
use perfloc::interpreter::{self, TestCase, DEFAULT_TIMEOUT_FACTOR};
use perfloc::minilang::{self, NodeId};
use perfloc::mutation::{self, MutationConfig, Technique};
use perfloc::{pipeline, profiler, report};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed MiniLang program. Immutable; edits return new programs.
#[pyclass(name = "Program", module = "perfloc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProgram {
    inner: minilang::Program,
}

#[pymethods]
impl PyProgram {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        minilang::parse(source).map(|inner| PyProgram { inner }).map_err(value_err)
    }

    fn render(&self) -> String {
        minilang::render(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &PyProgram) -> bool {
        self.inner.to_trees() == other.inner.to_trees()
    }

    fn __repr__(&self) -> String {
        format!("Program({} nodes, {} functions)", self.inner.len(), self.inner.function_count())
    }

    /// `(id, kind, source)` per node in breadth-first order.
    fn nodes(&self) -> Vec<(usize, String, String)> {
        self.inner
            .nodes()
            .iter()
            .map(|n| (n.id.index(), n.kind.name().to_string(), minilang::render_inline(&self.inner.subtree(n.id))))
            .collect()
    }

    /// Statement ids in breadth-first order.
    fn statements(&self) -> Vec<usize> {
        minilang::enumerate_nodes(&self.inner, Some(minilang::Category::Statement)).iter().map(|n| n.index()).collect()
    }

    /// `(node, reason)` for every static violation; empty when compilable.
    fn static_check(&self) -> Vec<(usize, String)> {
        minilang::static_check(&self.inner).into_iter().map(|v| (v.node.index(), format!("{:?}", v.reason))).collect()
    }

    fn delete_statement(&self, node: usize) -> PyResult<PyProgram> {
        minilang::delete_statement(&self.inner, NodeId(node)).map(|d| PyProgram { inner: d.program }).map_err(value_err)
    }

    /// Puts a copy of `donor`'s subtree `donor_node` in place of `target`.
    fn replace_node(&self, target: usize, donor: &PyProgram, donor_node: usize) -> PyResult<PyProgram> {
        if donor.inner.get(NodeId(donor_node)).is_none() {
            return Err(value_err(format!("donor node {donor_node} does not exist")));
        }
        let tree = donor.inner.subtree(NodeId(donor_node));
        minilang::replace_node(&self.inner, NodeId(target), &tree).map(|inner| PyProgram { inner }).map_err(value_err)
    }

    /// Donor texts of every single-node replacement of `target`.
    fn replacements(&self, target: usize) -> Vec<String> {
        mutation::generate_replacements(&self.inner, NodeId(target)).iter().map(|d| d.donor_text()).collect()
    }
}

fn get_ints(d: &Bound<'_, PyDict>, key: &str) -> PyResult<Vec<i64>> {
    match d.get_item(key)? {
        Some(v) => v.extract(),
        None => Ok(Vec::new()),
    }
}

fn to_suite(tests: Vec<Bound<'_, PyDict>>) -> PyResult<Vec<TestCase>> {
    tests
        .iter()
        .map(|d| {
            Ok(TestCase {
                input_array: get_ints(d, "input")?,
                extra_args: get_ints(d, "args")?,
                expected_output: get_ints(d, "expected")?,
            })
        })
        .collect()
}

fn from_suite<'py>(py: Python<'py>, suite: &[TestCase]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    suite
        .iter()
        .map(|t| {
            let d = PyDict::new(py);
            d.set_item("input", &t.input_array)?;
            d.set_item("args", &t.extra_args)?;
            d.set_item("expected", &t.expected_output)?;
            Ok(d)
        })
        .collect()
}

fn technique(name: &str) -> PyResult<Technique> {
    name.parse().map_err(value_err)
}

fn config(timeout_factor: f64, hint_include_correct: bool) -> PyResult<MutationConfig> {
    if timeout_factor.is_nan() || timeout_factor <= 1.0 {
        return Err(value_err("timeout_factor must be > 1"));
    }
    Ok(MutationConfig { timeout_factor, hint_include_correct })
}

#[pyfunction]
fn parse(source: &str) -> PyResult<PyProgram> {
    PyProgram::new(source)
}

/// The 30-case sort suite for `seed`, as dicts with `input`, `args` and
/// `expected` keys.
#[pyfunction]
fn generate_tests(py: Python<'_>, seed: u64) -> PyResult<Vec<Bound<'_, PyDict>>> {
    from_suite(py, &corpus::generate_tests(seed))
}

/// Runs one test: `(status, steps, final_array or None)`.
#[pyfunction]
fn execute(program: &PyProgram, test: Bound<'_, PyDict>, step_limit: u64) -> PyResult<(String, u64, Option<Vec<i64>>)> {
    let t = to_suite(vec![test])?.remove(0);
    let o = interpreter::execute(&program.inner, &t, step_limit).map_err(value_err)?;
    let status = match o.status {
        interpreter::Status::Completed => "Completed".to_string(),
        interpreter::Status::Timeout => "Timeout".to_string(),
        interpreter::Status::RuntimeError(k) => format!("{k:?}"),
    };
    Ok((status, o.steps, o.final_array))
}

/// `(node, count, score)` per node.
#[pyfunction]
fn profile(program: &PyProgram, suite: Vec<Bound<'_, PyDict>>) -> PyResult<Vec<(usize, u64, f64)>> {
    let suite = to_suite(suite)?;
    let r = profiler::profile(&program.inner, &suite).map_err(value_err)?;
    let scores = profiler::profile_ranking(&r);
    Ok(scores.iter().map(|s| (s.node.index(), r.node_scores[s.node.index()], s.value)).collect())
}

/// Node scores and the variant log of one technique, as CSV text in the
/// same format the command line writes: `(nodes_csv, variants_csv)`.
#[pyfunction]
#[pyo3(signature = (program, suite, technique_name, timeout_factor = DEFAULT_TIMEOUT_FACTOR, hint_include_correct = false))]
fn localize(
    py: Python<'_>,
    program: &PyProgram,
    suite: Vec<Bound<'_, PyDict>>,
    technique_name: &str,
    timeout_factor: f64,
    hint_include_correct: bool,
) -> PyResult<(String, String)> {
    let suite = to_suite(suite)?;
    let t = technique(technique_name)?;
    let cfg = config(timeout_factor, hint_include_correct)?;
    let p = &program.inner;
    let (scores, records) = py
        .detach(|| -> Result<_, interpreter::InterpError> {
            Ok(match t {
                Technique::Profiler => (profiler::profile_ranking(&profiler::profile(p, &suite)?), Vec::new()),
                Technique::Deletion => {
                    let r = mutation::deletion_analysis(p, &suite, &cfg)?;
                    (r.scores.clone(), r.records())
                }
                Technique::Exhaustive => {
                    let r = mutation::exhaustive_analysis(p, &suite, &cfg)?;
                    (r.scores.clone(), r.records())
                }
                Technique::Combined => {
                    let r = mutation::combined_analysis(p, &suite, &cfg)?;
                    (r.scores.clone(), r.records())
                }
            })
        })
        .map_err(value_err)?;
    let mut variants = Vec::new();
    report::write_variants(&mut variants, &records).map_err(value_err)?;
    Ok((report::nodes_csv(p, &scores), String::from_utf8(variants).expect("csv is utf-8")))
}

/// Fractional ranks, 1 = highest value.
#[pyfunction]
fn fractional_rank(values: Vec<f64>) -> Vec<f64> {
    evaluation::fractional_rank_values(&values).ranks
}

/// `(mean_diff, ci_low, ci_high)` of the paired differences `a - b`.
#[pyfunction]
#[pyo3(signature = (a, b, seed = 0, inner = 100, outer = 100, q_low = 0.025, q_high = 0.975))]
fn bootstrap_diff(
    a: Vec<f64>,
    b: Vec<f64>,
    seed: u64,
    inner: usize,
    outer: usize,
    q_low: f64,
    q_high: f64,
) -> PyResult<(f64, f64, f64)> {
    let cfg = BootstrapConfig { inner, outer, seed, q_low, q_high };
    let r = evaluation::bootstrap_diff(&a, &b, &cfg).map_err(value_err)?;
    Ok((r.mean_diff, r.ci_low, r.ci_high))
}

/// Checks a corpus directory; returns the corpus table as CSV text.
#[pyfunction]
fn validate(corpus_dir: PathBuf) -> PyResult<String> {
    let summaries = corpus::validate_corpus(&corpus_dir).map_err(value_err)?;
    let mut buf = Vec::new();
    report::write_corpus(&mut buf, &summaries).map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

/// Every technique over a corpus. Returns `{file name: CSV text}` for the
/// accuracy, summary, bootstrap, cost, rank-error and corpus tables.
#[pyfunction]
#[pyo3(signature = (corpus_dir, seed = 0, timeout_factor = DEFAULT_TIMEOUT_FACTOR, hint_include_correct = false))]
fn evaluate<'py>(
    py: Python<'py>,
    corpus_dir: PathBuf,
    seed: u64,
    timeout_factor: f64,
    hint_include_correct: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(timeout_factor, hint_include_correct)?;
    let specs = corpus::load_corpus(&corpus_dir).map_err(value_err)?;
    let boot = BootstrapConfig { seed, ..BootstrapConfig::default() };
    let run = py.detach(|| pipeline::evaluate(&specs, &cfg, &boot)).map_err(value_err)?;
    let summaries: Vec<_> = run.problems.iter().map(|p| p.summary.clone()).collect();
    let mut tables: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut emit = |name, f: &dyn Fn(&mut Vec<u8>) -> report::CsvResult<()>| -> PyResult<()> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(value_err)?;
        tables.push((name, buf));
        Ok(())
    };
    emit("accuracy.csv", &|w| report::write_accuracy(w, &run.accuracy))?;
    emit("summary.csv", &|w| report::write_summary(w, &run.summary))?;
    emit("bootstrap.csv", &|w| report::write_bootstrap(w, &run.bootstrap))?;
    emit("cost.csv", &|w| report::write_cost(w, &run.problems))?;
    emit("rank_errors.csv", &|w| report::write_rank_errors(w, &run.problems))?;
    emit("corpus.csv", &|w| report::write_corpus(w, &summaries))?;
    let out = PyDict::new(py);
    for (name, buf) in tables {
        out.set_item(name, String::from_utf8(buf).expect("csv is utf-8"))?;
    }
    Ok(out)
}

#[pymodule]
#[pyo3(name = "perfloc")]
fn perfloc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("CORPUS_FORMAT", corpus::CORPUS_FORMAT)?;
    m.add("TECHNIQUES", Technique::ALL.iter().map(|t| t.flag()).collect::<Vec<_>>())?;
    m.add_class::<PyProgram>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(generate_tests, m)?)?;
    m.add_function(wrap_pyfunction!(execute, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(localize, m)?)?;
    m.add_function(wrap_pyfunction!(fractional_rank, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_diff, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
