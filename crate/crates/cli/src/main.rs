use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use perfloc::corpus::{generate_tests, load_corpus, validate_corpus, CORPUS_FORMAT};
use perfloc::evaluation::BootstrapConfig;
use perfloc::interpreter::{InterpError, TestCase, DEFAULT_TIMEOUT_FACTOR};
use perfloc::mutation::{
    combined_analysis, deletion_analysis, exhaustive_analysis, AnalysisReport, MutationConfig, Technique,
};
use perfloc::pipeline::{run_problem, tabulate};
use perfloc::profiler::{profile, profile_ranking};
use perfloc::{parse, report, Program};

// Kept in step with CORPUS_FORMAT; checked at startup.
const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (corpus format 1)");

#[derive(Parser)]
#[command(name = "perfloc", version = VERSION, about = "Localise performance-improvement opportunities in MiniLang programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Statement execution counts: CSV `node_id,kind,count,score`.
    Profile {
        program: PathBuf,
        #[arg(long)]
        tests: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank every node with one technique; writes nodes.csv and variants.csv.
    Localize {
        program: PathBuf,
        #[arg(long)]
        tests: PathBuf,
        #[arg(long, value_parser = parse_technique)]
        technique: Technique,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run all techniques over a corpus and write the comparison tables.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, env = "PERFLOC_SEED", default_value_t = 0)]
        seed: u64,
        /// Bootstrap CI quantiles, `low,high`.
        #[arg(long, value_parser = parse_quantiles, default_value = "0.025,0.975")]
        ci_quantiles: (f64, f64),
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check every corpus invariant; prints the corpus table.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Print a generated sort test suite as JSON.
    GenTests {
        #[arg(long, env = "PERFLOC_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Worker threads for variant evaluation (default: all cores).
    #[arg(long, value_parser = parse_jobs)]
    jobs: Option<usize>,
    #[arg(long, value_parser = parse_timeout_factor, default_value_t = DEFAULT_TIMEOUT_FACTOR)]
    timeout_factor: f64,
    /// Also count correct-and-cheaper variants as reductions.
    #[arg(long)]
    hint_include_correct: bool,
}

impl RunArgs {
    fn config(&self) -> MutationConfig {
        MutationConfig { timeout_factor: self.timeout_factor, hint_include_correct: self.hint_include_correct }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            b = b.num_threads(j);
        }
        Ok(b.build()?)
    }
}

fn parse_technique(s: &str) -> Result<Technique, String> {
    s.parse()
}

fn parse_jobs(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err("jobs must be an integer >= 1".into()),
    }
}

fn parse_timeout_factor(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(f) if f > 1.0 && f.is_finite() => Ok(f),
        _ => Err("timeout factor must be a number > 1".into()),
    }
}

fn parse_quantiles(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `low,high`")?;
    let lo: f64 = lo.trim().parse().map_err(|_| "bad low quantile")?;
    let hi: f64 = hi.trim().parse().map_err(|_| "bad high quantile")?;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err("quantiles must satisfy 0 <= low <= high <= 1".into());
    }
    Ok((lo, hi))
}

fn read_program(path: &Path) -> Result<Program> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&src).with_context(|| format!("parsing {}", path.display()))
}

fn read_suite(path: &Path) -> Result<Vec<TestCase>> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_profile(program: &Path, tests: &Path, out: Option<&Path>) -> Result<()> {
    let p = read_program(program)?;
    let suite = read_suite(tests)?;
    let r = profile(&p, &suite)?;
    let scores = profile_ranking(&r);
    report::write_profile(output(out)?, &p, &r, &scores)?;
    Ok(())
}

fn cmd_localize(program: &Path, tests: &Path, technique: Technique, out: &Path, run: &RunArgs) -> Result<()> {
    let p = read_program(program)?;
    let suite = read_suite(tests)?;
    let cfg = run.config();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    eprintln!("localize: {} with {technique} over {} tests", program.display(), suite.len());
    let analysis = |f: fn(&Program, &[TestCase], &MutationConfig) -> Result<AnalysisReport, InterpError>| {
        run.pool().map(|pool| pool.install(|| f(&p, &suite, &cfg)))
    };
    let (scores, records) = match technique {
        Technique::Profiler => (profile_ranking(&profile(&p, &suite)?), Vec::new()),
        Technique::Deletion => {
            let r = analysis(deletion_analysis)??;
            (r.scores.clone(), r.records())
        }
        Technique::Exhaustive => {
            let r = analysis(exhaustive_analysis)??;
            (r.scores.clone(), r.records())
        }
        Technique::Combined => {
            let r = analysis(combined_analysis)??;
            (r.scores.clone(), r.records())
        }
    };
    report::write_nodes(create(&out.join("nodes.csv"))?, &p, &scores)?;
    report::write_variants(create(&out.join("variants.csv"))?, &records)?;
    eprintln!("localize: wrote {} nodes and {} variants to {}", scores.len(), records.len(), out.display());
    Ok(())
}

fn cmd_evaluate(corpus: &Path, out: &Path, seed: u64, q: (f64, f64), run: &RunArgs) -> Result<()> {
    let specs = load_corpus(corpus)?;
    let cfg = run.config();
    let pool = run.pool()?;
    let mut problems = Vec::with_capacity(specs.len());
    for s in &specs {
        eprintln!("evaluate: {} ({} nodes)", s.name(), s.original.len());
        problems.push(pool.install(|| run_problem(s, &cfg))?);
    }
    let boot = BootstrapConfig { seed, q_low: q.0, q_high: q.1, ..BootstrapConfig::default() };
    let run = tabulate(problems, &boot)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    report::write_accuracy(create(&out.join("accuracy.csv"))?, &run.accuracy)?;
    report::write_summary(create(&out.join("summary.csv"))?, &run.summary)?;
    report::write_bootstrap(create(&out.join("bootstrap.csv"))?, &run.bootstrap)?;
    report::write_cost(create(&out.join("cost.csv"))?, &run.problems)?;
    report::write_rank_errors(create(&out.join("rank_errors.csv"))?, &run.problems)?;
    let summaries: Vec<_> = run.problems.iter().map(|p| p.summary.clone()).collect();
    report::write_corpus(create(&out.join("corpus.csv"))?, &summaries)?;
    eprintln!("evaluate: wrote tables for {} problems to {}", run.problems.len(), out.display());
    Ok(())
}

fn cmd_validate(corpus: &Path) -> Result<()> {
    let summaries = validate_corpus(corpus)?;
    report::write_corpus(io::stdout().lock(), &summaries)?;
    eprintln!("validate: {} problems valid", summaries.len());
    Ok(())
}

fn cmd_gen_tests(seed: u64, out: Option<&Path>) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, &generate_tests(seed))?;
    writeln!(w)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Profile { program, tests, out } => cmd_profile(&program, &tests, out.as_deref()),
        Command::Localize { program, tests, technique, out, run } => {
            cmd_localize(&program, &tests, technique, &out, &run)
        }
        Command::Evaluate { corpus, out, seed, ci_quantiles, run } => {
            cmd_evaluate(&corpus, &out, seed, ci_quantiles, &run)
        }
        Command::Validate { corpus } => cmd_validate(&corpus),
        Command::GenTests { seed, out } => cmd_gen_tests(seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    debug_assert!(VERSION.ends_with(&format!("format {CORPUS_FORMAT})")));
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("perfloc: {e:#}");
            ExitCode::from(1)
        }
    }
}
