//! Acceptance checks, one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always print; exits non-zero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use perfloc::corpus::{load_corpus, validate_corpus, ProblemSpec};
use perfloc::evaluation::{
    bootstrap_diff, fractional_rank, fractional_rank_values, percent_rank_error, BootstrapConfig,
    ImprovementAnnotation, BANDS, SUMMARY_ROWS,
};
use perfloc::interpreter::Baseline;
use perfloc::minilang::{
    delete_statement, enumerate_nodes, replace_node, static_check, Category, NodeId, Program, ViolationReason,
};
use perfloc::mutation::{
    combine_reports, deletion_analysis, evaluate_variant, exhaustive_analysis, generate_replacements, recompute_scores,
    AnalysisReport, MutationConfig, MutationDescriptor, Technique, VariantClass,
};
use perfloc::pipeline::{percentiles, run_problem, tabulate, EvaluationRun, ProblemRun};
use perfloc::profiler::{profile, profile_ranking};
use perfloc::report;

type Outcome = Result<String, Vec<String>>;

struct Analyses {
    deletion: AnalysisReport,
    exhaustive: AnalysisReport,
    combined: AnalysisReport,
}

struct Ctx {
    specs: Vec<ProblemSpec>,
    cfg: MutationConfig,
    analyses: Vec<Analyses>,
    deletion_time: Duration,
    exhaustive_time: Duration,
}

fn corpus_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn spec<'a>(ctx: &'a Ctx, name: &str) -> (usize, &'a ProblemSpec) {
    ctx.specs.iter().enumerate().find(|(_, s)| s.name() == name).expect("problem present")
}

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

fn finish(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(failures)
    }
}

/// for-h, for-i, for-j and the if of the BubbleLoops source.
fn bubble_statements(p: &Program) -> [NodeId; 4] {
    let s = enumerate_nodes(p, Some(Category::Statement));
    [s[1], s[2], s[3], s[4]]
}

fn c1_bubbleloops(ctx: &Ctx) -> Outcome {
    let start = Instant::now();
    let (i, bl) = spec(ctx, "BubbleLoops");
    let p = &bl.original;
    let mut f = Vec::new();
    let kinds: Vec<&str> = enumerate_nodes(p, Some(Category::Statement)).iter().map(|&n| p.kind(n).name()).collect();
    check(&mut f, kinds == ["Block", "For", "For", "For", "If", "VarDecl", "Assign", "Assign"], || {
        format!("statement enumeration {kinds:?}")
    });
    check(&mut f, bl.suite.len() == 30, || format!("suite has {} tests", bl.suite.len()));
    let [h, fi, j, iff] = bubble_statements(p);
    let prof = profile_ranking(&profile(p, &bl.suite).expect("profile"));
    let (ph, pj) = (prof[h.index()].value, prof[j.index()].value);
    check(&mut f, ph <= 0.02, || format!("profiler for-h share {ph:.4} > 0.02"));
    check(&mut f, pj >= 10.0 * ph, || format!("profiler for-j {pj:.4} < 10 x for-h {ph:.4}"));
    let del = &ctx.analyses[i].deletion.scores;
    let sv = [h, fi, j, iff].map(|n| del[n.index()].value);
    check(&mut f, sv[0] >= 0.95, || format!("savings(for-h) = {:.4}", sv[0]));
    check(&mut f, sv.windows(2).all(|w| w[0] >= w[1]), || format!("savings not ordered: {sv:?}"));
    let elapsed = start.elapsed() + ctx.deletion_time;
    check(&mut f, elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"));
    finish(
        f,
        format!(
            "profiler for-h {ph:.4}, for-j {pj:.4}; savings h/i/j/if = {:.4}/{:.4}/{:.4}/{:.4}",
            sv[0], sv[1], sv[2], sv[3]
        ),
    )
}

fn c2_cumulativity(ctx: &Ctx) -> Outcome {
    let mut f = Vec::new();
    let mut pairs = 0;
    for (s, a) in ctx.specs.iter().zip(&ctx.analyses) {
        let p = &s.original;
        let scores = &a.deletion.scores;
        let class: BTreeMap<NodeId, VariantClass> = a.deletion.records().iter().map(|r| (r.target, r.class)).collect();
        let scored: Vec<NodeId> = enumerate_nodes(p, Some(Category::Statement))
            .into_iter()
            .filter(|n| scores[n.index()].n_compiled == 1)
            .collect();
        for &anc in &scored {
            for &desc in &scored {
                if anc != desc && p.is_ancestor(anc, desc) {
                    pairs += 1;
                    let (x, y) = (scores[anc.index()].value, scores[desc.index()].value);
                    check(&mut f, x >= y, || {
                        format!(
                            "{}: savings({anc}, {}) = {x:.4} < savings({desc}, {}) = {y:.4}",
                            s.name(),
                            class[&anc],
                            class[&desc]
                        )
                    });
                }
            }
        }
    }
    let t = ctx.deletion_time;
    check(&mut f, t < Duration::from_secs(120), || format!("deletion over the corpus took {t:?}"));
    let n = f.len();
    finish(f, format!("{pairs} ancestor/descendant pairs, deletion corpus-wide in {t:.2?}")).map_err(|mut e| {
        e.push(format!("{n} of {pairs} pairs violate"));
        e
    })
}

fn c3_eq_integrity(ctx: &Ctx) -> Outcome {
    let mut f = Vec::new();
    let mut nodes = 0;
    for (s, a) in ctx.specs.iter().zip(&ctx.analyses) {
        let p = &s.original;
        for (rep, technique) in [(&a.exhaustive, Technique::Exhaustive), (&a.combined, Technique::Combined)] {
            for sc in &rep.scores {
                if technique == Technique::Exhaustive || !sc.gap_filled {
                    nodes += 1;
                    let want = if sc.n_compiled > 0 { sc.n_reduced as f64 / sc.n_compiled as f64 } else { 0.0 };
                    let exact =
                        sc.value == want && (sc.value * sc.n_compiled as f64 - sc.n_reduced as f64).abs() < 1e-12;
                    check(&mut f, exact && (0.0..=1.0).contains(&sc.value), || {
                        format!(
                            "{} {technique} node {}: {} vs {}/{}",
                            s.name(),
                            sc.node,
                            sc.value,
                            sc.n_reduced,
                            sc.n_compiled
                        )
                    });
                }
            }
            let mut log = Vec::new();
            report::write_variants(&mut log, &rep.records()).expect("write log");
            let back = report::read_variants(log.as_slice()).expect("read log");
            let again = recompute_scores(p, technique, &back, rep.original.total_cost, ctx.cfg.hint_include_correct);
            check(&mut f, report::nodes_csv(p, &again) == report::nodes_csv(p, &rep.scores), || {
                format!("{} {technique}: nodes.csv differs after recomputing from variants.csv", s.name())
            });
        }
    }
    finish(f, format!("{nodes} exhaustive node scores checked; nodes.csv reproduced from every variant log"))
}

fn c4_partition(ctx: &Ctx) -> Outcome {
    let mut f = Vec::new();
    let mut total = 0;
    let mut selfs = 0;
    for (s, a) in ctx.specs.iter().zip(&ctx.analyses) {
        for rep in [&a.deletion, &a.exhaustive, &a.combined] {
            let mut log = Vec::new();
            report::write_variants(&mut log, &rep.records()).expect("write log");
            let back = report::read_variants(log.as_slice()).expect("read log");
            let mut counts: BTreeMap<VariantClass, usize> = BTreeMap::new();
            for r in &back {
                *counts.entry(r.class).or_default() += 1;
            }
            let sum: usize = counts.values().sum();
            total += sum;
            check(&mut f, sum == rep.cost.variants_generated && sum == rep.variants.len(), || {
                format!(
                    "{} {}: classes sum to {sum}, generated {}",
                    s.name(),
                    rep.technique,
                    rep.cost.variants_generated
                )
            });
        }
        let p = &s.original;
        let baseline = Baseline::measure(p, &s.suite, ctx.cfg.timeout_factor).expect("baseline");
        for n in enumerate_nodes(p, None) {
            selfs += 1;
            let v = evaluate_variant(p, &s.suite, &baseline, MutationDescriptor::replace(n, p.subtree(n)));
            check(&mut f, v.class == VariantClass::Identical, || {
                format!("{}: self-replacement of node {n} is {}", s.name(), v.class)
            });
        }
    }
    finish(f, format!("{total} logged variants partitioned; {selfs} self-replacements all Identical"))
}

fn c5_ranking(run: &EvaluationRun) -> Outcome {
    let start = Instant::now();
    let mut f = Vec::new();
    let mut reports = 0;
    for pr in &run.problems {
        for t in &pr.techniques {
            reports += 1;
            let r = fractional_rank(&t.scores);
            let n = r.n_total as f64;
            let sum: f64 = r.ranks.iter().sum();
            check(&mut f, (sum - n * (n + 1.0) / 2.0).abs() < 1e-9, || {
                format!("{} {}: rank sum {sum}", pr.summary.name, t.technique)
            });
        }
    }
    let tie = fractional_rank_values(&[0.9, 0.9, 0.1]);
    check(&mut f, tie.ranks == [1.5, 1.5, 3.0], || format!("tie ranks {:?}", tie.ranks));
    let ann = |nodes: &[usize]| ImprovementAnnotation {
        problem: "law".into(),
        nodes: nodes.iter().map(|&n| NodeId(n)).collect(),
        improvement_pct: 0.0,
    };
    for n in 2..=200usize {
        let perfect: Vec<f64> = (0..n).map(|i| if i < 2.min(n) { 1.0 } else { 0.0 }).collect();
        let e = percent_rank_error(&fractional_rank_values(&perfect), &ann(&[0, 1]), Technique::Profiler).unwrap();
        check(&mut f, e.per_node.iter().all(|x| x.error == 0.0), || format!("perfect ranking error nonzero at N={n}"));
        let worst: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect();
        let e = percent_rank_error(&fractional_rank_values(&worst), &ann(&[0]), Technique::Profiler).unwrap();
        let want = (n as f64 - 1.0) / n as f64;
        check(&mut f, (e.per_node[0].error - want).abs() < 1e-12, || {
            format!("worst case at N={n}: {}", e.per_node[0].error)
        });
    }
    let t = start.elapsed();
    check(&mut f, t < Duration::from_secs(1), || format!("took {t:?}"));
    finish(f, format!("{reports} reports sum to N(N+1)/2; tie 1.5/1.5; error 0 and (N-1)/N laws; {t:.2?}"))
}

fn c6_bootstrap(ctx: &Ctx, run: &EvaluationRun) -> Outcome {
    let mut f = Vec::new();
    let boot = BootstrapConfig { seed: 20, ..BootstrapConfig::default() };
    for t in Technique::ALL {
        let x = percentiles(&run.problems, t);
        let r = bootstrap_diff(&x, &x, &boot).expect("bootstrap");
        check(&mut f, (r.mean_diff, r.ci_low, r.ci_high) == (0.0, 0.0, 0.0), || format!("{t} vs itself: {r:?}"));
    }
    let again = tabulate(run.problems.clone(), &BootstrapConfig::default()).expect("tabulate");
    check(
        &mut f,
        serde_json::to_string(&again.bootstrap).unwrap() == serde_json::to_string(&run.bootstrap).unwrap(),
        || "bootstrap differs between runs".into(),
    );
    let mut per_jobs = Vec::new();
    for jobs in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("pool");
        let problems: Vec<ProblemRun> =
            pool.install(|| ctx.specs.iter().map(|s| run_problem(s, &ctx.cfg).expect("run")).collect());
        let run = tabulate(problems, &BootstrapConfig::default()).expect("tabulate");
        let mut bytes = Vec::new();
        report::write_bootstrap(&mut bytes, &run.bootstrap).unwrap();
        report::write_rank_errors(&mut bytes, &run.problems).unwrap();
        per_jobs.push(bytes);
    }
    check(&mut f, per_jobs[0] == per_jobs[1], || "bootstrap or rank errors differ between 1 and 4 jobs".into());
    let rows: Vec<String> = run
        .bootstrap
        .iter()
        .map(|b| format!("{}-{} {:.2} [{:.2}, {:.2}]", b.a, b.b, b.result.mean_diff, b.result.ci_low, b.result.ci_high))
        .collect();
    finish(f, format!("self-comparisons 0 [0,0]; identical across runs and jobs 1/4; {}", rows.join("; ")))
}

fn c7_corpus(ctx: &Ctx) -> Outcome {
    let mut f = Vec::new();
    let summaries = match validate_corpus(&corpus_root()) {
        Ok(s) => s,
        Err(e) => return Err(vec![e.to_string()]),
    };
    check(&mut f, summaries.len() == 11, || format!("{} problems", summaries.len()));
    let mut cmp = Vec::new();
    for s in &summaries {
        for i in &s.improved {
            check(&mut f, i.correctness == 1.0 && i.cost < s.original_cost, || {
                format!(
                    "{} improved-{}: correctness {}, cost {} vs {}",
                    s.name, i.k, i.correctness, i.cost, s.original_cost
                )
            });
        }
        if let Some(d) = s.improved.first() {
            cmp.push(format!("{} {:.1}/{:.0}", s.name, d.reduction_pct, s.reference_pct));
        }
    }
    let (_, bl) = spec(ctx, "BubbleLoops");
    let (_, bs) = spec(ctx, "Bubblesort");
    let [h, i, _, _] = bubble_statements(&bl.original);
    let unwrapped = replace_node(&bl.original, h, &bl.original.subtree(i)).expect("replace");
    check(&mut f, unwrapped.to_trees() == bs.original.to_trees(), || {
        "BubbleLoops minus outer loop != Bubblesort".into()
    });
    // Deleting `int k = a[j];` leaves later uses of k undeclared.
    let decl_k = enumerate_nodes(&bl.original, Some(Category::Statement))[5];
    let v = static_check(&delete_statement(&bl.original, decl_k).expect("delete").program);
    check(&mut f, v.first().map(|x| x.reason) == Some(ViolationReason::UndeclaredIdentifier), || format!("{v:?}"));
    finish(f, format!("reduction measured/reference %: {}", cmp.join(", ")))
}

fn c8_trend(ctx: &Ctx, run: &EvaluationRun) -> Outcome {
    let mut f = Vec::new();
    let (i, bl) = spec(ctx, "BubbleLoops");
    let p = &bl.original;
    let [h, inner, _, _] = bubble_statements(p);
    let outer = |n: NodeId| p.is_ancestor(h, n) && !p.is_ancestor(inner, n);
    let pr = &run.problems[i];
    for t in &pr.techniques {
        let lower: Vec<NodeId> = t.errors.per_node.iter().filter(|e| !e.upper_half).map(|e| e.node).collect();
        match t.technique {
            Technique::Deletion | Technique::Combined => check(&mut f, lower.is_empty(), || {
                format!("{} ranks BubbleLoops improvement nodes {lower:?} in the lower half", t.technique)
            }),
            Technique::Profiler => {
                let outer_nodes: Vec<_> = t.errors.per_node.iter().filter(|e| outer(e.node)).collect();
                check(&mut f, !outer_nodes.is_empty(), || "no outer-loop improvement nodes".into());
                let missed: Vec<NodeId> = outer_nodes.iter().filter(|e| e.upper_half).map(|e| e.node).collect();
                check(&mut f, missed.is_empty(), || {
                    format!("profiler ranks outer-loop nodes {missed:?} in the upper half")
                });
            }
            Technique::Exhaustive => {}
        }
    }
    let shaped = run.accuracy.counts.len() == 4
        && run.summary.rows.len() == SUMMARY_ROWS.len()
        && run.accuracy.counts.values().all(|c| c.len() == BANDS.len());
    check(&mut f, shaped, || "accuracy/summary tables are not shaped for four techniques".into());
    let mut buf = Vec::new();
    report::write_accuracy(&mut buf, &run.accuracy).unwrap();
    report::write_summary(&mut buf, &run.summary).unwrap();
    check(&mut f, !buf.is_empty(), || "empty tables".into());
    let upper = run.summary.get(2, Technique::Combined);
    let lower = run.summary.get(3, Technique::Combined);
    let note =
        format!("combined corpus-wide: {upper} upper-half vs {lower} lower-half improvement nodes (reported only)");
    finish(f, note.clone()).map_err(|mut e| {
        e.push(note);
        e
    })
}

fn c9_cost(ctx: &Ctx, run: &EvaluationRun) -> Outcome {
    let mut f = Vec::new();
    for (s, (a, pr)) in ctx.specs.iter().zip(ctx.analyses.iter().zip(&run.problems)) {
        let p = &s.original;
        let stmts = enumerate_nodes(p, Some(Category::Statement)).len();
        let donors: usize = enumerate_nodes(p, None).into_iter().map(|n| generate_replacements(p, n).len()).sum();
        for t in &pr.techniques {
            match t.technique {
                Technique::Profiler => {
                    check(&mut f, t.cost.evaluations == 1, || format!("{}: profiler {:?}", s.name(), t.cost))
                }
                Technique::Deletion => check(&mut f, t.cost.executed <= stmts, || {
                    format!("{}: deletion executed {} > {stmts} statements", s.name(), t.cost.executed)
                }),
                Technique::Exhaustive => check(&mut f, t.cost.variants_generated == donors, || {
                    format!("{}: exhaustive generated {} != {donors} donors", s.name(), t.cost.variants_generated)
                }),
                Technique::Combined => {}
            }
        }
        check(&mut f, a.exhaustive.cost.variants_generated == donors, || format!("{}: direct run disagrees", s.name()));
    }
    let mut csv = Vec::new();
    report::write_cost(&mut csv, &run.problems).unwrap();
    let rows = String::from_utf8(csv).unwrap().lines().count();
    check(&mut f, rows == 1 + 4 * ctx.specs.len(), || format!("cost.csv has {rows} lines"));
    let t = ctx.exhaustive_time;
    check(&mut f, t < Duration::from_secs(30 * 60), || format!("exhaustive corpus run took {t:?}"));
    let generated: usize = ctx.analyses.iter().map(|a| a.exhaustive.cost.variants_generated).sum();
    finish(f, format!("{generated} exhaustive variants corpus-wide in {t:.2?}"))
}

fn main() -> ExitCode {
    let specs = load_corpus(&corpus_root()).expect("corpus loads");
    let cfg = MutationConfig::default();
    let mut analyses = Vec::new();
    let (mut deletion_time, mut exhaustive_time) = (Duration::ZERO, Duration::ZERO);
    for s in &specs {
        let t = Instant::now();
        let deletion = deletion_analysis(&s.original, &s.suite, &cfg).expect("deletion");
        deletion_time += t.elapsed();
        let t = Instant::now();
        let exhaustive = exhaustive_analysis(&s.original, &s.suite, &cfg).expect("exhaustive");
        exhaustive_time += t.elapsed();
        let combined = combine_reports(&s.original, &deletion, &exhaustive, &cfg);
        analyses.push(Analyses { deletion, exhaustive, combined });
    }
    let ctx = Ctx { specs, cfg, analyses, deletion_time, exhaustive_time };
    let problems: Vec<ProblemRun> = ctx.specs.iter().map(|s| run_problem(s, &ctx.cfg).expect("run")).collect();
    let run = tabulate(problems, &BootstrapConfig::default()).expect("tabulate");

    let results = [
        ("1 BubbleLoops motivating example", c1_bubbleloops(&ctx)),
        ("2 deletion cumulativity", c2_cumulativity(&ctx)),
        ("3 exhaustive quotient integrity", c3_eq_integrity(&ctx)),
        ("4 variant classification partition", c4_partition(&ctx)),
        ("5 ranking laws", c5_ranking(&run)),
        ("6 bootstrap sanity", c6_bootstrap(&ctx, &run)),
        ("7 corpus validity", c7_corpus(&ctx)),
        ("8 trend on BubbleLoops", c8_trend(&ctx, &run)),
        ("9 analysis-cost accounting", c9_cost(&ctx, &run)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(summary) => println!("PASS criterion {name}: {summary}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {}", why.join("; "));
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
