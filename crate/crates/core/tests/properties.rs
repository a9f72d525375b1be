use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::OnceLock;

use proptest::prelude::*;

use perfloc::corpus::{generate_tests, load_corpus, ProblemSpec};
use perfloc::evaluation::{
    band_of, bootstrap_diff, fractional_rank_values, percent_rank_error, BootstrapConfig, ImprovementAnnotation,
    LOWER_HALF_BAND,
};
use perfloc::interpreter::{
    execute, run_suite, ExecutionOutcome, RuntimeErrorKind, Status, SuiteResult, TestCase, MIN_LIMIT,
};
use perfloc::minilang::{delete_statement, enumerate_nodes, render, static_check, Category, NodeId, Program};
use perfloc::mutation::{
    classify_variant, generate_replacements, MutationDescriptor, Technique, Variant, VariantClass,
};
use perfloc::parse;

fn corpus() -> &'static [ProblemSpec] {
    static CORPUS: OnceLock<Vec<ProblemSpec>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
        load_corpus(&root).expect("corpus loads")
    })
}

fn annotation(nodes: impl IntoIterator<Item = usize>) -> ImprovementAnnotation {
    ImprovementAnnotation { problem: "p".into(), nodes: nodes.into_iter().map(NodeId).collect(), improvement_pct: 0.0 }
}

/// Values drawn from a small set so ties are common.
fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..6).prop_map(|v| f64::from(v) / 5.0), 1..80)
}

proptest! {
    #[test]
    fn ranks_sum_to_triangular_number(v in values()) {
        let r = fractional_rank_values(&v);
        let n = v.len() as f64;
        let sum: f64 = r.ranks.iter().sum();
        prop_assert!((sum - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn ranks_follow_values(v in values()) {
        let r = fractional_rank_values(&v);
        for i in 0..v.len() {
            prop_assert!(r.ranks[i] >= 1.0 && r.ranks[i] <= v.len() as f64);
            for j in 0..v.len() {
                if v[i] > v[j] {
                    prop_assert!(r.ranks[i] < r.ranks[j]);
                } else if v[i] == v[j] {
                    prop_assert_eq!(r.ranks[i], r.ranks[j]);
                }
            }
        }
    }

    #[test]
    fn perfect_ranking_has_zero_error(n in 1usize..150, k_frac in 0.0f64..1.0) {
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        // The first k nodes are the improvement nodes and score highest.
        let v: Vec<f64> = (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
        let rep = percent_rank_error(&fractional_rank_values(&v), &annotation(0..k), Technique::Profiler).unwrap();
        for e in &rep.per_node {
            prop_assert_eq!(e.error, 0.0);
        }
    }

    #[test]
    fn worst_single_node(n in 2usize..150, at in 0usize..150) {
        let at = at % n;
        let v: Vec<f64> = (0..n).map(|i| if i == at { 0.0 } else { 1.0 }).collect();
        let rep = percent_rank_error(&fractional_rank_values(&v), &annotation([at]), Technique::Profiler).unwrap();
        let want = (n as f64 - 1.0) / n as f64;
        prop_assert!((rep.per_node[0].error - want).abs() < 1e-12);
        prop_assert!(!rep.per_node[0].upper_half);
    }

    #[test]
    fn raising_a_node_never_worsens_its_error(mut v in values(), at in 0usize..80, bump in 0.0f64..1.0) {
        let at = at % v.len();
        let ann = annotation([at]);
        let before = percent_rank_error(&fractional_rank_values(&v), &ann, Technique::Deletion).unwrap();
        v[at] += bump;
        let after = percent_rank_error(&fractional_rank_values(&v), &ann, Technique::Deletion).unwrap();
        prop_assert!(after.per_node[0].error <= before.per_node[0].error);
    }

    #[test]
    fn bands_agree_with_halves(v in values(), picks in prop::collection::btree_set(0usize..80, 1..10)) {
        let nodes: BTreeSet<usize> = picks.into_iter().filter(|&p| p < v.len()).collect();
        prop_assume!(!nodes.is_empty());
        let rep = percent_rank_error(&fractional_rank_values(&v), &annotation(nodes), Technique::Combined).unwrap();
        for e in &rep.per_node {
            let band = band_of(e, rep.n_total);
            prop_assert_eq!(e.upper_half, band < LOWER_HALF_BAND, "{:?} band {}", e, band);
            let pct = e.accuracy_pct(rep.n_total);
            prop_assert!(pct > 0.0 && pct <= 100.0);
        }
    }

    #[test]
    fn bootstrap_is_seeded_and_antisymmetric(
        pairs in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 1..40),
        seed in any::<u64>(),
    ) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let cfg = BootstrapConfig { seed, inner: 30, outer: 40, ..BootstrapConfig::default() };
        let ab = bootstrap_diff(&a, &b, &cfg).unwrap();
        prop_assert_eq!(ab, bootstrap_diff(&a, &b, &cfg).unwrap());
        prop_assert!(ab.ci_low <= ab.mean_diff && ab.mean_diff <= ab.ci_high);
        let ba = bootstrap_diff(&b, &a, &cfg).unwrap();
        prop_assert!((ab.mean_diff + ba.mean_diff).abs() < 1e-9);
        prop_assert!((ab.ci_low + ba.ci_high).abs() < 1e-9);
        prop_assert!((ab.ci_high + ba.ci_low).abs() < 1e-9);
        let same = bootstrap_diff(&a, &a, &cfg).unwrap();
        prop_assert_eq!((same.mean_diff, same.ci_low, same.ci_high), (0.0, 0.0, 0.0));
    }
}

fn outcome(status: u8, steps: u64) -> ExecutionOutcome {
    let status = match status {
        0 => Status::Completed,
        1 => Status::Timeout,
        2 => Status::RuntimeError(RuntimeErrorKind::IndexOutOfBounds),
        _ => Status::RuntimeError(RuntimeErrorKind::DivideByZero),
    };
    let final_array = (status == Status::Completed).then(Vec::new);
    ExecutionOutcome { status, steps, final_array }
}

fn suite_result(tests: &[(u8, u64, bool)]) -> SuiteResult {
    SuiteResult {
        total_cost: tests.iter().map(|t| t.1).sum(),
        correct: tests.iter().filter(|t| t.0 == 0 && t.2).count(),
        per_test: tests.iter().map(|t| outcome(t.0, t.1)).collect(),
    }
}

proptest! {
    #[test]
    fn classification_follows_precedence(
        tests in prop::collection::vec((0u8..4, 0u64..50, any::<bool>()), 1..6),
        orig_costs in prop::collection::vec(1u64..50, 6),
        compiled in any::<bool>(),
    ) {
        let n = tests.len();
        let original = suite_result(&orig_costs[..n].iter().map(|&c| (0, c, true)).collect::<Vec<_>>());
        let out = suite_result(&tests);
        let v = Variant {
            descriptor: MutationDescriptor::delete(NodeId(1)),
            compiled,
            outcome: compiled.then(|| out.clone()),
            class: VariantClass::NotCompilable,
        };
        let class = classify_variant(&original, &v);
        let expected = if !compiled {
            VariantClass::NotCompilable
        } else if tests.iter().any(|t| t.0 == 1) {
            VariantClass::InfiniteLoop
        } else if tests.iter().any(|t| t.0 >= 2) {
            VariantClass::RuntimeErrorDiffers
        } else if out.total_cost < original.total_cost {
            VariantClass::LessExpensive
        } else if out.correct < original.correct {
            VariantClass::FunctionallyDegraded
        } else if out.total_cost > original.total_cost {
            VariantClass::MoreExpensive
        } else {
            VariantClass::Identical
        };
        prop_assert_eq!(class, expected);
        prop_assert_eq!(VariantClass::ALL.iter().filter(|&&c| c == class).count(), 1);
    }
}

fn problem() -> impl Strategy<Value = &'static ProblemSpec> {
    (0..corpus().len()).prop_map(|i| &corpus()[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutants_round_trip_and_leave_the_original_alone(spec in problem(), pick in any::<prop::sample::Index>(), d in any::<prop::sample::Index>()) {
        let p = &spec.original;
        let before = render(p);
        let nodes = enumerate_nodes(p, None);
        let target = nodes[pick.index(nodes.len())];
        let donors = generate_replacements(p, target);
        prop_assume!(!donors.is_empty());
        let m = donors[d.index(donors.len())].apply(p).unwrap();
        prop_assert_eq!(render(p), before);
        let ids: Vec<usize> = m.nodes().iter().map(|n| n.id.index()).collect();
        prop_assert_eq!(ids, (0..m.len()).collect::<Vec<_>>());
        let back = parse(&render(&m)).unwrap();
        prop_assert_eq!(back.to_trees(), m.to_trees());
    }

    #[test]
    fn deletions_keep_ids_dense(spec in problem(), pick in any::<prop::sample::Index>()) {
        let p = &spec.original;
        let stmts: Vec<NodeId> =
            enumerate_nodes(p, Some(Category::Statement)).into_iter().filter(|&s| !p.is_function_body(s)).collect();
        let s = stmts[pick.index(stmts.len())];
        let d = delete_statement(p, s).unwrap();
        prop_assert_eq!(d.program.len(), p.len() - p.subtree_ids(s).len());
        for (old, new) in d.mapping.iter().enumerate().filter_map(|(o, n)| n.map(|n| (o, n))) {
            prop_assert_eq!(p.kind(NodeId(old)).label(), d.program.kind(new).label());
        }
        // Static checking is deterministic and sorted by node.
        let v = static_check(&d.program);
        prop_assert_eq!(&v, &static_check(&d.program));
        prop_assert!(v.windows(2).all(|w| w[0].node <= w[1].node));
    }

    #[test]
    fn timeouts_stop_exactly_at_the_limit(spec in problem(), t in any::<prop::sample::Index>(), limit in 1u64..3000) {
        let test = &spec.suite[t.index(spec.suite.len())];
        let o = execute(&spec.original, test, limit).unwrap();
        prop_assert!(o.steps <= limit);
        prop_assert_eq!(o.status == Status::Timeout, o.steps == limit && o.final_array.is_none());
        prop_assert_eq!(&o, &execute(&spec.original, test, limit).unwrap());
    }

    #[test]
    fn dropping_a_test_never_raises_suite_cost(spec in problem(), drop in any::<prop::sample::Index>()) {
        let limits = vec![1_000_000; spec.suite.len()];
        let full = run_suite(&spec.original, &spec.suite, &limits).unwrap();
        let i = drop.index(spec.suite.len());
        let mut fewer: Vec<TestCase> = spec.suite.clone();
        fewer.remove(i);
        let part = run_suite(&spec.original, &fewer, &limits[1..]).unwrap();
        prop_assert!(part.total_cost <= full.total_cost);
        prop_assert_eq!(part.total_cost + full.per_test[i].steps, full.total_cost);
    }

    #[test]
    fn generated_suites_are_sorted_copies(seed in any::<u64>()) {
        let suite = generate_tests(seed);
        prop_assert_eq!(suite.len(), 30);
        prop_assert_eq!(&suite, &generate_tests(seed));
        for t in &suite {
            let mut want = t.input_array.clone();
            want.sort_unstable();
            prop_assert_eq!(&t.expected_output, &want);
            prop_assert_eq!(&t.extra_args, &vec![t.input_array.len() as i64]);
            prop_assert!(t.input_array.iter().all(|&x| (0..=99).contains(&x)));
        }
    }
}

#[test]
fn originals_sort_every_generated_input() {
    for spec in corpus() {
        for seed in [1u64, 99] {
            for t in generate_tests(seed) {
                let o = execute(&spec.original, &t, 10_000_000).unwrap();
                let mut want = t.input_array.clone();
                want.sort_unstable();
                assert_eq!(o.final_array.as_ref(), Some(&want), "{} on {:?}", spec.name(), t.input_array);
                assert!(o.steps >= 1);
            }
        }
    }
    const { assert!(MIN_LIMIT >= 1) };
}

#[test]
fn program_is_shareable() {
    fn send_sync<T: Send + Sync>() {}
    send_sync::<Program>();
}
