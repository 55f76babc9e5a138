//! Acceptance criteria. Runs every criterion, prints one line each, and
//! exits non-zero if any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ppq::bench::{fair_coin_kb, generate, nested_query, Family, FamilySpec};
use ppq::model::load_kb_file;
use ppq::verify::{
    brute_force, brute_force_marginal, random_case, random_kb, random_proposition, run_verify,
    trial_seeds, KbKind, VerifyConfig,
};
use ppq::{
    eliminate_redundant_negations, parse, predicted_call_bound, to_cn_form, EnumerationOracle,
    EvalConfig, EvalError, Evaluator, KnowledgeBase, Literal, Proposition, QueryExpr, Rule,
    SvOracle, SvQuery,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn data(name: &str) -> KnowledgeBase {
    load_kb_file(data_path(name)).unwrap()
}

fn data_path(name: &str) -> String {
    format!("{}/../core/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn no_cache() -> EvalConfig {
    EvalConfig::default().with_cache(false)
}

/// The 500 random (knowledge base, query) cases shared by criteria 5 and 8.
fn suite() -> Vec<(KnowledgeBase, QueryExpr)> {
    let cfg = VerifyConfig {
        n: 6,
        trials: 500,
        seed: 7,
        ..VerifyConfig::default()
    };
    trial_seeds(&cfg)
        .into_iter()
        .map(|s| random_case(s, &cfg))
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for (kind, label) in [(KbKind::Joint, "joint"), (KbKind::Network, "bn")] {
        let report = run_verify(&VerifyConfig {
            n: 6,
            trials: 500,
            seed: 7,
            kind,
            ..VerifyConfig::default()
        });
        pass &= report.passed() && report.max_deviation <= 1e-9 && report.comparisons > 0;
        details.push(format!(
            "{label}: {} comparisons, max deviation {:.1e}",
            report.comparisons, report.max_deviation
        ));
        if let Some(f) = report.first_failure {
            details.push(format!("first failure {} (case seed {})", f.query, f.trial_seed));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    outcome(pass, format!("{}; {:.2?}", details.join("; "), elapsed))
}

fn count_term_nodes(root: &ppq::DerivationNode, rule: Rule, expr: &str) -> usize {
    root.iter().filter(|n| n.rule == rule && n.expr == expr).count()
}

fn worked_example_query() -> Outcome {
    let kb = data("indep4.json");
    let q = parse("P(x1 | x2 given x3 | !x4)", &kb).unwrap();
    let term = "!x3 & x4";

    let off = Evaluator::new(&kb, EnumerationOracle, no_cache().with_trace(true))
        .eval_conditional(&q)
        .unwrap();
    let on = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default().with_trace(true))
        .eval_conditional(&q)
        .unwrap();
    let (off_trace, on_trace) = (off.trace.unwrap(), on.trace.unwrap());
    // a literal conjunction is evaluated at a ChainRuleFactor node whose
    // children are its oracle factors; those nodes are the leaves of the
    // reduction
    let off_leaves = count_term_nodes(&off_trace, Rule::ChainRuleFactor, term);
    let on_leaves = count_term_nodes(&on_trace, Rule::ChainRuleFactor, term);
    let on_hits = count_term_nodes(&on_trace, Rule::CacheHit, term);

    let pass = (off.value - 0.75).abs() <= 1e-12
        && off_leaves >= 2
        && on_leaves == 1
        && on_hits >= 1
        && on.stats.cache_hits >= 1
        && on.value == off.value;
    outcome(
        pass,
        format!(
            "value {} (cache on {}); `{term}` evaluated {off_leaves}x without cache, {on_leaves}x with cache plus {on_hits} cache hit(s); cache_hits {}",
            off.value, on.value, on.stats.cache_hits
        ),
    )
}

fn recurrence() -> Outcome {
    let start = Instant::now();
    let kb = fair_coin_kb(11);
    let mut calls = Vec::new();
    let mut bound_ok = true;
    for m in 3..=11 {
        let r = Evaluator::new(&kb, EnumerationOracle, no_cache())
            .eval_marginal(&nested_query(&kb, m))
            .unwrap();
        bound_ok &= r.stats.sv_calls <= r.stats.predicted_bound;
        calls.push(r.stats.sv_calls);
    }
    let ratios: Vec<f64> = calls.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let ratios_ok = ratios.iter().all(|r| (1.8..=2.2).contains(r));
    let elapsed = start.elapsed();
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    outcome(
        ratios_ok && bound_ok && elapsed < Duration::from_secs(10),
        format!(
            "nested m=3..11 calls {calls:?}; ratios [{}] (need all in [1.8, 2.2]: {}); calls <= m*2^q: {}; {:.2?}",
            shown.join(", "),
            if ratios_ok { "yes" } else { "no" },
            if bound_ok { "yes" } else { "no" },
            elapsed
        ),
    )
}

fn form_linearity() -> Outcome {
    let kb = fair_coin_kb(50);
    let calls = |family, m, r| {
        let target = generate(&kb, FamilySpec { family, m, r }).unwrap();
        let res = Evaluator::new(&kb, EnumerationOracle, no_cache()).eval_marginal(&target).unwrap();
        (res.stats.sv_calls, res.stats.m as u64)
    };
    let mut problems = Vec::new();
    for k in 2..=50 {
        for family in [Family::Form1, Family::Form2] {
            let (c, _) = calls(family, k, 0);
            if c != k as u64 {
                problems.push(format!("{family} k={k}: {c} calls"));
            }
        }
    }
    let r = 2;
    let mut worst: f64 = 0.0;
    for k in 2..=40 {
        for family in [Family::Form3, Family::Form4] {
            let (c, m) = calls(family, k, r);
            let bound = m * (1 << (r + 1));
            worst = worst.max(c as f64 / bound as f64);
            if c > bound {
                problems.push(format!("{family} k={k}: {c} > {bound}"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("form1/form2 exactly k calls for k=2..50; form3/form4 peak at {:.0}% of m*2^3", worst * 100.0)
        } else {
            problems.join("; ")
        },
    )
}

/// Enumerated probability of a printed conjunction (`true` when empty).
fn exact(kb: &KnowledgeBase, expr: &str) -> f64 {
    if expr == "true" {
        return 1.0;
    }
    brute_force_marginal(kb, &parse(expr, kb).unwrap().target)
}

fn step_four_identity(suite: &[(KnowledgeBase, QueryExpr)]) -> Outcome {
    let mut nodes = 0;
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for (kb, q) in suite {
        for cfg in [no_cache(), EvalConfig::default()] {
            let Ok(r) = Evaluator::new(kb, EnumerationOracle, cfg.with_trace(true)).eval_conditional(q) else {
                errors += 1;
                continue;
            };
            for n in r.trace.unwrap().iter().filter(|n| n.rule == Rule::NegElim) {
                nodes += 1;
                let diff = match n.children.as_slice() {
                    [r, ar] => {
                        let recorded = (n.value - (r.value - ar.value)).abs();
                        // and against the true probabilities of the printed subterms
                        let truth = exact(kb, &r.expr) - exact(kb, &ar.expr);
                        recorded.max((n.value - truth).abs())
                    }
                    _ => f64::INFINITY,
                };
                worst = worst.max(diff);
            }
        }
    }
    outcome(
        worst <= 1e-12 && nodes > 0 && errors == 0,
        format!("{nodes} NegElim nodes over {} queries, worst |value - (P(R) - P(A&R))| = {worst:.1e}, {errors} evaluation errors", suite.len()),
    )
}

fn complement_and_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_complement: f64 = 0.0;
    for i in 0..200 {
        let kind = if i % 2 == 0 { KbKind::Joint } else { KbKind::Network };
        let kb = random_kb(&mut rng, 6, kind, 3);
        let budget = rng.gen_range(1..=10);
        let s = random_proposition(&mut rng, &kb, 4, budget);
        let mut ev = Evaluator::new(&kb, EnumerationOracle, EvalConfig::default());
        let a = ev.eval_marginal(&s).unwrap().value;
        let b = ev.eval_marginal(&Proposition::not(s)).unwrap().value;
        worst_complement = worst_complement.max((a + b - 1.0).abs());
    }

    let mut worst_sum: f64 = 0.0;
    let mut checked = 0;
    while checked < 200 {
        let kind = if checked % 2 == 0 { KbKind::Joint } else { KbKind::Network };
        let kb = random_kb(&mut rng, 6, kind, 3);
        let target = rng.gen_range(0..kb.len());
        let mut evidence = Vec::new();
        for var in 0..kb.len() {
            if var != target && rng.gen_bool(0.4) {
                evidence.push(Literal::positive(var, rng.gen_range(0..kb.variable(var).domain_size())));
            }
        }
        let ev_prop = Proposition::And(evidence.iter().copied().map(Proposition::Lit).collect());
        if brute_force_marginal(&kb, &ev_prop) <= 0.0 {
            continue;
        }
        let total: f64 = (0..kb.variable(target).domain_size())
            .map(|v| {
                EnumerationOracle
                    .sv_prob(&kb, &SvQuery::new(Literal::positive(target, v), evidence.clone()))
                    .unwrap()
            })
            .sum();
        worst_sum = worst_sum.max((total - 1.0).abs());
        checked += 1;
    }
    outcome(
        worst_complement <= 1e-9 && worst_sum <= 1e-9,
        format!("max |P(S) + P(!S) - 1| = {worst_complement:.1e} over 200 S; max |sum_v P(X=v|E) - 1| = {worst_sum:.1e} over 200 (X, E)"),
    )
}

fn degenerate_handling() -> Outcome {
    let mut problems = Vec::new();

    let demo2 = data("demo2.json");
    let weather = data("weather.json");
    let contradictions = [
        (&demo2, "a & !a"),
        (&demo2, "b & a & !b"),
        (&demo2, "!(!a) & !a"),
        (&weather, "sky=clear & sky=cloudy"),
        (&weather, "sky!=clear & sky!=cloudy & sky!=overcast & rain"),
        (&weather, "wind=gale & wind!=gale"),
    ];
    for (kb, text) in contradictions {
        let q = parse(text, kb).unwrap();
        let r = Evaluator::new(kb, EnumerationOracle, no_cache()).eval_conditional(&q).unwrap();
        if r.value != 0.0 || r.stats.sv_calls != 0 {
            problems.push(format!("`{text}` gave {} with {} calls", r.value, r.stats.sv_calls));
        }
    }

    let q = parse("P(a given b & !b)", &demo2).unwrap();
    match Evaluator::new(&demo2, EnumerationOracle, no_cache()).eval_conditional(&q) {
        Err(EvalError::UndefinedConditional { .. }) => {}
        other => problems.push(format!("zero evidence gave {other:?}")),
    }
    let path = data_path("demo2.json");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ppq::cli::run(["ppq", "eval", &path, "P(a given b & !b)"], &mut out, &mut err);
    if code != 2 {
        problems.push(format!("cli exit {code} on zero evidence"));
    }

    let indep4 = data("indep4.json");
    for (kb, text, plain) in [(&indep4, "!!x1", "x1"), (&demo2, "!(!(a & b))", "a & b")] {
        let q = parse(text, kb).unwrap();
        let once = eliminate_redundant_negations(&to_cn_form(&q.target));
        let twice = eliminate_redundant_negations(&to_cn_form(&once));
        let expected = parse(plain, kb).unwrap().target.display(kb).to_string();
        let has_not = |p: &Proposition| format!("{p:?}").contains("Not(");
        if once != twice || has_not(&once) || once.display(kb).to_string() != expected {
            problems.push(format!("`{text}` normalized to `{}`", once.display(kb)));
        }
        let v = Evaluator::new(kb, EnumerationOracle, no_cache()).eval_conditional(&q).unwrap().value;
        let truth = brute_force(kb, &q).unwrap();
        if (v - truth).abs() > 1e-12 {
            problems.push(format!("`{text}` = {v}, expected {truth}"));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "6 contradictions -> 0 with 0 calls; zero evidence -> undefined (exit 2); !!x1 and !(!(a & b)) normalize in one pass".to_string()
        } else {
            problems.join("; ")
        },
    )
}

fn cache_parity(suite: &[(KnowledgeBase, QueryExpr)]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    let (mut calls_on, mut calls_off) = (0, 0);
    for (kb, q) in suite {
        let off = Evaluator::new(kb, EnumerationOracle, no_cache()).eval_conditional(q);
        let on = Evaluator::new(kb, EnumerationOracle, EvalConfig::default()).eval_conditional(q);
        match (off, on) {
            (Ok(off), Ok(on)) => {
                worst = worst.max((off.value - on.value).abs());
                calls_on += on.stats.sv_calls;
                calls_off += off.stats.sv_calls;
                if on.stats.sv_calls > off.stats.sv_calls {
                    problems.push(format!("{}: {} calls with cache, {} without", q.display(kb), on.stats.sv_calls, off.stats.sv_calls));
                }
            }
            (off, on) => problems.push(format!("{}: {off:?} vs {on:?}", q.display(kb))),
        }
    }
    outcome(
        worst <= 1e-12 && problems.is_empty(),
        format!(
            "{} queries, max |on - off| = {worst:.1e}, total calls {calls_on} with cache vs {calls_off} without{}",
            suite.len(),
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    // keep the bound helper honest against the stated formula
    assert_eq!(predicted_call_bound(4, 1).unwrap(), 8);

    let suite = suite();
    let criteria: Vec<(&str, Check)> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("worked example query", Box::new(worked_example_query)),
        ("nested call growth", Box::new(recurrence)),
        ("form linearity", Box::new(form_linearity)),
        ("step-4 identity", Box::new(|| step_four_identity(&suite))),
        ("complement and normalization", Box::new(complement_and_normalization)),
        ("degenerate handling", Box::new(degenerate_handling)),
        ("cache parity", Box::new(|| cache_parity(&suite))),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
