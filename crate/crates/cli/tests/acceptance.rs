//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mcdc_core::bdd::{lower, Node};
use mcdc_core::expr::{compile, normalize, parse, Expr, InputVector};
use mcdc_core::masking::{build_table, pseudo_terminals};
use mcdc_core::oracle::{
    differential_check, flip_covered, generate_suite, masking_lower_bound, random_expr, structural_corpus, CheckMode,
    CoveredOutcomes,
};
use mcdc_core::runtime::{execute, run_suite, CoverageAccumulator};
use mcdc_core::{Decision, Error, Strategy};

const FIVE: &str = "(x1 || x2) && (x3 || x4) && x5";

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn bits(s: &str) -> InputVector {
    InputVector::new(s.chars().map(|c| c == '1').collect())
}

fn corpus_small() -> Vec<String> {
    (1..=4).flat_map(structural_corpus).collect()
}

fn golden_masking_table() -> Verdict {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = mcdc_cli::run(["mcdc", "analyze", "(x1||x2)&&(x3||x4)&&x5"], &mut out, &mut err);
    let elapsed = start.elapsed();
    let text = String::from_utf8(out).unwrap();
    let table: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("edge")).collect();
    let expected = [
        "edge      masked conditions  bitmask",
        "(x2, x3)  x1                 10000",
        "(x4, x5)  x3                 00100",
        "(x4, 0)   x1, x2             11000",
        "(x5, 0)   x1, x2, x3, x4     11110",
    ];
    let ok = code == 0 && table == expected && elapsed < Duration::from_secs(1);
    verdict(ok, format!("rows={:?} elapsed={elapsed:?}", &table[1.min(table.len())..]))
}

fn golden_execution() -> Verdict {
    let d = Decision::compile(FIVE).unwrap();
    let r = execute(&d.bdd, &d.table, &bits("01001")).unwrap();
    let f = r.pre_mask_f.render(5);
    let t = r.pre_mask_t.render(5);
    let covered = r.covered();
    let ok = f == "10110" && t == "01000" && covered == vec![(3, false), (4, false)];
    verdict(ok, format!("f={f} t={t} covered={covered:?}"))
}

fn golden_three_or() -> Verdict {
    let d = Decision::compile("x1 || x2 || x3").unwrap();
    let x3 = d.table.get(3, true).iter().collect::<Vec<_>>();
    let x2 = d.table.get(2, true).iter().collect::<Vec<_>>();
    let ok = x3 == vec![1, 2] && x2 == vec![1] && d.bdd.successor(3, true) == Node::ONE;
    verdict(ok, format!("(x3,1)~{x3:?} (x2,1)~{x2:?}"))
}

fn differential_equivalence() -> Verdict {
    let start = Instant::now();
    let mut texts = corpus_small();
    let structural = texts.len();
    texts.extend((0..1000u64).map(|s| random_expr(s, 1 + (s as usize % 10))));
    let mut vectors = 0;
    let mut mismatches = 0;
    let mut first = None;
    for text in &texts {
        let d = Decision::compile(text).unwrap();
        let r = differential_check(&d.expr, &d.bdd, &d.table, &CheckMode::Exhaustive, Strategy::default()).unwrap();
        vectors += r.checked;
        mismatches += r.mismatches.len();
        if first.is_none() && !r.passed() {
            first = Some(text.clone());
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches == 0 && elapsed < Duration::from_secs(60);
    verdict(
        ok,
        format!(
            "{structural} structural + 1000 random decisions, {vectors} vectors, {mismatches} mismatches, {elapsed:?}{}",
            first.map(|t| format!(", first failing: {t}")).unwrap_or_default()
        ),
    )
}

fn structural_invariants() -> Verdict {
    let mut violations = 0;
    let corpus = corpus_small();
    for text in &corpus {
        violations += lower(&compile(text).unwrap()).validate().len();
    }
    let mut pairs = 0;
    let mut state = 0x2545_F491_4F6C_DD1Du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for k in 0..2000u64 {
        let n = 1 + (k as usize % 24);
        let e = compile(&random_expr(10_000 + k, n)).unwrap();
        let b = lower(&e);
        violations += b.validate().len();
        for _ in 0..50 {
            let raw = next();
            let v = InputVector::new((0..n).map(|i| raw >> i & 1 == 1).collect());
            let p = b.path(&v).unwrap();
            let ordered =
                p.edges.windows(2).all(|w| w[0].source < w[1].source && w[0].target == Node::Vertex(w[1].source));
            if !ordered || p.terminal != e.evaluate(&v).unwrap() {
                violations += 1;
            }
            pairs += 1;
        }
    }
    verdict(
        violations == 0,
        format!("{} corpus graphs, {pairs} (decision, vector) pairs, {violations} violations", corpus.len()),
    )
}

fn de_morgan() -> Verdict {
    let mut violations = 0;
    for s in 0..1000u64 {
        let parsed = parse(&random_expr(20_000 + s, 1 + (s as usize % 16))).unwrap();
        let plain = lower(&normalize(&parsed).unwrap());
        let negated = lower(&normalize(&Expr::Not(Box::new(parsed))).unwrap());
        let same = plain.len() == negated.len()
            && (1..=plain.len()).all(|v| {
                plain.is_negated(v) != negated.is_negated(v)
                    && [true, false].iter().all(|&o| negated.successor(v, o) == plain.successor(v, !o).swap_terminal())
            });
        if !same {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("1000 decisions, {violations} violations"))
}

fn merge_soundness() -> Verdict {
    let mut violations = 0;
    for s in 0..500u64 {
        let n = 1 + (s as usize % 12);
        let d = Decision::compile(&random_expr(30_000 + s, n)).unwrap();
        let count = (s as usize * 7) % 40;
        let vectors: Vec<InputVector> = (0..count)
            .map(|k| InputVector::from_index((s * 2_654_435_761 + k as u64 * 40_503) % (1 << n), n))
            .collect();
        let cut = if count == 0 { 0 } else { (s as usize * 13) % (count + 1) };
        let whole = run_suite(&d.bdd, &d.table, &vectors, Strategy::Sequential).unwrap();
        let a = run_suite(&d.bdd, &d.table, &vectors[..cut], Strategy::Sequential).unwrap();
        let b = run_suite(&d.bdd, &d.table, &vectors[cut..], Strategy::Parallel).unwrap();
        let merged = a.merge(&b).unwrap();
        if !merged.same_coverage(&whole) || merged.executions != whole.executions {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("500 split cases, {violations} differences"))
}

fn suite_generation() -> Verdict {
    let mut problems = Vec::new();
    let mut verified = 0;
    let mut below_bound = Vec::new();
    let mut check_bound = |text: &str, size: usize, n: usize| {
        if size < masking_lower_bound(n) {
            below_bound.push(format!("{text} size {size} < {}", masking_lower_bound(n)));
        }
    };
    for text in corpus_small() {
        let d = Decision::compile(&text).unwrap();
        let n = d.len();
        let achievable = (0..1u64 << n)
            .map(|i| flip_covered(&d.expr, &InputVector::from_index(i, n)).unwrap())
            .fold(CoveredOutcomes::default(), CoveredOutcomes::union)
            == CoveredOutcomes::all(n);
        if !achievable {
            continue;
        }
        match generate_suite(&d.expr, &d.bdd, &d.table, Strategy::default()).unwrap() {
            Ok(suite) => {
                let union = suite
                    .iter()
                    .map(|v| flip_covered(&d.expr, v).unwrap())
                    .fold(CoveredOutcomes::default(), CoveredOutcomes::union);
                if union == CoveredOutcomes::all(n) {
                    verified += 1;
                } else {
                    problems.push(format!("{text}: suite not verified"));
                }
                check_bound(&text, suite.len(), n);
            }
            Err(e) => problems.push(format!("{text}: {e}")),
        }
    }
    let mut chains = 0;
    for n in 2..=10 {
        for op in [" && ", " || "] {
            let text = (1..=n).map(|i| format!("c{i}")).collect::<Vec<_>>().join(op);
            let d = Decision::compile(&text).unwrap();
            match generate_suite(&d.expr, &d.bdd, &d.table, Strategy::default()).unwrap() {
                Ok(suite) if suite.len() <= n + 1 => {
                    chains += 1;
                    check_bound(&text, suite.len(), n);
                }
                Ok(suite) => problems.push(format!("{text}: size {} > {}", suite.len(), n + 1)),
                Err(e) => problems.push(format!("{text}: {e}")),
            }
        }
    }
    let ok = problems.is_empty() && below_bound.is_empty();
    verdict(
        ok,
        format!(
            "{verified} corpus suites verified, {chains}/18 chains within N+1, lower-bound counterexamples: {}{}",
            below_bound.len(),
            if problems.is_empty() { String::new() } else { format!(", problems: {problems:?}") }
        ),
    )
}

fn is_tree(d: &Decision) -> bool {
    pseudo_terminals(&d.bdd).iter().all(|p| p.is_terminal())
}

fn tree_implication() -> Verdict {
    let mut trees: Vec<Decision> =
        corpus_small().iter().map(|t| Decision::compile(t).unwrap()).filter(|d| is_tree(d) && d.len() >= 2).collect();
    let exhaustive = trees.len();
    let mut seed = 40_000u64;
    while trees.len() < 200 {
        let d = Decision::compile(&random_expr(seed, 5 + (seed as usize % 6))).unwrap();
        if is_tree(&d) {
            trees.push(d);
        }
        seed += 1;
    }
    let mut suites = 0u64;
    let mut violations = 0;
    for (k, d) in trees.iter().enumerate() {
        let n = d.len();
        let records: Vec<_> =
            (0..1u64 << n).map(|i| execute(&d.bdd, &d.table, &InputVector::from_index(i, n)).unwrap()).collect();
        if k < exhaustive {
            // Every subset of the 2^N vectors, folded as bitsets.
            let full = (1u64 << (2 * n)) - 1;
            let summary: Vec<(u64, u64)> = records
                .iter()
                .map(|r| {
                    let mut acc = CoverageAccumulator::new(&d.bdd);
                    acc.accumulate(r).unwrap();
                    (acc.then_taken.0 | acc.else_taken.0 << n, acc.global_t.0 | acc.global_f.0 << n)
                })
                .collect();
            for subset in 1..1u64 << records.len() {
                let (mut edges, mut independent) = (0u64, 0u64);
                for (i, &(e, m)) in summary.iter().enumerate() {
                    if subset >> i & 1 == 1 {
                        edges |= e;
                        independent |= m;
                    }
                }
                if edges == full {
                    suites += 1;
                    if independent != full {
                        violations += 1;
                    }
                }
            }
        } else {
            let mut state = seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            for _ in 0..50 {
                let mut acc = CoverageAccumulator::new(&d.bdd);
                while !acc.all_edges_taken() {
                    state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
                    acc.accumulate(&records[(state >> 33) as usize % records.len()]).unwrap();
                }
                suites += 1;
                if !acc.is_mcdc_complete() {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{} tree-shaped decisions ({exhaustive} with all subsets), {suites} edge-covering suites, {violations} violations", trees.len()),
    )
}

fn limits() -> Verdict {
    let chain = |k: usize| (1..=k).map(|i| format!("c{i}")).collect::<Vec<_>>().join(" && ");
    let rejected = matches!(compile(&chain(65)), Err(Error::TooManyConditions { count: 65 }));
    let start = Instant::now();
    let d = Decision::compile(&chain(64)).unwrap();
    let table = build_table(&d.bdd);
    let mut vectors = vec![InputVector::new(vec![true; 64])];
    for i in 1..=64 {
        vectors.push(InputVector::new(vec![true; 64]).flipped(i));
    }
    let acc = run_suite(&d.bdd, &table, &vectors, Strategy::default()).unwrap();
    let elapsed = start.elapsed();
    let ok =
        rejected && acc.is_mcdc_complete() && table.get(64, false).count() == 63 && elapsed < Duration::from_secs(1);
    verdict(ok, format!("65 rejected={rejected}, 64-chain mcdc {}/128 in {elapsed:?}", acc.independence_pairs()))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("golden masking table", golden_masking_table),
        ("golden execution", golden_execution),
        ("golden 3-or entries", golden_three_or),
        ("differential equivalence", differential_equivalence),
        ("structural invariants", structural_invariants),
        ("de morgan isomorphism", de_morgan),
        ("merge soundness", merge_soundness),
        ("suite generation", suite_generation),
        ("tree-bdd implication", tree_implication),
        ("limit behavior", limits),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("[{}] {:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
