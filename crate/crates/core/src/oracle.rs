//! Brute-force ground truth for masking MC/DC and the harnesses built on it.
//!
//! The oracle works on the normalized expression tree only; it never looks
//! at the masking table. A condition outcome counts as shown independent for
//! an executed vector when the condition was evaluated and flipping it can
//! change the decision. Conditions skipped by short-circuiting were never
//! observed, so they may take either value in the flipped run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bdd::Bdd;
use crate::error::{Error, Result};
use crate::expr::{IndexedExpr, InputVector, Tree};
use crate::masking::{ConditionMask, MaskingTable};
use crate::parallel::Strategy;
use crate::runtime::{execute, outcome_pairs};
use crate::vectors::TestSuite;

/// Largest decision checked over all `2^N` vectors.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Vectors drawn by sampled checks and sampled suite generation.
pub const SAMPLE_SIZE: usize = 4096;

/// Set of `(condition, outcome)` pairs as two bitsets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CoveredOutcomes {
    pub when_true: ConditionMask,
    pub when_false: ConditionMask,
}

impl CoveredOutcomes {
    pub fn contains(&self, index: usize, outcome: bool) -> bool {
        if outcome {
            self.when_true.contains(index)
        } else {
            self.when_false.contains(index)
        }
    }

    pub fn insert(&mut self, index: usize, outcome: bool) {
        if outcome {
            self.when_true.insert(index)
        } else {
            self.when_false.insert(index)
        }
    }

    pub fn union(self, other: Self) -> Self {
        CoveredOutcomes { when_true: self.when_true | other.when_true, when_false: self.when_false | other.when_false }
    }

    pub fn len(&self) -> usize {
        self.when_true.count() + self.when_false.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> Vec<(usize, bool)> {
        outcome_pairs(self.when_true, self.when_false)
    }

    pub fn all(n: usize) -> Self {
        CoveredOutcomes { when_true: ConditionMask::full(n), when_false: ConditionMask::full(n) }
    }

    /// Pairs of `all(n)` missing from `self`.
    pub fn missing(&self, n: usize) -> Vec<(usize, bool)> {
        let full = ConditionMask::full(n);
        outcome_pairs(full.difference(self.when_true), full.difference(self.when_false))
    }
}

/// Short-circuit evaluation of the tree: the decision and the set of
/// conditions actually evaluated.
pub fn short_circuit(tree: &Tree, v: &InputVector) -> (bool, ConditionMask) {
    fn go(tree: &Tree, v: &InputVector, seen: &mut ConditionMask) -> bool {
        match tree {
            Tree::Leaf(i) => {
                seen.insert(*i);
                v.value(*i)
            }
            Tree::And(children) => children.iter().all(|c| go(c, v, seen)),
            Tree::Or(children) => children.iter().any(|c| go(c, v, seen)),
        }
    }
    let mut seen = ConditionMask::EMPTY;
    let value = go(tree, v, &mut seen);
    (value, seen)
}

/// Which values `(false, true)` the tree can take when conditions in `fixed`
/// hold their value from `v` and all other conditions are free.
fn reachable_values(tree: &Tree, v: &InputVector, fixed: ConditionMask) -> (bool, bool) {
    match tree {
        Tree::Leaf(i) if fixed.contains(*i) => (!v.value(*i), v.value(*i)),
        Tree::Leaf(_) => (true, true),
        Tree::And(children) => {
            let mut can_false = false;
            let mut can_true = true;
            for c in children {
                let (f, t) = reachable_values(c, v, fixed);
                can_false |= f;
                can_true &= t;
            }
            (can_false, can_true)
        }
        Tree::Or(children) => {
            let mut can_false = true;
            let mut can_true = false;
            for c in children {
                let (f, t) = reachable_values(c, v, fixed);
                can_false &= f;
                can_true |= t;
            }
            (can_false, can_true)
        }
    }
}

/// Condition outcomes of `v` shown to independently affect the decision.
///
/// Exact because every condition occurrence is a distinct leaf, so the free
/// subtrees can be assigned independently.
pub fn flip_covered(e: &IndexedExpr, v: &InputVector) -> Result<CoveredOutcomes> {
    e.check_len(v)?;
    let (decision, evaluated) = short_circuit(e.tree(), v);
    let mut covered = CoveredOutcomes::default();
    for i in evaluated.iter() {
        let flipped = v.flipped(i);
        let (can_false, can_true) = reachable_values(e.tree(), &flipped, evaluated);
        if if decision { can_false } else { can_true } {
            covered.insert(i, v.value(i));
        }
    }
    Ok(covered)
}

/// [`flip_covered`] computed by enumerating every assignment of the
/// conditions the vector did not evaluate. Exponential in that count.
pub fn flip_covered_enumerated(e: &IndexedExpr, v: &InputVector) -> Result<CoveredOutcomes> {
    e.check_len(v)?;
    let n = e.len();
    let decision = e.evaluate(v)?;
    let (_, evaluated) = short_circuit(e.tree(), v);
    let free: Vec<usize> = (1..=n).filter(|&i| !evaluated.contains(i)).collect();
    let mut covered = CoveredOutcomes::default();
    for i in evaluated.iter() {
        let changes = (0..1u64 << free.len()).any(|assignment| {
            let mut w = v.values().to_vec();
            for (k, &j) in free.iter().enumerate() {
                w[j - 1] = assignment >> k & 1 == 1;
            }
            w[i - 1] = !w[i - 1];
            e.evaluate(&InputVector::new(w)).unwrap() != decision
        });
        if changes {
            covered.insert(i, v.value(i));
        }
    }
    Ok(covered)
}

/// Vectors a differential check runs over.
#[derive(Debug, Clone)]
pub enum CheckMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
    Listed(Vec<InputVector>),
}

impl CheckMode {
    /// Exhaustive when small enough, otherwise [`SAMPLE_SIZE`] seeded samples.
    pub fn auto(n: usize, seed: u64) -> Self {
        if n <= EXHAUSTIVE_LIMIT {
            CheckMode::Exhaustive
        } else {
            CheckMode::Sampled { count: SAMPLE_SIZE, seed }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub vector: InputVector,
    pub oracle: CoveredOutcomes,
    pub instrumented: CoveredOutcomes,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialReport {
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl DifferentialReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn sample_vectors(n: usize, count: usize, seed: u64) -> Vec<InputVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| InputVector::new((0..n).map(|_| rng.gen()).collect())).collect()
}

fn compare(e: &IndexedExpr, b: &Bdd, m: &MaskingTable, v: &InputVector) -> Result<Option<Mismatch>> {
    let oracle = flip_covered(e, v)?;
    let r = execute(b, m, v)?;
    let instrumented = CoveredOutcomes { when_true: r.post_mask_t, when_false: r.post_mask_f };
    Ok((oracle != instrumented).then(|| Mismatch { vector: v.clone(), oracle, instrumented }))
}

/// Compares table-driven instrumentation against [`flip_covered`].
pub fn differential_check(
    e: &IndexedExpr,
    b: &Bdd,
    m: &MaskingTable,
    mode: &CheckMode,
    strategy: Strategy,
) -> Result<DifferentialReport> {
    let n = e.len();
    let results: Vec<Result<Option<Mismatch>>> = match mode {
        CheckMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::InvariantViolation(format!(
                    "exhaustive check requested for {n} conditions, limit is {EXHAUSTIVE_LIMIT}"
                )));
            }
            strategy.map_range(1u64 << n, |i| compare(e, b, m, &InputVector::from_index(i, n)))
        }
        CheckMode::Sampled { count, seed } => {
            let vectors = sample_vectors(n, *count, *seed);
            strategy.map_slice(&vectors, |v| compare(e, b, m, v))
        }
        CheckMode::Listed(vectors) => strategy.map_slice(vectors, |v| compare(e, b, m, v)),
    };
    let checked = results.len();
    let mut mismatches = Vec::new();
    for r in results {
        if let Some(mm) = r? {
            mismatches.push(mm);
        }
    }
    Ok(DifferentialReport { checked, mismatches })
}

/// Suite generation could not cover every outcome.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("coverage unreachable: {} outcome(s) not covered", missing.len())]
pub struct CoverageUnreachable {
    /// Best suite found.
    pub suite: TestSuite,
    pub missing: Vec<(usize, bool)>,
}

fn candidates(n: usize) -> Vec<InputVector> {
    if n <= EXHAUSTIVE_LIMIT {
        return (0..1u64 << n).map(|i| InputVector::from_index(i, n)).collect();
    }
    let mut out = vec![InputVector::new(vec![false; n]), InputVector::new(vec![true; n])];
    for i in 1..=n {
        out.push(InputVector::new(vec![false; n]).flipped(i));
        out.push(InputVector::new(vec![true; n]).flipped(i));
    }
    out.extend(sample_vectors(n, SAMPLE_SIZE, 0));
    out.sort();
    out.dedup();
    out
}

/// Greedy suite: repeatedly take the candidate adding the most newly
/// covered outcomes, preferring the numerically smallest vector on ties
/// (condition 1 most significant). The instrumentation drives selection
/// and the oracle verifies the result.
pub fn generate_suite(
    e: &IndexedExpr,
    b: &Bdd,
    m: &MaskingTable,
    strategy: Strategy,
) -> Result<std::result::Result<TestSuite, CoverageUnreachable>> {
    let n = e.len();
    let pool = candidates(n);
    let scored: Vec<Result<CoveredOutcomes>> = strategy.map_slice(&pool, |v| {
        let r = execute(b, m, v)?;
        Ok(CoveredOutcomes { when_true: r.post_mask_t, when_false: r.post_mask_f })
    });
    let scored: Vec<CoveredOutcomes> = scored.into_iter().collect::<Result<_>>()?;

    let goal = CoveredOutcomes::all(n);
    let mut have = CoveredOutcomes::default();
    let mut suite = TestSuite::default();
    while have != goal {
        let gain = |c: &CoveredOutcomes| c.union(have).len() - have.len();
        let Some((best, g)) =
            scored.iter().enumerate().map(|(i, c)| (i, gain(c))).fold(None, |acc: Option<(usize, usize)>, (i, g)| {
                match acc {
                    Some((_, bg)) if bg >= g => acc,
                    _ => Some((i, g)),
                }
            })
        else {
            break;
        };
        if g == 0 {
            break;
        }
        have = have.union(scored[best]);
        suite.push(pool[best].clone());
    }

    let mut verified = CoveredOutcomes::default();
    for v in suite.iter() {
        verified = verified.union(flip_covered(e, v)?);
    }
    let missing = verified.missing(n);
    if missing.is_empty() {
        Ok(Ok(suite))
    } else {
        Ok(Err(CoverageUnreachable { suite, missing }))
    }
}

/// `⌈2√N⌉`, the masking MC/DC suite-size bound.
pub fn masking_lower_bound(n: usize) -> usize {
    let mut k = 0;
    while k * k < 4 * n {
        k += 1;
    }
    k
}

/// Deterministic random decision over `c1..cn`: a random binary tree of
/// `&&`/`||` with each leaf negated with probability 1/4.
pub fn random_expr(seed: u64, n_conditions: usize) -> String {
    fn go(rng: &mut ChaCha8Rng, leaves: usize, next: &mut usize, out: &mut String, nested: bool) {
        if leaves == 1 {
            *next += 1;
            if rng.gen_ratio(1, 4) {
                out.push('!');
            }
            out.push_str(&format!("c{next}"));
            return;
        }
        let left = rng.gen_range(1..leaves);
        let op = if rng.gen_bool(0.5) { " && " } else { " || " };
        if nested {
            out.push('(');
        }
        go(rng, left, next, out, true);
        out.push_str(op);
        go(rng, leaves - left, next, out, true);
        if nested {
            out.push(')');
        }
    }
    assert!(n_conditions >= 1, "a decision needs at least one condition");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    let mut next = 0;
    go(&mut rng, n_conditions, &mut next, &mut out, false);
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Shape {
    And,
    Or,
}

fn trees(n: usize, root: Option<Shape>) -> Vec<String> {
    // Each string uses `#` for leaves; labels and polarities are filled in later.
    if n == 1 {
        return vec!["#".to_string()];
    }
    let ops = match root {
        Some(op) => vec![op],
        None => vec![Shape::And, Shape::Or],
    };
    let mut out = Vec::new();
    for op in ops {
        let child = if op == Shape::And { Shape::Or } else { Shape::And };
        let sep = if op == Shape::And { " && " } else { " || " };
        for parts in compositions(n) {
            if parts.len() < 2 {
                continue;
            }
            let mut acc = vec![String::new()];
            for (k, &size) in parts.iter().enumerate() {
                let options: Vec<String> =
                    trees(size, Some(child)).into_iter().map(|t| if size > 1 { format!("({t})") } else { t }).collect();
                acc = acc
                    .iter()
                    .flat_map(|prefix| {
                        options.iter().map(move |o| if k == 0 { o.clone() } else { format!("{prefix}{sep}{o}") })
                    })
                    .collect();
            }
            out.extend(acc);
        }
    }
    out
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every normalized decision with exactly `n` conditions: all alternating
/// operator shapes, every leaf polarity, labels `c1..cn`.
pub fn structural_corpus(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for shape in trees(n, None) {
        for polarity in 0..1u64 << n {
            let mut text = String::new();
            let mut leaf = 0;
            for ch in shape.chars() {
                if ch == '#' {
                    leaf += 1;
                    if polarity >> (leaf - 1) & 1 == 1 {
                        text.push('!');
                    }
                    text.push_str(&format!("c{leaf}"));
                } else {
                    text.push(ch);
                }
            }
            out.push(text);
        }
    }
    out
}
