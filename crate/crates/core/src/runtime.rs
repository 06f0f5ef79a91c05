//! Simulated instrumentation: each evaluated condition clears the bits its
//! edge masks from both bitsets, then records its own outcome. At the
//! terminal the bitsets are flushed into the global independence arrays.

use std::fmt::{self, Write as _};

use crate::bdd::{Bdd, Path};
use crate::error::{Error, Result};
use crate::expr::{IndexedExpr, InputVector};
use crate::masking::{ConditionMask, MaskingTable};
use crate::parallel::Strategy;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionRecord {
    pub n: usize,
    pub path: Path,
    /// Outcomes recorded along the path with masking disabled.
    pub pre_mask_t: ConditionMask,
    pub pre_mask_f: ConditionMask,
    /// Outcomes still standing when the terminal was reached.
    pub post_mask_t: ConditionMask,
    pub post_mask_f: ConditionMask,
}

impl ExecutionRecord {
    pub fn outcome(&self) -> bool {
        self.path.terminal
    }

    pub fn covered(&self) -> Vec<(usize, bool)> {
        outcome_pairs(self.post_mask_t, self.post_mask_f)
    }
}

/// `(condition, outcome)` pairs set in a pair of bitsets, ordered by condition.
pub fn outcome_pairs(t: ConditionMask, f: ConditionMask) -> Vec<(usize, bool)> {
    let mut pairs: Vec<(usize, bool)> = t.iter().map(|i| (i, true)).chain(f.iter().map(|i| (i, false))).collect();
    pairs.sort();
    pairs
}

/// Runs one input vector through the instrumented evaluation graph.
pub fn execute(b: &Bdd, m: &MaskingTable, v: &InputVector) -> Result<ExecutionRecord> {
    if m.conditions() != b.len() {
        return Err(Error::DimensionMismatch { expected: b.len(), got: m.conditions() });
    }
    let path = b.path(v)?;
    let (mut pre_t, mut pre_f) = (0u64, 0u64);
    let (mut t, mut f) = (0u64, 0u64);
    for e in &path.edges {
        let bit = 1u64 << (e.source - 1);
        let mask = m.get(e.source, e.outcome).0;
        t &= !mask;
        f &= !mask;
        if e.outcome {
            t |= bit;
            pre_t |= bit;
        } else {
            f |= bit;
            pre_f |= bit;
        }
    }
    Ok(ExecutionRecord {
        n: b.len(),
        path,
        pre_mask_t: ConditionMask(pre_t),
        pre_mask_f: ConditionMask(pre_f),
        post_mask_t: ConditionMask(t),
        post_mask_f: ConditionMask(f),
    })
}

/// Global independence arrays plus edge and terminal coverage for one decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageAccumulator {
    n: usize,
    fingerprint: u64,
    pub global_t: ConditionMask,
    pub global_f: ConditionMask,
    /// Sources of taken then-edges and else-edges.
    pub then_taken: ConditionMask,
    pub else_taken: ConditionMask,
    /// Indexed by terminal value.
    pub terminals_reached: [bool; 2],
    pub executions: u64,
}

impl CoverageAccumulator {
    pub fn new(b: &Bdd) -> Self {
        CoverageAccumulator {
            n: b.len(),
            fingerprint: b.fingerprint(),
            global_t: ConditionMask::EMPTY,
            global_f: ConditionMask::EMPTY,
            then_taken: ConditionMask::EMPTY,
            else_taken: ConditionMask::EMPTY,
            terminals_reached: [false; 2],
            executions: 0,
        }
    }

    pub fn conditions(&self) -> usize {
        self.n
    }

    pub fn accumulate(&mut self, r: &ExecutionRecord) -> Result<()> {
        if r.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: r.n });
        }
        self.global_t |= r.post_mask_t;
        self.global_f |= r.post_mask_f;
        for e in &r.path.edges {
            if e.outcome {
                self.then_taken.insert(e.source);
            } else {
                self.else_taken.insert(e.source);
            }
        }
        self.terminals_reached[r.path.terminal as usize] = true;
        self.executions += 1;
        Ok(())
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.fingerprint != other.fingerprint {
            return Err(Error::IncompatibleAccumulators);
        }
        Ok(CoverageAccumulator {
            n: self.n,
            fingerprint: self.fingerprint,
            global_t: self.global_t | other.global_t,
            global_f: self.global_f | other.global_f,
            then_taken: self.then_taken | other.then_taken,
            else_taken: self.else_taken | other.else_taken,
            terminals_reached: [
                self.terminals_reached[0] || other.terminals_reached[0],
                self.terminals_reached[1] || other.terminals_reached[1],
            ],
            executions: self.executions + other.executions,
        })
    }

    /// Equality on everything except the execution count.
    pub fn same_coverage(&self, other: &Self) -> bool {
        self.n == other.n
            && self.fingerprint == other.fingerprint
            && self.global_t == other.global_t
            && self.global_f == other.global_f
            && self.then_taken == other.then_taken
            && self.else_taken == other.else_taken
            && self.terminals_reached == other.terminals_reached
    }

    pub fn edges_taken(&self) -> usize {
        self.then_taken.count() + self.else_taken.count()
    }

    pub fn all_edges_taken(&self) -> bool {
        self.edges_taken() == 2 * self.n
    }

    pub fn independence_pairs(&self) -> usize {
        self.global_t.count() + self.global_f.count()
    }

    pub fn is_mcdc_complete(&self) -> bool {
        self.independence_pairs() == 2 * self.n
    }
}

/// Executes every vector and folds the records into one accumulator.
pub fn run_suite(
    b: &Bdd,
    m: &MaskingTable,
    vectors: &[InputVector],
    strategy: Strategy,
) -> Result<CoverageAccumulator> {
    let fold = |chunk: &[InputVector]| -> Result<CoverageAccumulator> {
        let mut acc = CoverageAccumulator::new(b);
        for v in chunk {
            acc.accumulate(&execute(b, m, v)?)?;
        }
        Ok(acc)
    };
    let parts = strategy.map_chunks(vectors, fold);
    let mut total = CoverageAccumulator::new(b);
    for part in parts {
        total = total.merge(&part?)?;
    }
    Ok(total)
}

/// Whether each outcome of a condition was taken and whether it was shown
/// to independently affect the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeStatus {
    Independent,
    /// The edge was taken but every recording of it was masked.
    Masked,
    NotTaken,
}

impl OutcomeStatus {
    fn label(self) -> &'static str {
        match self {
            OutcomeStatus::Independent => "yes",
            OutcomeStatus::Masked => "masked",
            OutcomeStatus::NotTaken => "no",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionRow {
    pub index: usize,
    pub label: String,
    pub negated: bool,
    pub when_true: OutcomeStatus,
    pub when_false: OutcomeStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub expression: String,
    pub n: usize,
    pub rows: Vec<ConditionRow>,
    pub decisions_reached: usize,
    pub edges_taken: usize,
    pub independent: usize,
}

impl CoverageReport {
    pub fn decision_percent(&self) -> f64 {
        percent(self.decisions_reached, 2)
    }

    pub fn condition_percent(&self) -> f64 {
        percent(self.edges_taken, 2 * self.n)
    }

    pub fn mcdc_percent(&self) -> f64 {
        percent(self.independent, 2 * self.n)
    }

    pub fn is_mcdc_complete(&self) -> bool {
        self.independent == 2 * self.n
    }

    /// `(condition, outcome)` pairs shown independent.
    pub fn covered(&self) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for row in &self.rows {
            if row.when_true == OutcomeStatus::Independent {
                out.push((row.index, true));
            }
            if row.when_false == OutcomeStatus::Independent {
                out.push((row.index, false));
            }
        }
        out
    }
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn report(e: &IndexedExpr, b: &Bdd, acc: &CoverageAccumulator) -> CoverageReport {
    let status = |independent: ConditionMask, taken: ConditionMask, i: usize| {
        if independent.contains(i) {
            OutcomeStatus::Independent
        } else if taken.contains(i) {
            OutcomeStatus::Masked
        } else {
            OutcomeStatus::NotTaken
        }
    };
    let rows = e
        .conditions()
        .iter()
        .map(|c| ConditionRow {
            index: c.index,
            label: c.label.clone(),
            negated: c.negated,
            when_true: status(acc.global_t, acc.then_taken, c.index),
            when_false: status(acc.global_f, acc.else_taken, c.index),
        })
        .collect();
    debug_assert_eq!(acc.conditions(), b.len());
    CoverageReport {
        expression: e.to_string(),
        n: e.len(),
        rows,
        decisions_reached: acc.terminals_reached.iter().filter(|&&r| r).count(),
        edges_taken: acc.edges_taken(),
        independent: acc.independence_pairs(),
    }
}

impl fmt::Display for CoverageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "expression: {}", self.expression)?;
        writeln!(f, "conditions: {}", self.n)?;
        let names: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("x{} ({}{})", r.index, if r.negated { "!" } else { "" }, r.label))
            .collect();
        let width = names.iter().map(String::len).max().unwrap_or(0).max("condition".len());
        writeln!(f, "{:<width$}  true covered  false covered", "condition")?;
        for (row, name) in self.rows.iter().zip(&names) {
            let mut line = String::new();
            let _ = write!(line, "{name:<width$}  {:<12}  {}", row.when_true.label(), row.when_false.label());
            writeln!(f, "{line}")?;
        }
        writeln!(f, "decision: {}/2", self.decisions_reached)?;
        writeln!(f, "condition: {}/{}", self.edges_taken, 2 * self.n)?;
        writeln!(f, "mcdc: {}/{} ({:.1}%)", self.independent, 2 * self.n, self.mcdc_percent())
    }
}
