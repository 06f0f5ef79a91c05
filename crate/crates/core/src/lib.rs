//! Masking MC/DC analysis of Boolean decisions.
//!
//! A decision is parsed, normalized so negations sit on the conditions, and
//! lowered to the reduced ordered BDD that short-circuit evaluation walks.
//! The masking table is derived from the shape of that graph alone and then
//! drives a bitset simulation of the coverage instrumentation. The
//! [`oracle`] module recomputes coverage by brute force so the two can be
//! checked against each other.
//!
//! ```
//! use mcdc_core::{bdd, expr, masking, runtime};
//!
//! let e = expr::compile("(a || b) && (c || d) && e").unwrap();
//! let b = bdd::lower(&e);
//! let m = masking::build_table(&b);
//! let v = expr::InputVector::new(vec![false, true, false, false, true]);
//! let r = runtime::execute(&b, &m, &v).unwrap();
//! assert_eq!(r.covered(), vec![(3, false), (4, false)]);
//! ```

pub mod bdd;
pub mod error;
pub mod expr;
pub mod masking;
pub mod oracle;
pub mod parallel;
pub mod runtime;
pub mod vectors;

pub use bdd::{lower, Bdd, Edge, Node, Path, Violation};
pub use error::{Error, Result};
pub use expr::{compile, normalize, parse, Expr, IndexedExpr, InputVector};
pub use masking::{build_table, ConditionMask, MaskingTable, MaskingTriple};
pub use oracle::{differential_check, flip_covered, generate_suite, random_expr, CheckMode, CoveredOutcomes};
pub use parallel::Strategy;
pub use runtime::{execute, report, run_suite, CoverageAccumulator, CoverageReport, ExecutionRecord};
pub use vectors::{parse_vectors, TestSuite};

/// Everything derived from one decision's text.
#[derive(Debug, Clone)]
pub struct Decision {
    pub expr: IndexedExpr,
    pub bdd: Bdd,
    pub table: MaskingTable,
}

impl Decision {
    pub fn compile(text: &str) -> Result<Self> {
        let expr = compile(text)?;
        let bdd = lower(&expr);
        let table = build_table(&bdd);
        Ok(Decision { expr, bdd, table })
    }

    pub fn len(&self) -> usize {
        self.expr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expr.is_empty()
    }
}
