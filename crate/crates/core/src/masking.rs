//! Masking tables computed from the shape of the evaluation graph.
//!
//! A vertex (or terminal) reached by two or more edges is a pseudo-terminal:
//! the local exit of some embedded subexpression. For every pair of
//! predecessors `n < m` of such a node `x`, the subexpression ending at `n`
//! is bounded by `x` and by `n`'s other successor. Taking `(m, x)` masks
//! every condition whose paths all run into one of those two bounds, which
//! is found by repeatedly peeling vertices whose successors are all gone.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::bdd::{Bdd, Edge, Node};
use crate::error::{Error, Result};

/// Set of conditions, bit `i - 1` for condition `i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditionMask(pub u64);

impl ConditionMask {
    pub const EMPTY: ConditionMask = ConditionMask(0);

    pub fn single(index: usize) -> Self {
        ConditionMask(1 << (index - 1))
    }

    /// Bits for conditions `1..=n`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            ConditionMask(u64::MAX)
        } else {
            ConditionMask((1u64 << n) - 1)
        }
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 >> (index - 1) & 1 == 1
    }

    pub fn insert(&mut self, index: usize) {
        self.0 |= 1 << (index - 1);
    }

    pub fn remove(&mut self, index: usize) {
        self.0 &= !(1 << (index - 1));
    }

    pub fn union(self, other: Self) -> Self {
        ConditionMask(self.0 | other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        ConditionMask(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Condition indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (1..=64).filter(move |&i| self.contains(i))
    }

    /// `n` characters, condition 1 leftmost.
    pub fn render(self, n: usize) -> String {
        (1..=n).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }
}

impl std::ops::BitOr for ConditionMask {
    type Output = ConditionMask;

    fn bitor(self, rhs: Self) -> Self {
        self.union(rhs)
    }
}

impl std::ops::BitOrAssign for ConditionMask {
    fn bitor_assign(&mut self, rhs: Self) {
        self.0 |= rhs.0;
    }
}

/// One element of `P(x)`: predecessors `first < last` of `target`, and
/// `exit`, the successor of `first` that is not `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MaskingTriple {
    pub exit: Node,
    pub first: usize,
    pub last: usize,
    pub target: Node,
}

/// Vertices and terminals with in-degree of at least two, ascending with
/// vertices before terminals.
pub fn pseudo_terminals(b: &Bdd) -> Vec<Node> {
    let mut indeg = vec![0usize; b.len() + 2];
    let slot = |node: Node| match node {
        Node::Vertex(k) => k - 1,
        Node::Terminal(t) => b.len() + t as usize,
    };
    for e in b.edges() {
        indeg[slot(e.target)] += 1;
    }
    (1..=b.len()).map(Node::Vertex).chain([Node::ZERO, Node::ONE]).filter(|&node| indeg[slot(node)] >= 2).collect()
}

pub fn triples(b: &Bdd, x: Node) -> Result<Vec<MaskingTriple>> {
    if b.in_degree(x) < 2 {
        return Err(Error::NotAPseudoTerminal(x));
    }
    let preds = b.predecessors(x);
    let mut out = Vec::with_capacity(preds.len() * preds.len().saturating_sub(1) / 2);
    for (i, &first) in preds.iter().enumerate() {
        let exit = other_successor(b, first, x)?;
        for &last in &preds[i + 1..] {
            out.push(MaskingTriple { exit, first, last, target: x });
        }
    }
    Ok(out)
}

fn other_successor(b: &Bdd, vertex: usize, x: Node) -> Result<Node> {
    match (b.successor(vertex, true), b.successor(vertex, false)) {
        (t, e) if t == x && e != x => Ok(e),
        (t, e) if e == x && t != x => Ok(t),
        _ => Err(Error::InvariantViolation(format!("x{vertex} has no unique successor besides {x}"))),
    }
}

/// Removes `target` and `exit` from a scratch copy of the graph and peels
/// off vertices until none is left with a live successor path; the peeled
/// vertices are the conditions masked by the triple.
pub fn collect_masked(b: &Bdd, t: &MaskingTriple) -> ConditionMask {
    peel(b, t.target, t.exit)
}

fn peel(b: &Bdd, target: Node, exit: Node) -> ConditionMask {
    let n = b.len();
    // Slots 1..=n are vertices, 0 and n + 1 are the terminals.
    let slot = |node: Node| match node {
        Node::Vertex(k) => k,
        Node::Terminal(false) => 0,
        Node::Terminal(true) => n + 1,
    };
    let mut removed = vec![false; n + 2];
    removed[slot(target)] = true;
    removed[slot(exit)] = true;
    let mut collected = ConditionMask::EMPTY;
    // Successors always have larger indices, so one descending sweep reaches
    // the fixed point of leaf removal.
    for v in (1..=n).rev() {
        if removed[v] {
            continue;
        }
        if removed[slot(b.successor(v, true))] && removed[slot(b.successor(v, false))] {
            removed[v] = true;
            collected.insert(v);
        }
    }
    collected
}

/// Maps each edge to the conditions whose recorded outcome it voids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskingTable {
    n: usize,
    // Indexed by source - 1: [else-edge mask, then-edge mask].
    masks: Vec<[ConditionMask; 2]>,
    rows: Vec<(Edge, ConditionMask)>,
}

impl MaskingTable {
    /// A table with no entries, for a graph with `n` vertices.
    pub fn empty(n: usize) -> Self {
        MaskingTable { n, masks: vec![[ConditionMask::EMPTY; 2]; n], rows: Vec::new() }
    }

    pub fn conditions(&self) -> usize {
        self.n
    }

    /// Mask applied when vertex `source` takes `outcome`.
    pub fn get(&self, source: usize, outcome: bool) -> ConditionMask {
        self.masks[source - 1][outcome as usize]
    }

    /// Non-empty entries ordered by target node, then source vertex.
    pub fn rows(&self) -> &[(Edge, ConditionMask)] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Replaces the mask for one edge; intended for building corrupted
    /// tables when testing the differential harness.
    pub fn with_entry(mut self, edge: Edge, mask: ConditionMask) -> Self {
        self.masks[edge.source - 1][edge.outcome as usize] = mask;
        self.rows.retain(|(e, _)| (e.source, e.outcome) != (edge.source, edge.outcome));
        if !mask.is_empty() {
            self.rows.push((edge, mask));
            self.rows.sort_by_key(|(e, _)| (e.target, e.source));
        }
        self
    }

    /// Rendered with columns `edge`, `masked conditions`, `bitmask`.
    pub fn render(&self) -> String {
        let cells: Vec<(String, String, String)> = self
            .rows
            .iter()
            .map(|(edge, mask)| {
                let names: Vec<String> = mask.iter().map(|i| format!("x{i}")).collect();
                (edge.to_string(), names.join(", "), mask.render(self.n))
            })
            .collect();
        let w_edge = cells.iter().map(|c| c.0.len()).max().unwrap_or(0).max("edge".len());
        let w_mask = cells.iter().map(|c| c.1.len()).max().unwrap_or(0).max("masked conditions".len());
        let mut out = String::new();
        let _ = writeln!(out, "{:<w_edge$}  {:<w_mask$}  bitmask", "edge", "masked conditions");
        for (edge, names, bits) in cells {
            let _ = writeln!(out, "{edge:<w_edge$}  {names:<w_mask$}  {bits}");
        }
        out
    }
}

impl fmt::Display for MaskingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Runs the triple analysis for every pseudo-terminal and unions the
/// collected conditions into the entry for `(last, target)`.
pub fn build_table(b: &Bdd) -> MaskingTable {
    let mut table = MaskingTable::empty(b.len());
    // Peeling only depends on the two removed nodes.
    let mut memo: HashMap<(Node, Node), ConditionMask> = HashMap::new();
    for x in pseudo_terminals(b) {
        let Ok(ts) = triples(b, x) else { continue };
        for t in ts {
            let masked = *memo.entry((t.target, t.exit)).or_insert_with(|| peel(b, t.target, t.exit));
            let outcome = b.successor(t.last, true) == x;
            table.masks[t.last - 1][outcome as usize] |= masked;
        }
    }
    for v in 1..=b.len() {
        for outcome in [true, false] {
            let mask = table.get(v, outcome);
            if !mask.is_empty() {
                table.rows.push((b.edge(v, outcome), mask));
            }
        }
    }
    table.rows.sort_by_key(|(e, _)| (e.target, e.source));
    table
}
