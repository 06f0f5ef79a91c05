//! The evaluation graph of a decision as a reduced ordered BDD.
//!
//! Vertices are the condition indices `1..=N`, vertex 1 is the root and the
//! two terminals are sentinels. The graph is the one a compiler produces for
//! short-circuit evaluation: the then-edge is taken when the condition's
//! outcome is true, regardless of its polarity.

use std::collections::hash_map::DefaultHasher;
use std::fmt::{self, Write as _};
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::expr::{IndexedExpr, InputVector, Tree};

/// A vertex or one of the two terminals. Vertices order before terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Vertex(usize),
    Terminal(bool),
}

impl Node {
    pub const ZERO: Node = Node::Terminal(false);
    pub const ONE: Node = Node::Terminal(true);

    pub fn vertex(self) -> Option<usize> {
        match self {
            Node::Vertex(i) => Some(i),
            Node::Terminal(_) => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Node::Terminal(_))
    }

    /// Exchanges the two terminals, leaving vertices alone.
    pub fn swap_terminal(self) -> Node {
        match self {
            Node::Terminal(b) => Node::Terminal(!b),
            v => v,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Vertex(i) => write!(f, "x{i}"),
            Node::Terminal(false) => f.write_str("0"),
            Node::Terminal(true) => f.write_str("1"),
        }
    }
}

/// Taking the `outcome` branch out of vertex `source`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub outcome: bool,
    pub target: Node,
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x{}, {})", self.source, self.target)
    }
}

/// The edges walked for one input vector and the terminal reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub edges: Vec<Edge>,
    pub terminal: bool,
}

impl Path {
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(|e| e.source)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Successors {
    then: Node,
    otherwise: Node,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bdd {
    succ: Vec<Successors>,
    negated: Vec<bool>,
}

/// A broken structural rule, naming the offending vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    NotOrdered(usize),
    RedundantTest(usize),
    Unreachable(usize),
    DanglingPath(usize),
}

impl Bdd {
    /// Builds a graph from `(then, else)` successor pairs for vertices
    /// `1..=N` without checking any invariant. Use [`Bdd::validate`].
    pub fn from_successors(pairs: &[(Node, Node)]) -> Self {
        Bdd {
            succ: pairs.iter().map(|&(then, otherwise)| Successors { then, otherwise }).collect(),
            negated: vec![false; pairs.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn root(&self) -> Node {
        if self.succ.is_empty() {
            Node::ONE
        } else {
            Node::Vertex(1)
        }
    }

    pub fn successor(&self, vertex: usize, outcome: bool) -> Node {
        let s = &self.succ[vertex - 1];
        if outcome {
            s.then
        } else {
            s.otherwise
        }
    }

    pub fn is_negated(&self, vertex: usize) -> bool {
        self.negated[vertex - 1]
    }

    pub fn edge(&self, source: usize, outcome: bool) -> Edge {
        Edge { source, outcome, target: self.successor(source, outcome) }
    }

    /// All `2N` edges, by source then with the then-edge first.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (1..=self.len()).flat_map(move |v| [self.edge(v, true), self.edge(v, false)])
    }

    /// Vertices with an edge into `node`, ascending.
    pub fn predecessors(&self, node: Node) -> Vec<usize> {
        let mut preds: Vec<usize> = self.edges().filter(|e| e.target == node).map(|e| e.source).collect();
        preds.dedup();
        preds
    }

    pub fn in_degree(&self, node: Node) -> usize {
        self.edges().filter(|e| e.target == node).count()
    }

    /// Stable identity of the graph shape, used to refuse merging coverage
    /// from different decisions.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.succ.hash(&mut h);
        h.finish()
    }

    /// Lists every broken invariant; empty for a well-formed graph.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.len();
        let mut violations = Vec::new();
        let in_range = |node: Node| match node {
            Node::Vertex(k) => (1..=n).contains(&k),
            Node::Terminal(_) => true,
        };
        for v in 1..=n {
            let s = self.succ[v - 1];
            if !in_range(s.then) || !in_range(s.otherwise) {
                violations.push(Violation::DanglingPath(v));
                continue;
            }
            if s.then == s.otherwise {
                violations.push(Violation::RedundantTest(v));
            }
            if [s.then, s.otherwise].iter().any(|t| matches!(t, Node::Vertex(k) if *k <= v)) {
                violations.push(Violation::NotOrdered(v));
            }
        }
        let mut reached = vec![false; n + 1];
        let mut stack = vec![1];
        while let Some(v) = stack.pop() {
            if v == 0 || v > n || reached[v] {
                continue;
            }
            reached[v] = true;
            for t in [self.succ[v - 1].then, self.succ[v - 1].otherwise] {
                if let Node::Vertex(k) = t {
                    stack.push(k);
                }
            }
        }
        violations.extend((1..=n).filter(|&v| !reached[v]).map(Violation::Unreachable));
        violations.sort();
        violations
    }

    /// Walks from the root following the outcome of each evaluated condition.
    pub fn path(&self, v: &InputVector) -> Result<Path> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: v.len() });
        }
        let mut edges = Vec::new();
        let mut at = self.root();
        while let Node::Vertex(i) = at {
            let e = self.edge(i, v.value(i));
            edges.push(e);
            at = e.target;
        }
        match at {
            Node::Terminal(terminal) => Ok(Path { edges, terminal }),
            Node::Vertex(_) => unreachable!(),
        }
    }

    /// Graphviz rendering. Then-edges are solid, else-edges dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph bdd {\n");
        for v in 1..=self.len() {
            let bang = if self.is_negated(v) { "!" } else { "" };
            let _ = writeln!(out, "  x{v} [label=\"{bang}x{v}\"];");
        }
        out.push_str("  t0 [label=\"0\", shape=box];\n");
        out.push_str("  t1 [label=\"1\", shape=box];\n");
        let id = |n: Node| match n {
            Node::Vertex(k) => format!("x{k}"),
            Node::Terminal(b) => format!("t{}", b as u8),
        };
        for e in self.edges() {
            let style = if e.outcome { "solid" } else { "dashed" };
            let _ = writeln!(out, "  x{} -> {} [style={style}];", e.source, id(e.target));
        }
        out.push_str("}\n");
        out
    }

    /// Successor table as text, one row per vertex.
    pub fn render_table(&self) -> String {
        let mut out = String::from("vertex  then  else\n");
        for v in 1..=self.len() {
            let s = self.succ[v - 1];
            let name = format!("{}x{v}", if self.is_negated(v) { "!" } else { "" });
            let _ = writeln!(out, "{name:<7} {:<5} {}", s.then.to_string(), s.otherwise);
        }
        out
    }
}

/// Lowers a normalized decision to its evaluation graph by continuation
/// passing: each node is lowered knowing where control goes when it
/// evaluates true and when it evaluates false.
pub fn lower(e: &IndexedExpr) -> Bdd {
    fn go(tree: &Tree, on_true: Node, on_false: Node, succ: &mut [Successors]) -> Node {
        match tree {
            Tree::Leaf(k) => {
                succ[k - 1] = Successors { then: on_true, otherwise: on_false };
                Node::Vertex(*k)
            }
            Tree::And(children) => {
                let mut next = on_true;
                for child in children.iter().rev() {
                    next = go(child, next, on_false, succ);
                }
                next
            }
            Tree::Or(children) => {
                let mut next = on_false;
                for child in children.iter().rev() {
                    next = go(child, on_true, next, succ);
                }
                next
            }
        }
    }
    let placeholder = Successors { then: Node::ONE, otherwise: Node::ZERO };
    let mut succ = vec![placeholder; e.len()];
    go(e.tree(), Node::ONE, Node::ZERO, &mut succ);
    Bdd { succ, negated: e.conditions().iter().map(|c| c.negated).collect() }
}
