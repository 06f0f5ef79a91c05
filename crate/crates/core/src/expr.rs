//! Decision expressions: parsing, negation push-down and condition indexing.
//!
//! The accepted grammar is the usual infix Boolean one:
//!
//! ```text
//! or      := and ( "||" and )*
//! and     := unary ( "&&" unary )*
//! unary   := "!" unary | primary
//! primary := IDENT | "(" or ")"
//! ```
//!
//! Every occurrence of an identifier is its own basic condition, so
//! `a && b || a` has three conditions.

use std::fmt;

use crate::error::{Error, Result};

/// Width of the condition bitsets used by the masking table and the runtime.
pub const MAX_CONDITIONS: usize = 64;

/// A parsed decision as written in the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Condition(String),
}

impl Expr {
    pub fn condition(label: impl Into<String>) -> Self {
        Expr::Condition(label.into())
    }

    pub fn negate(self) -> Self {
        Expr::Not(Box::new(self))
    }

    /// Number of condition leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            Expr::And(children) | Expr::Or(children) => children.iter().map(Expr::leaf_count).sum(),
            Expr::Not(child) => child.leaf_count(),
            Expr::Condition(_) => 1,
        }
    }

    /// Evaluates the expression with raw variable values supplied by `lookup`.
    pub fn eval_with<F: FnMut(&str) -> bool>(&self, lookup: &mut F) -> bool {
        match self {
            Expr::And(children) => children.iter().fold(true, |acc, c| c.eval_with(lookup) & acc),
            Expr::Or(children) => children.iter().fold(false, |acc, c| c.eval_with(lookup) | acc),
            Expr::Not(child) => !child.eval_with(lookup),
            Expr::Condition(label) => lookup(label),
        }
    }

    /// Distinct labels in first-occurrence order.
    pub fn labels(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::And(children) | Expr::Or(children) => children.iter().for_each(|c| walk(c, out)),
                Expr::Not(child) => walk(child, out),
                Expr::Condition(label) => {
                    if !out.contains(&label.as_str()) {
                        out.push(label);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(_) => 0,
            Expr::And(_) => 1,
            Expr::Not(_) | Expr::Condition(_) => 2,
        }
    }

    fn fmt_child(&self, child: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if child.precedence() <= self.precedence() {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::And(children) | Expr::Or(children) => {
                let op = if matches!(self, Expr::And(_)) { " && " } else { " || " };
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    self.fmt_child(child, f)?;
                }
                Ok(())
            }
            Expr::Not(child) => {
                f.write_str("!")?;
                if child.precedence() < 2 {
                    write!(f, "({child})")
                } else {
                    write!(f, "{child}")
                }
            }
            Expr::Condition(label) => f.write_str(label),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Ident(&'a str),
    Not,
    And,
    Or,
    Open,
    Close,
}

impl Token<'_> {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::Not => "`!`".into(),
            Token::And => "`&&`".into(),
            Token::Or => "`||`".into(),
            Token::Open => "`(`".into(),
            Token::Close => "`)`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token<'_>)>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        let start = pos;
        let token = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                pos += 1;
                continue;
            }
            b'!' => Token::Not,
            b'(' => Token::Open,
            b')' => Token::Close,
            b'&' | b'|' => {
                if bytes.get(pos + 1) != Some(&c) {
                    let expected = if c == b'&' { "`&&`" } else { "`||`" };
                    return Err(Error::Syntax { position: pos, expected: expected.into() });
                }
                pos += 1;
                if c == b'&' {
                    Token::And
                } else {
                    Token::Or
                }
            }
            c if c == b'_' || c.is_ascii_alphabetic() => {
                while pos + 1 < bytes.len() && (bytes[pos + 1] == b'_' || bytes[pos + 1].is_ascii_alphanumeric()) {
                    pos += 1;
                }
                Token::Ident(&text[start..=pos])
            }
            _ => {
                return Err(Error::Syntax {
                    position: pos,
                    expected: "a condition, an operator or a parenthesis".into(),
                })
            }
        };
        tokens.push((start, token));
        pos += 1;
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token<'a>)>,
    cursor: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.cursor).map(|&(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |&(p, _)| p)
    }

    fn error(&self, expected: &str) -> Error {
        let expected = match self.peek() {
            Some(found) => format!("{expected}, found {}", found.describe()),
            None => format!("{expected}, found end of input"),
        };
        Error::Syntax { position: self.position(), expected }
    }

    fn binary(&mut self, op: Token<'a>) -> Result<Expr> {
        let operand = |p: &mut Self| if op == Token::Or { p.binary(Token::And) } else { p.unary() };
        let first = operand(self)?;
        let mut operands = vec![first];
        while self.peek() == Some(op) {
            self.cursor += 1;
            operands.push(operand(self)?);
        }
        Ok(match (operands.len(), op) {
            (1, _) => operands.pop().unwrap(),
            (_, Token::Or) => Expr::Or(operands),
            _ => Expr::And(operands),
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Not) => {
                self.cursor += 1;
                Ok(self.unary()?.negate())
            }
            Some(Token::Open) => {
                self.cursor += 1;
                let inner = self.binary(Token::Or)?;
                if self.peek() != Some(Token::Close) {
                    return Err(self.error("`)`"));
                }
                self.cursor += 1;
                Ok(inner)
            }
            Some(Token::Ident(label)) => {
                if label == "true" || label == "false" {
                    return Err(Error::Syntax {
                        position: self.position(),
                        expected: format!("a condition, found constant `{label}`"),
                    });
                }
                self.cursor += 1;
                Ok(Expr::condition(label))
            }
            _ => Err(self.error("a condition, `!` or `(`")),
        }
    }
}

/// Parses decision text into an [`Expr`].
pub fn parse(text: &str) -> Result<Expr> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut parser = Parser { tokens, cursor: 0, end: text.len() };
    let expr = parser.binary(Token::Or)?;
    if parser.peek().is_some() {
        return Err(parser.error("`&&`, `||` or end of input"));
    }
    Ok(expr)
}

/// One basic condition of a normalized decision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    /// 1-based occurrence index.
    pub index: usize,
    pub label: String,
    /// The condition's outcome is the negation of the raw variable.
    pub negated: bool,
}

/// Normalized decision tree. Leaves hold condition indices; there is no
/// negation node and no operator node has a child with the same operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    And(Vec<Tree>),
    Or(Vec<Tree>),
    Leaf(usize),
}

impl Tree {
    /// Full (non short-circuit) evaluation over condition outcomes.
    pub fn eval(&self, outcome: &impl Fn(usize) -> bool) -> bool {
        match self {
            Tree::And(children) => children.iter().all(|c| c.eval(outcome)),
            Tree::Or(children) => children.iter().any(|c| c.eval(outcome)),
            Tree::Leaf(index) => outcome(*index),
        }
    }

    /// Index range `first..=last` of the leaves under this node.
    pub fn span(&self) -> (usize, usize) {
        match self {
            Tree::And(children) | Tree::Or(children) => (children[0].span().0, children[children.len() - 1].span().1),
            Tree::Leaf(index) => (*index, *index),
        }
    }
}

/// A decision with negations pushed to the leaves and conditions indexed
/// `1..=N` in occurrence order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexedExpr {
    tree: Tree,
    conditions: Vec<Condition>,
}

impl IndexedExpr {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    /// Conditions in index order; `conditions()[i - 1].index == i`.
    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn condition(&self, index: usize) -> &Condition {
        &self.conditions[index - 1]
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    /// Decision value for a vector of condition outcomes.
    pub fn evaluate(&self, v: &InputVector) -> Result<bool> {
        self.check_len(v)?;
        Ok(self.tree.eval(&|i| v.value(i)))
    }

    pub fn check_len(&self, v: &InputVector) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: v.len() });
        }
        Ok(())
    }

    /// Translates raw variable values into condition outcomes.
    pub fn outcomes_from_raw<F: FnMut(&str) -> bool>(&self, mut raw: F) -> InputVector {
        InputVector::new(self.conditions.iter().map(|c| raw(&c.label) ^ c.negated).collect())
    }

    /// Re-expresses the normalized tree as an [`Expr`], with negated
    /// polarities written as `!label` leaves.
    pub fn to_expr(&self) -> Expr {
        fn build(tree: &Tree, conditions: &[Condition]) -> Expr {
            match tree {
                Tree::And(children) => Expr::And(children.iter().map(|c| build(c, conditions)).collect()),
                Tree::Or(children) => Expr::Or(children.iter().map(|c| build(c, conditions)).collect()),
                Tree::Leaf(index) => {
                    let c = &conditions[index - 1];
                    let leaf = Expr::condition(c.label.clone());
                    if c.negated {
                        leaf.negate()
                    } else {
                        leaf
                    }
                }
            }
        }
        build(&self.tree, &self.conditions)
    }
}

impl fmt::Display for IndexedExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Op {
    And,
    Or,
}

struct Normalizer {
    conditions: Vec<Condition>,
}

impl Normalizer {
    fn push(&mut self, e: &Expr, negate: bool) -> Tree {
        match e {
            Expr::Not(child) => self.push(child, !negate),
            Expr::Condition(label) => {
                let index = self.conditions.len() + 1;
                self.conditions.push(Condition { index, label: label.clone(), negated: negate });
                Tree::Leaf(index)
            }
            Expr::And(children) | Expr::Or(children) => {
                let is_and = matches!(e, Expr::And(_));
                // De Morgan: a negated conjunction is a disjunction of negations.
                let op = if is_and != negate { Op::And } else { Op::Or };
                let mut flat = Vec::with_capacity(children.len());
                for child in children {
                    match (self.push(child, negate), op) {
                        (Tree::And(grand), Op::And) | (Tree::Or(grand), Op::Or) => flat.extend(grand),
                        (t, _) => flat.push(t),
                    }
                }
                match op {
                    Op::And => Tree::And(flat),
                    Op::Or => Tree::Or(flat),
                }
            }
        }
    }
}

/// Pushes negations to the leaves, flattens nested same-operator nodes and
/// indexes the conditions.
pub fn normalize(e: &Expr) -> Result<IndexedExpr> {
    let count = e.leaf_count();
    if count > MAX_CONDITIONS {
        return Err(Error::TooManyConditions { count });
    }
    let mut normalizer = Normalizer { conditions: Vec::with_capacity(count) };
    let tree = normalizer.push(e, false);
    Ok(IndexedExpr { tree, conditions: normalizer.conditions })
}

/// Parses and normalizes in one step.
pub fn compile(text: &str) -> Result<IndexedExpr> {
    normalize(&parse(text)?)
}

/// Outcomes of the basic conditions, condition 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InputVector(Vec<bool>);

impl InputVector {
    pub fn new(values: Vec<bool>) -> Self {
        InputVector(values)
    }

    /// Decodes `bits` with condition 1 as the most significant of `n` bits.
    pub fn from_index(bits: u64, n: usize) -> Self {
        InputVector((1..=n).map(|i| (bits >> (n - i)) & 1 == 1).collect())
    }

    /// Inverse of [`InputVector::from_index`]; only meaningful for `len() <= 64`.
    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Outcome of condition `index` (1-based).
    pub fn value(&self, index: usize) -> bool {
        self.0[index - 1]
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn flipped(&self, index: usize) -> Self {
        let mut values = self.0.clone();
        values[index - 1] = !values[index - 1];
        InputVector(values)
    }
}

impl From<Vec<bool>> for InputVector {
    fn from(values: Vec<bool>) -> Self {
        InputVector(values)
    }
}

impl fmt::Display for InputVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
