//! Test suites and the plain-text vector file format.
//!
//! One vector per line, values `0` or `1` separated by whitespace or commas.
//! `#` starts a comment that runs to the end of the line; blank lines are
//! ignored.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::InputVector;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TestSuite {
    vectors: Vec<InputVector>,
    // 1-based source line of each vector; positional for generated suites.
    lines: Vec<usize>,
}

impl TestSuite {
    pub fn new(vectors: Vec<InputVector>) -> Self {
        let lines = (1..=vectors.len()).collect();
        TestSuite { vectors, lines }
    }

    pub fn push(&mut self, v: InputVector) {
        self.lines.push(self.vectors.len() + 1);
        self.vectors.push(v);
    }

    pub fn vectors(&self) -> &[InputVector] {
        &self.vectors
    }

    pub fn line(&self, i: usize) -> usize {
        self.lines[i]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &InputVector> {
        self.vectors.iter()
    }

    /// Number of vectors that repeat an earlier one.
    pub fn duplicates(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        self.vectors.iter().filter(|v| !seen.insert(*v)).count()
    }
}

impl fmt::Display for TestSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vectors {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Parses a vector file for a decision with `n` conditions.
pub fn parse_vectors(text: &str, n: usize) -> Result<TestSuite> {
    let mut suite = TestSuite::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let data = raw.split('#').next().unwrap_or("");
        let mut values = Vec::new();
        for token in data.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            match token {
                "0" => values.push(false),
                "1" => values.push(true),
                _ => return Err(Error::BadToken { line, token: token.to_string() }),
            }
        }
        if values.is_empty() {
            continue;
        }
        if values.len() != n {
            return Err(Error::WrongArity { line, expected: n, got: values.len() });
        }
        suite.vectors.push(InputVector::new(values));
        suite.lines.push(line);
    }
    Ok(suite)
}
