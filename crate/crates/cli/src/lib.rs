//! `mcdc` command-line tool. [`run`] is the whole program minus process
//! plumbing so it can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mcdc_core::masking::pseudo_terminals;
use mcdc_core::oracle::{self, CheckMode, CoveredOutcomes, EXHAUSTIVE_LIMIT};
use mcdc_core::{parse_vectors, report, run_suite, Decision, Strategy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// Ran fine, but coverage is incomplete or a check found mismatches.
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mcdc", version, about = "Masking MC/DC analysis of Boolean decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the evaluation graph, pseudo-terminals and masking table.
    Analyze { expr: String },
    /// Print the evaluation graph in Graphviz DOT.
    Dot { expr: String },
    /// Execute a vector file and report coverage.
    Run {
        expr: String,
        #[arg(long)]
        vectors: PathBuf,
    },
    /// Compare the instrumentation against the brute-force oracle.
    Check {
        expr: String,
        #[arg(long, conflicts_with = "exhaustive")]
        vectors: Option<PathBuf>,
        #[arg(long)]
        exhaustive: bool,
    },
    /// Generate an oracle-verified test suite.
    Generate {
        expr: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check random decisions against the oracle.
    Fuzz {
        #[arg(long)]
        conditions: usize,
        #[arg(long)]
        iterations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Runs the tool on `args` (including the program name) and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(err, "mcdc: {message}");
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Analyze { expr } => analyze(&expr, out),
        Command::Dot { expr } => {
            let d = Decision::compile(&expr)?;
            out.write_all(d.bdd.to_dot().as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Run { expr, vectors } => run_vectors(&expr, &vectors, out),
        Command::Check { expr, vectors, exhaustive } => check(&expr, vectors, exhaustive, out),
        Command::Generate { expr, out: path } => generate(&expr, path, out),
        Command::Fuzz { conditions, iterations, seed } => fuzz(conditions, iterations, seed, out),
    }
}

fn analyze(text: &str, out: &mut dyn Write) -> Outcome {
    let d = Decision::compile(text)?;
    writeln!(out, "expression: {}", d.expr)?;
    writeln!(out, "conditions: {}", d.len())?;
    for c in d.expr.conditions() {
        writeln!(out, "  x{}  {}{}", c.index, if c.negated { "!" } else { "" }, c.label)?;
    }
    writeln!(out)?;
    out.write_all(d.bdd.render_table().as_bytes())?;
    writeln!(out)?;
    let pseudo: Vec<String> = pseudo_terminals(&d.bdd).iter().map(ToString::to_string).collect();
    writeln!(out, "pseudo-terminals: {}", if pseudo.is_empty() { "none".into() } else { pseudo.join(", ") })?;
    writeln!(out)?;
    out.write_all(d.table.render().as_bytes())?;
    Ok(EXIT_OK)
}

fn read_suite(path: &PathBuf, n: usize) -> std::result::Result<mcdc_core::TestSuite, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_vectors(&text, n).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn run_vectors(text: &str, path: &PathBuf, out: &mut dyn Write) -> Outcome {
    let d = Decision::compile(text)?;
    let suite = read_suite(path, d.len())?;
    let acc = run_suite(&d.bdd, &d.table, suite.vectors(), Strategy::default())?;
    let r = report(&d.expr, &d.bdd, &acc);
    write!(out, "{r}")?;
    Ok(if r.is_mcdc_complete() { EXIT_OK } else { EXIT_PARTIAL })
}

fn render_outcomes(c: &CoveredOutcomes) -> String {
    let pairs: Vec<String> = c.pairs().iter().map(|(i, o)| format!("x{i}={}", *o as u8)).collect();
    if pairs.is_empty() {
        "-".into()
    } else {
        pairs.join(" ")
    }
}

fn check(text: &str, vectors: Option<PathBuf>, exhaustive: bool, out: &mut dyn Write) -> Outcome {
    let d = Decision::compile(text)?;
    let mode = match vectors {
        Some(path) => CheckMode::Listed(read_suite(&path, d.len())?.vectors().to_vec()),
        None if exhaustive => {
            if d.len() > EXHAUSTIVE_LIMIT {
                return Err(Failure(format!(
                    "--exhaustive supports at most {EXHAUSTIVE_LIMIT} conditions, decision has {}",
                    d.len()
                )));
            }
            CheckMode::Exhaustive
        }
        None => CheckMode::auto(d.len(), 0),
    };
    let r = oracle::differential_check(&d.expr, &d.bdd, &d.table, &mode, Strategy::default())?;
    for m in &r.mismatches {
        writeln!(
            out,
            "mismatch: {}  oracle: {}  instrumented: {}",
            m.vector,
            render_outcomes(&m.oracle),
            render_outcomes(&m.instrumented)
        )?;
    }
    writeln!(out, "{} vectors checked, {} mismatches", r.checked, r.mismatches.len())?;
    Ok(if r.passed() { EXIT_OK } else { EXIT_PARTIAL })
}

fn generate(text: &str, path: Option<PathBuf>, out: &mut dyn Write) -> Outcome {
    let d = Decision::compile(text)?;
    let (suite, missing) = match oracle::generate_suite(&d.expr, &d.bdd, &d.table, Strategy::default())? {
        Ok(suite) => (suite, Vec::new()),
        Err(unreachable) => (unreachable.suite, unreachable.missing),
    };
    let mut body = format!("# {}\n# {} conditions, {} vectors\n", d.expr, d.len(), suite.len());
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(|(i, o)| format!("x{i}={}", *o as u8)).collect();
        body.push_str(&format!("# not covered: {}\n", names.join(" ")));
    }
    body.push_str(&suite.to_string());
    match path {
        Some(p) => {
            fs::write(&p, &body).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
            writeln!(out, "wrote {} vectors to {}", suite.len(), p.display())?;
        }
        None => out.write_all(body.as_bytes())?,
    }
    Ok(if missing.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

fn fuzz(conditions: usize, iterations: u64, seed: u64, out: &mut dyn Write) -> Outcome {
    if !(1..=mcdc_core::expr::MAX_CONDITIONS).contains(&conditions) {
        return Err(Failure(format!("--conditions must be between 1 and {}", mcdc_core::expr::MAX_CONDITIONS)));
    }
    let results = Strategy::default().map_range(iterations, |k| {
        let s = seed.wrapping_add(k);
        let text = oracle::random_expr(s, conditions);
        let d = Decision::compile(&text).map_err(|e| e.to_string())?;
        oracle::differential_check(&d.expr, &d.bdd, &d.table, &CheckMode::auto(conditions, s), Strategy::Sequential)
            .map(|r| (s, text, r))
            .map_err(|e| e.to_string())
    });
    let mut failures = 0;
    for r in results {
        let (s, text, report) = r.map_err(Failure)?;
        if !report.passed() {
            failures += 1;
            writeln!(out, "FAIL seed={s} mismatches={}: {text}", report.mismatches.len())?;
        }
    }
    writeln!(out, "{iterations} iterations, {failures} failures")?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_PARTIAL })
}
