//! The `comb` command line: parse, unfold, run, normalize and compare circuits.
//!
//! Exit codes: 0 success, 1 syntax error, 2 type error, 3 unequal (or a failing law),
//! 4 unsupported backend or feature, 5 input/output or usage error.

use std::fmt::Write;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::backend::{parse_tuple, Backend, Object, RationalJson};
use crate::bundled;
use crate::cartesian::{causal_form, extract_state_stream, StateFamily};
use crate::dsl::{self, Diagnostic, DiagnosticKind};
use crate::finite::{FiniteComb, Verdict};
use crate::laws::{laws_for, run_law};
use crate::stream::{behavior_equal, StreamComb};
use crate::Error;

pub const EXIT_SYNTAX: i32 = 1;
pub const EXIT_TYPE: i32 = 2;
pub const EXIT_UNEQUAL: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Largest number of input tuples a behavior trace lists for one stage.
const MAX_TRACE_ROWS: usize = 1 << 14;

#[derive(Parser, Debug)]
#[command(name = "comb", version, about = "Unfold, run, normalize and compare comb circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a circuit and print it in canonical form.
    Parse { file: String },
    /// Print the open comb of stages 0..=N as JSON.
    Unfold {
        file: String,
        #[arg(long)]
        comb: Option<String>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Print the state stream (unit inputs) or the behavior trace of stages 0..=N.
    Run {
        file: String,
        #[arg(long)]
        comb: Option<String>,
        #[arg(long, default_value_t = 9)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print the causal form of stages 0..=N (cartesian backends).
    Normalize {
        file: String,
        #[arg(long)]
        comb: Option<String>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Compare two combs on stages 0..=N.
    Eq {
        file: String,
        /// A second source; the second --comb is looked up there.
        other: Option<String>,
        #[arg(long = "comb")]
        combs: Vec<String>,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Run the randomized law suites. COMB_SEED overrides --seed.
    Laws {
        #[arg(long, default_value = "finfn")]
        backend: Backend,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Print a bundled circuit, or list them.
    Examples { name: Option<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Exit status and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn diagnostic(file: &str, d: &Diagnostic) -> Failure {
        let code = match d.kind {
            DiagnosticKind::Syntax => EXIT_SYNTAX,
            DiagnosticKind::Type => EXIT_TYPE,
            DiagnosticKind::Unsupported => EXIT_UNSUPPORTED,
        };
        Failure::new(code, d.render(file))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if e.is_unsupported() { EXIT_UNSUPPORTED } else { EXIT_TYPE };
        Failure::new(code, e.to_string())
    }
}

type Run<T> = Result<T, Failure>;

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_IO, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let mut stdout = String::new();
    match dispatch(cli.command, &mut stdout) {
        Ok(code) => Outcome { code, stdout, stderr: String::new() },
        Err(f) => Outcome {
            code: f.code,
            stdout,
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn dispatch(command: Command, out: &mut String) -> Run<i32> {
    match command {
        Command::Parse { file } => {
            let src = Source::load(&file)?;
            out.push_str(&dsl::print(&src.program()?));
            Ok(0)
        }
        Command::Unfold { file, comb, depth } => {
            let c = Source::load(&file)?.comb(comb.as_deref())?;
            let finite = c.truncate(depth)?;
            push_json(out, &serde_json::to_value(&finite).map_err(io)?);
            Ok(0)
        }
        Command::Run { file, comb, depth, format } => {
            let c = Source::load(&file)?.comb(comb.as_deref())?;
            run_comb(&c, depth, format, out)?;
            Ok(0)
        }
        Command::Normalize { file, comb, depth } => {
            let src = Source::load(&file)?;
            let form = if let Some(finite) = src.finite()? {
                cartesian_only(finite.backend())?;
                finite.normal_form_cartesian()?
            } else {
                let c = src.comb(comb.as_deref())?;
                cartesian_only(c.backend())?;
                causal_form(&c, depth)?
            };
            push_json(out, &serde_json::to_value(&form).map_err(io)?);
            Ok(0)
        }
        Command::Eq { file, other, combs, depth } => eq(&file, other.as_deref(), &combs, depth, out),
        Command::Laws { backend, seed, cases, depth } => {
            let seed = match std::env::var("COMB_SEED") {
                Ok(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| Failure::new(EXIT_IO, format!("COMB_SEED must be an unsigned integer, found {s:?}")))?,
                Err(_) => seed,
            };
            let mut all = true;
            for (law, check) in laws_for(backend) {
                let report = run_law(law, check, backend, seed, cases, depth, 3);
                all &= report.passed();
                let _ = writeln!(out, "{report}");
            }
            let _ = writeln!(out, "backend {backend}, seed {seed}, {cases} cases, depth {depth}");
            Ok(if all { 0 } else { EXIT_UNEQUAL })
        }
        Command::Examples { name: None } => {
            for name in bundled::NAMES {
                let _ = writeln!(out, "{name}");
            }
            Ok(0)
        }
        Command::Examples { name: Some(name) } => {
            let text = bundled::source(&name).ok_or_else(|| {
                Failure::new(EXIT_IO, format!("no bundled example '{name}' (available: {})", bundled::NAMES.join(", ")))
            })?;
            out.push_str(text);
            Ok(0)
        }
    }
}

fn io(e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_IO, e.to_string())
}

fn cartesian_only(b: Backend) -> Run<()> {
    if b.is_cartesian() {
        Ok(())
    } else {
        Err(Error::unsupported("normalization to causal form", b).into())
    }
}

fn push_json(out: &mut String, v: &Value) {
    out.push_str(&serde_json::to_string_pretty(v).expect("JSON values serialize"));
    out.push('\n');
}

/// Prints records as a JSON array with one record per line.
fn push_records(out: &mut String, records: &[Value]) {
    out.push_str("[\n");
    for (i, r) in records.iter().enumerate() {
        out.push_str(&r.to_string());
        out.push_str(if i + 1 < records.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
}

struct Source {
    file: String,
    text: String,
}

impl Source {
    /// Reads a file, falling back to the bundled example of that name.
    fn load(file: &str) -> Run<Source> {
        let text = match std::fs::read_to_string(file) {
            Ok(text) => text,
            Err(e) => match bundled::source(file) {
                Some(text) => text.to_string(),
                None => return Err(Failure::new(EXIT_IO, format!("cannot read {file}: {e}"))),
            },
        };
        Ok(Source {
            file: file.to_string(),
            text,
        })
    }

    fn is_json(&self) -> bool {
        self.text.trim_start().starts_with('{')
    }

    /// The finite comb in a JSON source, if it is one.
    fn finite(&self) -> Run<Option<FiniteComb>> {
        if !self.is_json() {
            return Ok(None);
        }
        serde_json::from_str(&self.text)
            .map(Some)
            .map_err(|e| Failure::new(EXIT_TYPE, format!("{}: not a finite comb: {e}", self.file)))
    }

    fn program(&self) -> Run<dsl::ast::Program> {
        dsl::parse(&self.text).map_err(|d| Failure::diagnostic(&self.file, &d))
    }

    /// The named comb, or the last one declared.
    fn comb(&self, name: Option<&str>) -> Run<StreamComb> {
        if self.is_json() {
            return Err(Failure::new(
                EXIT_UNSUPPORTED,
                format!("{}: finite comb files are accepted by normalize and eq only", self.file),
            ));
        }
        let circuit = dsl::elaborate_program(&self.program()?).map_err(|d| Failure::diagnostic(&self.file, &d))?;
        match name {
            Some(n) => circuit.comb(n).cloned().ok_or_else(|| {
                Failure::new(
                    EXIT_TYPE,
                    format!("{}: no comb named '{n}' (declared: {})", self.file, circuit.comb_names().join(", ")),
                )
            }),
            None => circuit
                .last_comb()
                .map(|(_, c)| c.clone())
                .ok_or_else(|| Failure::new(EXIT_TYPE, format!("{}: the program declares no comb", self.file))),
        }
    }
}

fn eq(file: &str, other: Option<&str>, combs: &[String], depth: usize, out: &mut String) -> Run<i32> {
    if combs.len() > 2 {
        return Err(Failure::new(EXIT_IO, "eq compares two combs; give --comb at most twice"));
    }
    let first = Source::load(file)?;
    let second = match other {
        Some(f) => Source::load(f)?,
        None if combs.len() == 2 => Source::load(file)?,
        None => return Err(Failure::new(EXIT_IO, "eq needs two --comb names or a second file")),
    };
    let verdict = match (first.finite()?, second.finite()?) {
        (Some(a), Some(b)) => {
            if a.backend().is_cartesian() {
                a.equal_cartesian(&b)?
            } else {
                a.behavior_equal_probe(&b)?
            }
        }
        (None, None) => {
            let a = first.comb(combs.first().map(String::as_str))?;
            let b = second.comb(combs.get(1).map(String::as_str))?;
            behavior_equal(&a, &b, depth)?
        }
        _ => return Err(Failure::new(EXIT_TYPE, "cannot compare a finite comb file with a circuit")),
    };
    match verdict {
        Verdict::Equal => {
            let _ = writeln!(out, "equal");
            Ok(0)
        }
        v => {
            let _ = writeln!(out, "{v}");
            Ok(EXIT_UNEQUAL)
        }
    }
}

fn run_comb(c: &StreamComb, depth: usize, format: Format, out: &mut String) -> Run<()> {
    let state = (0..=depth).all(|n| c.inputs().at(n).is_unit());
    if state {
        let sf = extract_state_stream(c, depth)?;
        match (format, &sf) {
            (Format::Json, _) => push_records(out, &sf.records()),
            (Format::Csv, StateFamily::Values(values)) => {
                out.push_str("stage,wire,value\n");
                for (n, v) in values.iter().enumerate() {
                    for (w, atom) in parse_tuple(v).iter().enumerate() {
                        let _ = writeln!(out, "{n},{w},{atom}");
                    }
                }
            }
            (Format::Csv, StateFamily::Distributions(_)) => {
                return Err(Failure::new(EXIT_UNSUPPORTED, "distributions are printed as JSON only"))
            }
        }
        return Ok(());
    }
    if format == Format::Csv {
        return Err(Failure::new(EXIT_UNSUPPORTED, "behavior traces are printed as JSON only"));
    }
    let records = match c.backend() {
        Backend::BigFn => {
            return Err(Error::unsupported("behavior traces over integer inputs", Backend::BigFn).into())
        }
        Backend::FinFn => {
            let cf = causal_form(c, depth)?;
            let mut records = Vec::new();
            for (n, h) in cf.maps().iter().enumerate() {
                for i in 0..trace_rows(h.domain(), n)? {
                    records.push(json!({
                        "stage": n,
                        "inputs": split_labels(&c.inputs().take(n + 1), i)?,
                        "outputs": h.codomain().element_label(h.apply(i)),
                    }));
                }
            }
            records
        }
        Backend::FinStoch => {
            let joints = c.truncate(depth)?.joint_behaviors()?;
            let outputs = c.outputs().take(depth + 1);
            let mut records = Vec::new();
            for (n, j) in joints.iter().enumerate() {
                let kernel = j.kernel().expect("stochastic maps are kernels");
                for i in 0..trace_rows(j.domain(), n)? {
                    let support = kernel
                        .row(i)
                        .iter()
                        .map(|(col, p)| Ok(json!([split_labels(&outputs[..=n], *col)?, RationalJson::from(p)])))
                        .collect::<Run<Vec<Value>>>()?;
                    records.push(json!({
                        "stage": n,
                        "inputs": split_labels(&c.inputs().take(n + 1), i)?,
                        "joint_distribution": support,
                    }));
                }
            }
            records
        }
    };
    push_records(out, &records);
    Ok(())
}

fn trace_rows(domain: &Object, stage: usize) -> Run<usize> {
    let rows = domain.size()?;
    if rows > MAX_TRACE_ROWS {
        return Err(Failure::new(
            EXIT_UNSUPPORTED,
            format!("stage {stage} has {rows} input histories; lower --depth (limit {MAX_TRACE_ROWS})"),
        ));
    }
    Ok(rows)
}

/// Splits an element index of `Z₀ ⊗ … ⊗ Zₙ` into one label per stage.
fn split_labels(stages: &[Object], mut index: usize) -> Run<Vec<String>> {
    let mut labels = vec![String::new(); stages.len()];
    for (k, z) in stages.iter().enumerate().rev() {
        let size = z.size()?;
        labels[k] = z.element_label(index % size);
        index /= size;
    }
    Ok(labels)
}
