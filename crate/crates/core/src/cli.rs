//! The `qpl` command line: `check`, `run`, `enumerate`, `denote`, `verify`.
//!
//! [`execute`] does all the work and returns the text to print with the
//! exit code, so the binary stays a two-liner and tests can call it directly.
//! Exit codes: 0 ok, 1 static error, 2 verification failure, 3 runtime or
//! capacity error.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value as Json};

use crate::ast::{Type, Value};
use crate::denotational::{Denoter, StateDenotation, Warning};
use crate::operational::{Configuration, Machine, OpError};
use crate::parser::{parse_program, Program};
use crate::qmath::{CMatrix, GateRegistry, QMathError, DEFAULT_MAX_QUBITS};
use crate::typecheck::show_context;
use crate::verify::{CheckRecord, Params, Status, VerificationReport, Verifier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Check,
    Run,
    Enumerate,
    Denote,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "qpl", version, about = "Run and verify quantum programs with inductive datatypes")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    pub file: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,
    /// Truncation depth for recursive types.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Kleene iterations for loops and procedures.
    #[arg(long, default_value_t = 64)]
    pub fix_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// JSON gate registry: `{ name: { arity, matrix: [[[re, im], ...], ...] } }`.
    #[arg(long)]
    pub gates: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    pub max_qubits: usize,
    /// Write the reduction tree of `enumerate` here (`.dot` for Graphviz, JSON otherwise).
    #[arg(long)]
    pub tree: Option<PathBuf>,
}

/// What to print and how to exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn err(code: i32, msg: impl std::fmt::Display) -> Outcome {
        Outcome { code, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

fn op_code(e: &OpError) -> i32 {
    match e {
        OpError::IllFormed(_) => 1,
        _ => 3,
    }
}

fn load(cli: &Cli) -> Result<(GateRegistry, Program), Outcome> {
    let gates = match &cli.gates {
        None => GateRegistry::builtin(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Outcome::err(1, format!("{}: {e}", path.display())))?;
            GateRegistry::from_json(&text).map_err(|e| gate_failure(cli, &e))?
        }
    };
    let src = std::fs::read_to_string(&cli.file).map_err(|e| Outcome::err(1, format!("{}: {e}", cli.file.display())))?;
    let program = parse_program(&src).map_err(|e| Outcome::err(1, format!("{}: {e}", cli.file.display())))?;
    Ok((gates, program))
}

/// A bad registry is a static error, except under `verify` where it is a
/// failing check.
fn gate_failure(cli: &Cli, e: &QMathError) -> Outcome {
    if cli.command != Command::Verify {
        return Outcome::err(1, e);
    }
    let mut report = VerificationReport::new(&cli.file.display().to_string());
    let mut r = CheckRecord {
        name: "gates".into(),
        status: Status::Fail,
        max_error: match e {
            QMathError::NotUnitary { error, .. } => *error,
            _ => f64::NAN,
        },
        tolerance: cli.tol,
        params: params(cli),
        metrics: Default::default(),
        note: e.to_string(),
    };
    if r.max_error.is_nan() {
        r.max_error = 0.0;
    }
    report.push(r);
    Outcome { code: 2, stdout: render_report(cli, &report), stderr: String::new() }
}

fn params(cli: &Cli) -> Params {
    Params { k: cli.depth, fix_iters: cli.fix_iters, max_steps: cli.max_steps, tol: cli.tol }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let (gates, program) = match load(cli) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let config = Configuration::from_program(&program);
    let machine = Machine::new(gates.clone(), cli.max_qubits);
    let witness = match machine.checker().check_config(&config) {
        Ok(w) => w,
        Err(e) => return Outcome::err(1, format!("{}: {e}", cli.file.display())),
    };
    match cli.command {
        Command::Check => {
            let sigs: Vec<(String, String)> = witness
                .procs
                .iter()
                .map(|(f, s)| {
                    let name = match s.bound {
                        Some(n) => format!("{f}^{n}"),
                        None => f.clone(),
                    };
                    (name, format!("{} -> {}", s.input, s.output))
                })
                .collect();
            let main = format!("<{}> -> <{}>", show_context(&witness.input), show_context(&witness.output));
            match cli.format {
                Format::Text => {
                    let mut out = String::new();
                    for (f, s) in &sigs {
                        let _ = writeln!(out, "{f} : {s}");
                    }
                    let _ = writeln!(out, "main : {main}");
                    Outcome::ok(out)
                }
                Format::Json => {
                    let procs: serde_json::Map<String, Json> = sigs.into_iter().map(|(f, s)| (f, Json::String(s))).collect();
                    Outcome::ok(crate::json::to_string(&json!({ "procedures": procs, "main": main })) + "\n")
                }
            }
        }
        Command::Run => {
            let m = Machine { step_cap: cli.max_steps, ..machine };
            match m.sample(&config, cli.seed) {
                Ok(s) => {
                    let rho = s.config.rho.matrix().clone();
                    Outcome::ok(match cli.format {
                        Format::Text => {
                            let mut out = String::new();
                            let _ = writeln!(out, "seed: {}", cli.seed);
                            let _ = writeln!(out, "steps: {}", s.steps);
                            let _ = writeln!(out, "probability: {:.16e}", s.probability);
                            let _ = writeln!(out, "outcomes: {}", s.choices.iter().map(u8::to_string).collect::<String>());
                            let _ = writeln!(out, "terminal: {}", s.config.term);
                            let _ = writeln!(out, "assignment: {}", s.config.show_assignment());
                            let _ = write!(out, "{}", show_matrix("rho", &rho));
                            out
                        }
                        Format::Json => {
                            crate::json::to_string(&json!({
                                "seed": cli.seed,
                                "steps": s.steps,
                                "probability": s.probability,
                                "outcomes": s.choices,
                                "terminal": s.config.term.to_string(),
                                "assignment": assignment_json(&s.config),
                                "rho": matrix_json(&rho),
                            })) + "\n"
                        }
                    })
                }
                Err(e) => Outcome::err(op_code(&e), e),
            }
        }
        Command::Enumerate => {
            let e = match machine.enumerate(&config, cli.max_steps) {
                Ok(e) => e,
                Err(e) => return Outcome::err(op_code(&e), e),
            };
            if let Some(path) = &cli.tree {
                let tree = match machine.reduction_tree(&config, cli.max_steps, 100_000) {
                    Ok(t) => t,
                    Err(e) => return Outcome::err(op_code(&e), e),
                };
                let text = if path.extension().is_some_and(|x| x == "dot") {
                    tree.to_dot()
                } else {
                    crate::json::to_string(&tree.to_json())
                };
                if let Err(err) = std::fs::write(path, text) {
                    return Outcome::err(3, format!("{}: {err}", path.display()));
                }
            }
            let groups = e.grouped();
            Outcome::ok(match cli.format {
                Format::Text => {
                    let mut out = String::new();
                    let _ = writeln!(out, "terminals: {} in {} groups", e.leaves.len(), groups.len());
                    for g in &groups {
                        let _ = writeln!(
                            out,
                            "  {:.16e}  x{:<4} from step {:<6} {}",
                            g.mass, g.count, g.min_steps, g.assignment
                        );
                    }
                    let _ = writeln!(out, "halt lower bound: {:.16e}", e.halt_lower_bound);
                    let _ = writeln!(out, "frontier mass: {:.16e}", e.frontier_mass);
                    if !e.zero_leaves.is_empty() {
                        let _ = writeln!(out, "zero mass: {:.16e}", e.zero_mass);
                    }
                    let _ = writeln!(out, "expanded: {}", e.expanded);
                    out
                }
                Format::Json => {
                    let groups: Vec<Json> = groups
                        .iter()
                        .map(|g| {
                            json!({
                                "assignment": g.assignment,
                                "count": g.count,
                                "mass": g.mass,
                                "min_steps": g.min_steps,
                                "rho": matrix_json(g.rho.matrix()),
                            })
                        })
                        .collect();
                    let leaves: Vec<Json> =
                        e.leaves.iter().map(|l| json!({ "steps": l.steps, "trace": l.config.trace() })).collect();
                    crate::json::to_string(&json!({
                        "max_steps": cli.max_steps,
                        "groups": groups,
                        "leaves": leaves,
                        "halt_lower_bound": e.halt_lower_bound,
                        "frontier_mass": e.frontier_mass,
                        "zero_mass": e.zero_mass,
                        "expanded": e.expanded,
                    })) + "\n"
                }
            })
        }
        Command::Denote => {
            let mut d = Denoter::new(gates, cli.depth, cli.fix_iters);
            d.tol = cli.tol;
            match d.denote_config(&config) {
                Ok(s) => Outcome::ok(render_state(cli, &s)),
                Err(e) => Outcome::err(3, e),
            }
        }
        Command::Verify => {
            let v = Verifier::new(gates, cli.max_qubits, params(cli));
            let report = v.verify(&cli.file.display().to_string(), &config);
            let code = if report.status == Status::Fail { 2 } else { 0 };
            Outcome { code, stdout: render_report(cli, &report), stderr: String::new() }
        }
    }
}

fn render_report(cli: &Cli, r: &VerificationReport) -> String {
    match cli.format {
        Format::Text => r.to_text(),
        Format::Json => r.to_json() + "\n",
    }
}

fn render_state(cli: &Cli, s: &StateDenotation) -> String {
    let spaces: Vec<(String, Type)> = s.context.iter().map(|(x, t)| (x.clone(), t.clone())).collect();
    let blocks: Vec<(usize, &CMatrix)> =
        s.state.blocks.iter().enumerate().filter(|(_, m)| m.iter().any(|z| z.norm() > 0.0)).collect();
    let warnings: Vec<String> = s
        .warnings
        .iter()
        .map(|w| match w {
            Warning::NotConverged { residual } => format!("not converged: residual {residual:.3e}"),
            Warning::Truncated { loss } => format!("truncated: {loss:.3e} mass folded past depth {}", cli.depth),
        })
        .collect();
    match cli.format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "context: <{}>", show_context(&s.context));
            let _ = writeln!(out, "space: {}", s.state.space);
            let _ = writeln!(out, "mass: {:.16e}", s.state.trace());
            let _ = writeln!(out, "residual: {:.16e}", s.residual);
            let _ = writeln!(out, "truncation loss: {:.16e}", s.truncation_loss);
            for w in &warnings {
                let _ = writeln!(out, "warning: {w}");
            }
            for (i, m) in blocks {
                let _ = write!(out, "{}", show_matrix(&format!("block {i}"), m));
            }
            out
        }
        Format::Json => {
            let blocks: Vec<Json> =
                blocks.iter().map(|(i, m)| json!({ "block": i, "dim": m.nrows(), "matrix": matrix_json(m) })).collect();
            crate::json::to_string(&json!({
                "context": spaces.iter().map(|(x, t)| json!([x, t.to_string()])).collect::<Vec<_>>(),
                "space": s.state.space.blocks,
                "mass": s.state.trace(),
                "residual": s.residual,
                "truncation_loss": s.truncation_loss,
                "warnings": warnings,
                "blocks": blocks,
            })) + "\n"
        }
    }
}

fn assignment_json(c: &Configuration) -> Json {
    let m: serde_json::Map<String, Json> =
        c.assignment.iter().map(|(x, v): (&String, &Value)| (x.clone(), Json::String(crate::parser::pretty::value_to_string(v)))).collect();
    Json::Object(m)
}

fn matrix_json(m: &CMatrix) -> Json {
    Json::Array(
        (0..m.nrows())
            .map(|i| Json::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

/// Rows of a small matrix rounded to 4 places; larger ones print only the diagonal.
fn show_matrix(label: &str, m: &CMatrix) -> String {
    let mut out = format!("{label} ({}x{}):\n", m.nrows(), m.ncols());
    let cell = |z: num_complex::Complex64| {
        let r = |x: f64| if x.abs() < 5e-5 { 0.0 } else { x };
        if r(z.im) == 0.0 {
            format!("{:>8.4}", r(z.re))
        } else {
            format!("{:>8.4}{:+.4}i", r(z.re), r(z.im))
        }
    };
    if m.nrows() <= 16 {
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| cell(m[(i, j)])).collect();
            let _ = writeln!(out, "  {}", row.join(" "));
        }
    } else {
        let diag: Vec<String> = (0..m.nrows()).map(|i| cell(m[(i, i)])).collect();
        let _ = writeln!(out, "  diagonal: {}", diag.join(" "));
    }
    out
}
