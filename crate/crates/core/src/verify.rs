//! Numerical checks tying the machine to the denotational evaluator.
//!
//! Every check produces a [`CheckRecord`] carrying its parameters, the
//! largest error it saw and a few named metrics.  Checks never panic on a
//! failing program: runtime errors become failing records, truncation past
//! the depth becomes a warning.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ast::{ProcDef, Term, Type, Value};
use crate::denotational::superop::{diagonal_copy, discard_map, validate, BlockState, Superoperator};
use crate::denotational::{denote_type, denote_value, DenoteError, Denoter, ProcEnv, StateDenotation};
use crate::operational::{Configuration, Machine, OpError};
use crate::qmath::GateRegistry;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Params {
    pub k: usize,
    pub fix_iters: usize,
    pub max_steps: usize,
    pub tol: f64,
}

impl Default for Params {
    fn default() -> Params {
        Params { k: 8, fix_iters: 64, max_steps: 10_000, tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Warn => "warn",
            Status::Fail => "fail",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub max_error: f64,
    pub tolerance: f64,
    pub params: Params,
    pub metrics: BTreeMap<String, f64>,
    pub note: String,
}

impl CheckRecord {
    fn new(name: &str, params: Params, tolerance: f64) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            status: Status::Pass,
            max_error: 0.0,
            tolerance,
            params,
            metrics: BTreeMap::new(),
            note: String::new(),
        }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    fn error(&mut self, e: f64) {
        if e > self.max_error || e.is_nan() {
            self.max_error = e;
        }
    }

    fn downgrade(&mut self, s: Status, note: impl Into<String>) {
        if s > self.status {
            self.status = s;
        }
        let note = note.into();
        if !note.is_empty() {
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(&note);
        }
    }

    fn failed(name: &str, params: Params, tolerance: f64, e: &VerifyError) -> CheckRecord {
        let mut r = CheckRecord::new(name, params, tolerance);
        match e {
            VerifyError::Denote(DenoteError::TruncationOverflow { .. }) => r.downgrade(Status::Warn, e.to_string()),
            _ => r.downgrade(Status::Fail, e.to_string()),
        }
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub program: String,
    pub status: Status,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(program: &str) -> VerificationReport {
        VerificationReport { program: program.to_string(), status: Status::Pass, checks: Vec::new() }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.status = self.status.max(r.status);
        self.checks.push(r);
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("program {}: {}\n", self.program, self.status);
        out.push_str(&format!("{:<22} {:<6} {:>12} {:>10}  note\n", "check", "status", "max_error", "tol"));
        for r in &self.checks {
            out.push_str(&format!(
                "{:<22} {:<6} {:>12.3e} {:>10.1e}  {}\n",
                r.name, r.status, r.max_error, r.tolerance, r.note
            ));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Denote(#[from] DenoteError),
    #[error("{0}")]
    Mismatch(String),
}

/// `C'` with every loop, definition and call indexed by `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitaryApproximant {
    pub original: Configuration,
    pub bound: u32,
    pub config: Configuration,
}

fn index_term(t: &Term, n: u32) -> Term {
    match t {
        Term::Seq(a, b) => Term::seq(index_term(a, n), index_term(b, n)),
        Term::While { bound: None, cond, body } => {
            Term::While { bound: Some(n), cond: cond.clone(), body: Box::new(index_term(body, n)) }
        }
        Term::Case { scrutinee, left_var, left_body, right_var, right_body } => Term::Case {
            scrutinee: scrutinee.clone(),
            left_var: left_var.clone(),
            left_body: Box::new(index_term(left_body, n)),
            right_var: right_var.clone(),
            right_body: Box::new(index_term(right_body, n)),
        },
        Term::ProcDef(d) => Term::ProcDef(Box::new(index_def(d, n))),
        Term::Call { name, bound: None, arg, result } => {
            Term::Call { name: name.clone(), bound: Some(n), arg: arg.clone(), result: result.clone() }
        }
        other => other.clone(),
    }
}

fn index_def(d: &ProcDef, n: u32) -> ProcDef {
    ProcDef { bound: d.bound.or(Some(n)), body: index_term(&d.body, n), ..d.clone() }
}

pub fn build_finitary(c: &Configuration, n: u32) -> FinitaryApproximant {
    let config = Configuration {
        term: index_term(&c.term, n),
        store: c.store.iter().map(|d| index_def(d, n)).collect(),
        ..c.clone()
    };
    FinitaryApproximant { original: c.clone(), bound: n, config }
}

/// `M' ◀ M`.
pub fn term_approximates(fin: &Term, ord: &Term) -> bool {
    match (fin, ord) {
        (Term::Seq(a1, b1), Term::Seq(a2, b2)) => term_approximates(a1, a2) && term_approximates(b1, b2),
        (Term::While { bound: Some(_), cond: c1, body: b1 }, Term::While { bound: None, cond: c2, body: b2 }) => {
            c1 == c2 && term_approximates(b1, b2)
        }
        (
            Term::Case { scrutinee: s1, left_var: l1, left_body: lb1, right_var: r1, right_body: rb1 },
            Term::Case { scrutinee: s2, left_var: l2, left_body: lb2, right_var: r2, right_body: rb2 },
        ) => s1 == s2 && l1 == l2 && r1 == r2 && term_approximates(lb1, lb2) && term_approximates(rb1, rb2),
        (Term::ProcDef(d1), Term::ProcDef(d2)) => def_approximates(d1, d2),
        (
            Term::Call { name: n1, bound: Some(_), arg: a1, result: r1 },
            Term::Call { name: n2, bound: None, arg: a2, result: r2 },
        ) => n1 == n2 && a1 == a2 && r1 == r2,
        (Term::Seq(..) | Term::While { .. } | Term::Case { .. } | Term::ProcDef(_) | Term::Call { .. }, _) => false,
        (Term::Zero { .. }, _) => false,
        (a, b) => a == b,
    }
}

fn def_approximates(d1: &ProcDef, d2: &ProcDef) -> bool {
    d1.bound.is_some()
        && d2.bound.is_none()
        && d1.name == d2.name
        && d1.param == d2.param
        && d1.param_ty == d2.param_ty
        && d1.result == d2.result
        && d1.result_ty == d2.result_ty
        && term_approximates(&d1.body, &d2.body)
}

/// `C' ⊏ C`: same assignment and density matrix, `◀` on terms, `◁` on stores.
pub fn config_approximates(fin: &Configuration, ord: &Configuration) -> bool {
    fin.assignment == ord.assignment
        && fin.rho.dim() == ord.rho.dim()
        && fin.rho.max_abs_diff(&ord.rho) <= 1e-12
        && fin.store.len() == ord.store.len()
        && fin.store.iter().zip(&ord.store).all(|(a, b)| def_approximates(a, b))
        && term_approximates(&fin.term, &ord.term)
}

fn contains_zero(t: &Term) -> bool {
    match t {
        Term::Zero { .. } => true,
        Term::Seq(a, b) => contains_zero(a) || contains_zero(b),
        Term::While { body, .. } => contains_zero(body),
        Term::Case { left_body, right_body, .. } => contains_zero(left_body) || contains_zero(right_body),
        Term::ProcDef(d) => contains_zero(&d.body),
        _ => false,
    }
}

/// Random closed values of a type, with qubit pointers `1..=n` in shuffled
/// order and folds kept within truncation depth `k`.
pub fn sample_values(ty: &Type, k: usize, count: usize, seed: u64) -> Vec<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 50 {
        attempts += 1;
        let mut next = 0;
        let Some(v) = gen_value(&mut rng, ty, k.saturating_sub(1), &mut next) else { continue };
        let mut perm: Vec<usize> = (1..=next).collect();
        perm.shuffle(&mut rng);
        out.push(v.map_qubits(&|q| perm[q - 1]));
    }
    out
}

fn gen_value(rng: &mut ChaCha8Rng, ty: &Type, folds: usize, next: &mut usize) -> Option<Value> {
    Some(match ty {
        Type::Unit => Value::Star,
        Type::Qbit => {
            *next += 1;
            Value::Qubit(*next)
        }
        Type::Sum(a, b) => {
            let go_left = rng.gen_bool(0.5);
            let first = if go_left { a } else { b };
            let v = match gen_value(rng, first, folds, next) {
                Some(v) => (go_left, v),
                None => (!go_left, gen_value(rng, if go_left { b } else { a }, folds, next)?),
            };
            let (l, r) = ((**a).clone(), (**b).clone());
            if v.0 {
                Value::Left { left: l, right: r, v: Box::new(v.1) }
            } else {
                Value::Right { left: l, right: r, v: Box::new(v.1) }
            }
        }
        Type::Tensor(a, b) => {
            let x = gen_value(rng, a, folds, next)?;
            Value::pair(x, gen_value(rng, b, folds, next)?)
        }
        Type::Mu(..) => {
            if folds == 0 {
                return None;
            }
            let inner = gen_value(rng, &ty.unfold_mu()?, folds - 1, next)?;
            Value::Fold { ty: ty.clone(), v: Box::new(inner) }
        }
        Type::Var(_) => return None,
    })
}

/// `⋄ ∘ ⟦v⟧ = tr`, as the transfer-matrix error.
pub fn causality_error(v: &Value, k: usize) -> Result<f64, DenoteError> {
    let d = denote_value(v, k)?;
    let lhs = discard_map(&d.codomain).compose(&d);
    Ok(lhs.max_abs_diff(&discard_map(&d.domain)))
}

/// `△ ∘ ⟦v⟧ = (⟦v⟧ ⊗ ⟦v⟧) ∘ △_I` for a classical value.
pub fn copyability_error(v: &Value, k: usize) -> Result<f64, DenoteError> {
    let d = denote_value(v, k)?;
    let copy = diagonal_copy(&d.codomain).ok_or_else(|| DenoteError::NotClassical(v.to_string()))?;
    let copy_i = diagonal_copy(&d.domain).ok_or_else(|| DenoteError::NotClassical(v.to_string()))?;
    Ok(copy.compose(&d).max_abs_diff(&d.tensor(&d).compose(&copy_i)))
}

/// Errors of the counit, coassociativity and cocommutativity laws of `(△, ⋄)` on `P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComonoidErrors {
    pub counit_left: f64,
    pub counit_right: f64,
    pub coassociativity: f64,
    pub cocommutativity: f64,
}

impl ComonoidErrors {
    pub fn max(&self) -> f64 {
        self.counit_left.max(self.counit_right).max(self.coassociativity).max(self.cocommutativity)
    }
}

pub fn comonoid_errors(p: &Type, k: usize) -> Result<ComonoidErrors, DenoteError> {
    let sp = denote_type(p, k);
    let copy = diagonal_copy(&sp).ok_or_else(|| DenoteError::NotClassical(p.to_string()))?;
    let del = discard_map(&sp);
    let id = Superoperator::identity(&sp);
    Ok(ComonoidErrors {
        counit_left: del.tensor(&id).compose(&copy).max_abs_diff(&id),
        counit_right: id.tensor(&del).compose(&copy).max_abs_diff(&id),
        coassociativity: copy.tensor(&id).compose(&copy).max_abs_diff(&id.tensor(&copy).compose(&copy)),
        cocommutativity: Superoperator::swap(&sp, &sp).compose(&copy).max_abs_diff(&copy),
    })
}

/// Largest transfer matrix built for the comonoid laws on a terminal type.
const COMONOID_BUDGET: usize = 1 << 22;

/// The partial sums `S_n` of terminal denotations next to `⟦C⟧`.
#[derive(Clone, Debug)]
pub struct BigStep {
    pub denotation: StateDenotation,
    /// `(n, S_n)` at every step count where a terminal appears.
    pub partial: Vec<(usize, BlockState)>,
    pub min_increment_eig: f64,
    pub frontier_mass: f64,
    pub halt_lower_bound: f64,
    /// `|(⋄ ∘ ⟦T⟧)(1) − tr ρ|` over the terminals.
    pub terminal_mass_error: f64,
    pub leaf_values: Vec<Value>,
}

impl BigStep {
    pub fn last(&self) -> BlockState {
        self.partial.last().map_or_else(|| BlockState::zero(&self.denotation.state.space), |p| p.1.clone())
    }
}

/// The operational and denotational sides, checked against each other.
#[derive(Clone, Debug)]
pub struct Verifier {
    pub machine: Machine,
    pub denoter: Denoter,
    pub params: Params,
    /// Bounds for the finitary approximant chain.
    pub bounds: Vec<u32>,
    /// Depth of the reachable set swept by the soundness check.
    pub soundness_steps: usize,
    /// Cap on configurations visited by any sweep.
    pub node_cap: usize,
    /// Largest transfer matrix (entries) built for the CP check; larger
    /// procedures are checked at a smaller depth.
    pub validity_budget: usize,
}

impl Verifier {
    pub fn new(gates: GateRegistry, max_qubits: usize, params: Params) -> Verifier {
        let mut denoter = Denoter::new(gates.clone(), params.k, params.fix_iters);
        denoter.tol = params.tol;
        Verifier {
            machine: Machine::new(gates, max_qubits).verifying(),
            denoter,
            params,
            bounds: vec![0, 1, 2, 4, 8, 16, 32],
            soundness_steps: 50,
            node_cap: 20_000,
            validity_budget: 1 << 18,
        }
    }

    fn denote(&self, c: &Configuration) -> Result<StateDenotation, VerifyError> {
        let d = self.denoter.denote_config(c)?;
        if d.truncation_loss > 0.0 {
            return Err(DenoteError::TruncationOverflow { value: format!("mass {:e}", d.truncation_loss), depth: self.params.k }.into());
        }
        Ok(d)
    }

    /// Trace conservation at every expanded node, with subject reduction
    /// re-checked by the verifying machine on every step.
    pub fn check_progress(&self, c: &Configuration) -> (CheckRecord, CheckRecord) {
        let mut trace = CheckRecord::new("progress", self.params, 1e-12);
        let mut subject = CheckRecord::new("subject_reduction", self.params, 0.0);
        let (mut nodes, mut steps, mut violations) = (0usize, 0usize, 0usize);
        let mut queue = VecDeque::from([(c.clone(), 0usize)]);
        while let Some((cfg, depth)) = queue.pop_front() {
            if cfg.is_terminal() || depth >= self.params.max_steps {
                continue;
            }
            if nodes >= self.node_cap {
                trace.downgrade(Status::Pass, format!("stopped at {} nodes", self.node_cap));
                break;
            }
            nodes += 1;
            match self.machine.step(&cfg) {
                Ok(children) => {
                    steps += children.len();
                    let sum: f64 = children.iter().map(Configuration::trace).sum();
                    trace.error((cfg.trace() - sum).abs());
                    for ch in children {
                        if ch.trace() > 0.0 {
                            queue.push_back((ch, depth + 1));
                        }
                    }
                }
                Err(OpError::SubjectReduction(msg)) => {
                    violations += 1;
                    subject.downgrade(Status::Fail, msg);
                }
                Err(e) => {
                    trace.downgrade(Status::Fail, e.to_string());
                    break;
                }
            }
        }
        if trace.max_error > trace.tolerance {
            trace.downgrade(Status::Fail, "trace not conserved");
        }
        trace.metric("nodes", nodes as f64);
        subject.metric("steps", steps as f64);
        subject.metric("violations", violations as f64);
        subject.max_error = violations as f64;
        (trace, subject)
    }

    /// `|⟦C⟧ − Σ_{C⇝D} ⟦D⟧|`, or `None` when truncation makes the comparison meaningless.
    pub fn soundness_error(&self, c: &Configuration) -> Result<Option<f64>, VerifyError> {
        let lhs = match self.denote(c) {
            Ok(d) => d,
            Err(VerifyError::Denote(DenoteError::TruncationOverflow { .. })) => return Ok(None),
            Err(e) => return Err(e),
        };
        let mut sum = BlockState::zero(&lhs.state.space);
        for d in self.machine.step(c)? {
            let rhs = match self.denote(&d) {
                Ok(r) => r,
                Err(VerifyError::Denote(DenoteError::TruncationOverflow { .. })) => return Ok(None),
                Err(e) => return Err(e),
            };
            if rhs.context != lhs.context {
                return Err(VerifyError::Mismatch(format!("successor context differs after step from {c}")));
            }
            sum = sum.add(&rhs.state);
        }
        Ok(Some(lhs.state.max_abs_diff(&sum)))
    }

    /// Single-step soundness at one configuration.
    pub fn check_soundness(&self, c: &Configuration) -> CheckRecord {
        let mut r = CheckRecord::new("soundness", self.params, self.params.tol);
        match self.soundness_error(c) {
            Ok(Some(e)) => r.error(e),
            Ok(None) => r.downgrade(Status::Warn, "truncated at depth k"),
            Err(e) => return CheckRecord::failed("soundness", self.params, self.params.tol, &e),
        }
        if r.max_error > r.tolerance {
            r.downgrade(Status::Fail, "");
        }
        r
    }

    /// Single-step soundness at every ordinary non-terminal configuration
    /// reachable within `soundness_steps`.
    pub fn soundness_sweep(&self, c: &Configuration) -> CheckRecord {
        let mut r = CheckRecord::new("soundness", self.params, self.params.tol);
        let (mut checked, mut truncated, mut skipped) = (0usize, 0usize, 0usize);
        let mut queue = VecDeque::from([(c.clone(), 0usize)]);
        let mut visited = 0;
        while let Some((cfg, depth)) = queue.pop_front() {
            if cfg.is_terminal() || depth >= self.soundness_steps || visited >= self.node_cap {
                continue;
            }
            visited += 1;
            if cfg.is_ordinary() {
                match self.soundness_error(&cfg) {
                    Ok(Some(e)) => {
                        checked += 1;
                        r.error(e);
                    }
                    Ok(None) => truncated += 1,
                    Err(e) => {
                        r.downgrade(Status::Fail, e.to_string());
                        break;
                    }
                }
            } else {
                skipped += 1;
            }
            match self.machine.step(&cfg) {
                Ok(children) => queue.extend(children.into_iter().filter(|d| d.trace() > 0.0).map(|d| (d, depth + 1))),
                Err(e) => {
                    r.downgrade(Status::Fail, e.to_string());
                    break;
                }
            }
        }
        r.metric("checked", checked as f64);
        r.metric("truncated", truncated as f64);
        r.metric("finitary_skipped", skipped as f64);
        if r.max_error > r.tolerance {
            r.downgrade(Status::Fail, "");
        }
        if checked == 0 && truncated > 0 {
            r.downgrade(Status::Warn, "every configuration truncated at depth k");
        }
        r
    }

    /// `⟦C⟧` next to the partial sums of terminal denotations up to `max_steps`.
    pub fn big_step(&self, c: &Configuration) -> Result<BigStep, VerifyError> {
        let denotation = self.denote(c)?;
        let e = self.machine.enumerate(c, self.params.max_steps)?;
        let mut increments: BTreeMap<usize, BlockState> = BTreeMap::new();
        let mut terminal_mass_error: f64 = 0.0;
        let mut leaf_values = Vec::new();
        for leaf in &e.leaves {
            let d = self.denote(&leaf.config)?;
            if d.context != denotation.context {
                return Err(VerifyError::Mismatch("terminal context differs from the initial one".into()));
            }
            terminal_mass_error = terminal_mass_error.max((d.state.trace() - leaf.config.trace()).abs());
            let slot = increments.entry(leaf.steps).or_insert_with(|| BlockState::zero(&denotation.state.space));
            *slot = slot.add(&d.state);
            leaf_values.extend(leaf.config.assignment.values().cloned());
        }
        let mut partial = Vec::new();
        let mut s = BlockState::zero(&denotation.state.space);
        let mut min_increment_eig = f64::INFINITY;
        for (n, inc) in increments {
            min_increment_eig = min_increment_eig.min(inc.min_eigenvalue());
            s = s.add(&inc);
            partial.push((n, s.clone()));
        }
        Ok(BigStep {
            denotation,
            partial,
            min_increment_eig: if min_increment_eig.is_finite() { min_increment_eig } else { 0.0 },
            frontier_mass: e.frontier_mass * c.trace(),
            halt_lower_bound: e.halt_lower_bound,
            terminal_mass_error,
            leaf_values,
        })
    }

    pub fn check_big_step(&self, c: &Configuration) -> CheckRecord {
        let tol = self.params.tol;
        let b = match self.big_step(c) {
            Ok(b) => b,
            Err(e) => return CheckRecord::failed("big_step", self.params, tol, &e),
        };
        let mut r = CheckRecord::new("big_step", self.params, tol);
        let last = b.last();
        let den_mass = b.denotation.state.trace();
        let max_excess = b.partial.iter().map(|(_, s)| s.trace() - den_mass).fold(f64::NEG_INFINITY, f64::max);
        let gap = den_mass - last.trace();
        r.error(b.denotation.state.max_abs_diff(&last));
        r.metric("frontier_mass", b.frontier_mass);
        r.metric("min_increment_eig", b.min_increment_eig);
        r.metric("max_mass_excess", max_excess.max(0.0));
        r.metric("mass_gap", gap);
        r.metric("denotation_mass", den_mass);
        r.metric("partial_mass", last.trace());
        r.metric("terminal_steps", b.partial.len() as f64);
        if b.min_increment_eig < -1e-10 {
            r.downgrade(Status::Fail, "partial sums not monotone");
        }
        if max_excess > tol {
            r.downgrade(Status::Fail, "partial sum exceeds the denotation");
        }
        if b.frontier_mass <= tol || gap.abs() <= tol {
            if r.max_error > tol + b.frontier_mass {
                r.downgrade(Status::Fail, "");
            }
        } else {
            r.downgrade(Status::Warn, format!("inconclusive at horizon {}", self.params.max_steps));
        }
        r
    }

    pub fn check_adequacy(&self, c: &Configuration) -> CheckRecord {
        let tol = self.params.tol;
        let b = match self.big_step(c) {
            Ok(b) => b,
            Err(e) => return CheckRecord::failed("adequacy", self.params, tol, &e),
        };
        let mut r = CheckRecord::new("adequacy", self.params, tol);
        let mass = b.denotation.state.trace();
        let halt = c.trace() * b.halt_lower_bound;
        r.error((mass - halt).abs());
        r.metric("denotation_mass", mass);
        r.metric("halt_lower_bound", b.halt_lower_bound);
        r.metric("frontier_mass", b.frontier_mass);
        r.metric("terminal_mass_error", b.terminal_mass_error);
        if r.max_error > tol + b.frontier_mass {
            r.downgrade(Status::Fail, "");
        } else if b.frontier_mass > tol && r.max_error > tol {
            r.downgrade(Status::Warn, "agreement only up to the frontier mass");
        }
        if b.terminal_mass_error > 1e-12 {
            r.downgrade(Status::Fail, "terminal mass differs from tr ρ");
        }
        r
    }

    /// Pairs a finitary run with the ordinary one step by step until the
    /// finitary side reaches `skip` or a `0`.  Returns (pairs, max trace error, note).
    fn lockstep(&self, fin: &Configuration, ord: &Configuration) -> Result<(usize, f64, Option<String>), VerifyError> {
        let mut stack = vec![(fin.clone(), ord.clone(), 0usize)];
        let (mut pairs, mut err) = (0usize, 0f64);
        while let Some((a, b, depth)) = stack.pop() {
            if contains_zero(&a.term) {
                continue;
            }
            pairs += 1;
            if pairs > self.node_cap {
                return Ok((pairs, err, Some("pair cap reached".into())));
            }
            if !config_approximates(&a, &b) {
                return Ok((pairs, err, Some(format!("lost approximation after {depth} steps: {a} vs {b}"))));
            }
            err = err.max((a.trace() - b.trace()).abs());
            if a.is_skip() {
                if !b.is_skip() {
                    return Ok((pairs, err, Some("finitary run ended before the ordinary one".into())));
                }
                continue;
            }
            if depth >= self.params.max_steps {
                continue;
            }
            let (ca, cb) = (self.machine.step(&a)?, self.machine.step(&b)?);
            if ca.len() != cb.len() {
                return Ok((pairs, err, Some("branching differs".into())));
            }
            for (x, y) in ca.into_iter().zip(cb) {
                if x.trace() > 0.0 || y.trace() > 0.0 {
                    stack.push((x, y, depth + 1));
                }
            }
        }
        Ok((pairs, err, None))
    }

    pub fn check_approximation(&self, c: &Configuration) -> CheckRecord {
        let tol = self.params.tol;
        let mut r = CheckRecord::new("approximation", self.params, tol);
        if !c.is_ordinary() {
            r.downgrade(Status::Warn, "not an ordinary configuration");
            return r;
        }
        let full = match self.denote(c) {
            Ok(d) => d,
            Err(e) => return CheckRecord::failed("approximation", self.params, tol, &e),
        };
        let mut prev: Option<BlockState> = None;
        let (mut min_chain_eig, mut max_excess, mut lock_err) = (f64::INFINITY, f64::NEG_INFINITY, 0f64);
        let mut pairs = 0;
        let mut gap = f64::NAN;
        for &n in &self.bounds {
            let a = build_finitary(c, n);
            if !config_approximates(&a.config, c) {
                r.downgrade(Status::Fail, format!("approximant at {n} is not below the original"));
            }
            match self.lockstep(&a.config, c) {
                Ok((p, e, note)) => {
                    pairs += p;
                    lock_err = lock_err.max(e);
                    if let Some(note) = note {
                        r.downgrade(Status::Fail, format!("lockstep at {n}: {note}"));
                    }
                }
                Err(e) => r.downgrade(Status::Fail, e.to_string()),
            }
            match self.machine.enumerate(&a.config, self.params.max_steps) {
                Ok(e) if e.frontier.is_empty() => {}
                Ok(_) => r.downgrade(Status::Fail, format!("approximant at {n} did not normalise")),
                Err(e) => r.downgrade(Status::Fail, e.to_string()),
            }
            let d = match self.denote(&a.config) {
                Ok(d) => d.state,
                Err(e) => {
                    r.downgrade(Status::Fail, e.to_string());
                    continue;
                }
            };
            if let Some(p) = &prev {
                min_chain_eig = min_chain_eig.min(d.sub(p).min_eigenvalue());
            }
            max_excess = max_excess.max(d.trace() - full.state.trace());
            gap = full.state.max_abs_diff(&d);
            r.metric(&format!("mass@{n}"), d.trace());
            prev = Some(d);
        }
        r.error(gap);
        r.metric("min_chain_eig", if min_chain_eig.is_finite() { min_chain_eig } else { 0.0 });
        r.metric("max_mass_excess", max_excess.max(0.0));
        r.metric("lockstep_pairs", pairs as f64);
        r.metric("lockstep_trace_error", lock_err);
        if min_chain_eig < -1e-10 {
            r.downgrade(Status::Fail, "approximant chain not monotone");
        }
        if max_excess > tol {
            r.downgrade(Status::Fail, "approximant exceeds the denotation");
        }
        if lock_err > 1e-12 {
            r.downgrade(Status::Fail, "paired traces differ");
        }
        if gap.is_nan() || gap > tol {
            r.downgrade(Status::Warn, "chain not yet within tolerance at the largest bound");
        }
        r
    }

    /// Complete positivity and trace non-increase of the main term and of
    /// every stored procedure.
    pub fn check_validity(&self, c: &Configuration) -> CheckRecord {
        let tol = self.params.tol;
        let mut r = CheckRecord::new("validity", self.params, tol);
        let gamma = match c.context() {
            Ok(g) => g,
            Err(e) => return CheckRecord::failed("validity", self.params, tol, &e.into()),
        };
        let (mut min_choi, mut max_dual, mut maps) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
        let mut depths = Vec::new();
        let mut jobs: Vec<(String, Option<String>)> = vec![("main".into(), None)];
        jobs.extend(c.store.iter().map(|d| (d.name.clone(), Some(d.name.clone()))));
        for (label, proc_name) in jobs {
            let (inputs, outputs): (Vec<Type>, Vec<Type>) = match &proc_name {
                None => {
                    let procs = match self.machine.checker().check_store(&c.store) {
                        Ok(p) => p,
                        Err(e) => {
                            r.downgrade(Status::Fail, e.to_string());
                            continue;
                        }
                    };
                    match self.machine.checker().check_term(&procs, &gamma, &c.term) {
                        Ok(sigma) => (gamma.values().cloned().collect(), sigma.into_values().collect()),
                        Err(e) => {
                            r.downgrade(Status::Fail, e.to_string());
                            continue;
                        }
                    }
                }
                Some(f) => {
                    let d = c.store.iter().find(|d| &d.name == f).expect("stored procedure");
                    (vec![d.param_ty.clone()], vec![d.result_ty.clone()])
                }
            };
            let size = |k: usize| {
                let dim = |ts: &[Type]| ts.iter().map(|t| denote_type(t, k).state_dim()).product::<usize>();
                dim(&inputs).saturating_mul(dim(&outputs))
            };
            let mut k = self.params.k;
            while k > 1 && size(k) > self.validity_budget {
                k -= 1;
            }
            let den = Denoter { k, ..self.denoter.clone() };
            let env: ProcEnv = den.denote_store(&c.store);
            let result = match &proc_name {
                None => den.denote_term(&c.term, &env, &gamma),
                Some(f) => den.procedure(&env, f),
            };
            let map = match result {
                Ok(t) => Some(t.map),
                Err(e) => {
                    r.downgrade(Status::Fail, format!("{label}: {e}"));
                    None
                }
            };
            let Some(map) = map else { continue };
            if k < self.params.k {
                depths.push(format!("{label}@{k}"));
            }
            let v = validate(&map, tol);
            maps += 1;
            min_choi = min_choi.min(v.min_choi_eig);
            max_dual = max_dual.max(v.max_dual_unit_eig);
            if !(v.cp && v.trace_nonincreasing) {
                r.downgrade(Status::Fail, format!("{label} is not CP and trace non-increasing"));
            }
        }
        r.error((-min_choi).max(max_dual - 1.0).max(0.0));
        r.metric("maps", maps as f64);
        r.metric("min_choi_eig", if min_choi.is_finite() { min_choi } else { 0.0 });
        r.metric("max_dual_unit_eig", if max_dual.is_finite() { max_dual } else { 0.0 });
        if !depths.is_empty() {
            r.downgrade(Status::Pass, format!("reduced depth: {}", depths.join(", ")));
        }
        r
    }

    /// Causality for every value in a terminal assignment, copyability and
    /// the comonoid laws for the classical ones.
    pub fn check_values(&self, values: &[Value]) -> CheckRecord {
        let tol = 1e-12;
        let k = self.params.k;
        let mut r = CheckRecord::new("values", self.params, tol);
        let (mut causal, mut copied) = (0usize, 0usize);
        let mut classical_types: Vec<Type> = Vec::new();
        for v in values.iter().take(64) {
            match causality_error(v, k) {
                Ok(e) => {
                    causal += 1;
                    r.error(e);
                }
                Err(e) => r.downgrade(Status::Warn, e.to_string()),
            }
            if v.qubits().is_empty() {
                if let Ok(e) = copyability_error(v, k) {
                    copied += 1;
                    r.error(e);
                }
                if let Ok((_, t)) = crate::ast::type_of_value(v) {
                    if !classical_types.contains(&t) {
                        classical_types.push(t);
                    }
                }
            }
        }
        for t in &classical_types {
            let mut depth = k;
            while depth > 1 && denote_type(t, depth).state_dim().pow(5) > COMONOID_BUDGET {
                depth -= 1;
            }
            if let Ok(e) = comonoid_errors(t, depth) {
                r.error(e.max());
            }
        }
        r.metric("causality", causal as f64);
        r.metric("copyability", copied as f64);
        r.metric("comonoid_types", classical_types.len() as f64);
        if r.max_error > tol {
            r.downgrade(Status::Fail, "");
        }
        r
    }

    /// The full suite on one program.
    pub fn verify(&self, name: &str, c: &Configuration) -> VerificationReport {
        let mut report = VerificationReport::new(name);
        let mut wf = CheckRecord::new("well_formed", self.params, 0.0);
        if let Err(e) = self.machine.checker().check_config(c) {
            wf.downgrade(Status::Fail, e.to_string());
            report.push(wf);
            return report;
        }
        report.push(wf);
        let (progress, subject) = self.check_progress(c);
        report.push(progress);
        report.push(subject);
        report.push(self.soundness_sweep(c));
        report.push(self.check_big_step(c));
        report.push(self.check_adequacy(c));
        report.push(self.check_approximation(c));
        report.push(self.check_validity(c));
        let values = self.big_step(c).map(|b| b.leaf_values).unwrap_or_default();
        report.push(self.check_values(&values));
        report
    }

    /// Programs verified on separate threads, reports in input order.
    pub fn verify_all(&self, programs: &[(String, Configuration)]) -> Vec<VerificationReport> {
        std::thread::scope(|s| {
            let handles: Vec<_> = programs.iter().map(|(n, c)| s.spawn(move || self.verify(n, c))).collect();
            handles.into_iter().map(|h| h.join().expect("verification thread panicked")).collect()
        })
    }
}

/// Contexts of two denotations agree and their states differ by at most `tol`.
pub fn states_agree(a: &StateDenotation, b: &StateDenotation, tol: f64) -> bool {
    a.context == b.context && a.state.max_abs_diff(&b.state) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_term};

    fn program(name: &str) -> Configuration {
        let path = format!("{}/programs/{name}", env!("CARGO_MANIFEST_DIR"));
        Configuration::from_program(&parse_program(&std::fs::read_to_string(path).unwrap()).unwrap())
    }

    fn verifier() -> Verifier {
        Verifier::new(GateRegistry::builtin(), 12, Params::default())
    }

    #[test]
    fn soundness_examples() {
        let v = verifier();
        let c = Configuration::initial(parse_term("skip; skip").unwrap(), vec![]);
        assert_eq!(v.soundness_error(&c).unwrap(), Some(0.0));
        let c = Configuration::initial(parse_term("new qbit q; q *= H; b = measure q").unwrap(), vec![]);
        let r = v.soundness_sweep(&c);
        assert_eq!(r.status, Status::Pass, "{r:?}");
        assert_eq!(r.metrics["checked"], 5.0);
        assert_eq!(v.check_soundness(&program("cointoss.qpl")).status, Status::Pass);
    }

    #[test]
    fn finitary_approximants_are_below_the_original() {
        let c = program("ghz.qpl");
        let a = build_finitary(&c, 5);
        assert!(a.config.store.iter().all(|d| d.bound == Some(5)));
        assert!(config_approximates(&a.config, &c));
        assert!(a.config.is_finitary());
        assert!(!config_approximates(&c, &c));
        let coin = build_finitary(&program("cointoss.qpl"), 3);
        assert!(coin.config.term.to_string().contains("while^3"));
    }

    #[test]
    fn coin_toss_suite() {
        let mut v = verifier();
        v.params.max_steps = 400;
        let r = v.verify("cointoss", &program("cointoss.qpl"));
        assert_eq!(r.status, Status::Pass, "{}", r.to_text());
        let a = r.get("approximation").unwrap();
        assert!((a.metrics["mass@4"] - 0.875).abs() < 1e-12);
    }

    #[test]
    fn ghz_shallow_depth_warns() {
        let mut v = verifier();
        v.params.k = 2;
        v.denoter.k = 2;
        let r = v.check_big_step(&program("ghz.qpl"));
        assert_eq!(r.status, Status::Warn, "{r:?}");
    }

    #[test]
    fn comonoid_on_bit() {
        assert!(comonoid_errors(&Type::bit(), 4).unwrap().max() < 1e-15);
        assert!(comonoid_errors(&Type::Qbit, 4).is_err());
    }

    #[test]
    fn generated_values_fit_the_depth() {
        for v in sample_values(&Type::list_q(), 4, 20, 1) {
            assert!(causality_error(&v, 4).unwrap() < 1e-12);
        }
    }
}
