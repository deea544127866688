//! Small-step machine over configurations `(M | V | Ω | ρ)`, including the
//! indexed rules for finitary terms, plus exhaustive enumeration of the
//! reduction tree and seeded sampling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::ast::{contexts_eq, type_of_value, ProcDef, Term, Type, Value, Var, VarContext};
use crate::parser::Program;
use crate::qmath::{
    apply_unitary, new_qubit, partial_trace, project_measure, DensityMatrix, GateRegistry, QMathError,
    DEFAULT_MAX_QUBITS,
};
use crate::typecheck::{Checker, IllFormedConfig};

pub type Assignment = BTreeMap<Var, Value>;

/// `(M | V | Ω | ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub term: Term,
    pub assignment: Assignment,
    pub store: Vec<ProcDef>,
    pub rho: DensityMatrix,
}

impl Configuration {
    pub fn new(term: Term, assignment: Assignment, store: Vec<ProcDef>, rho: DensityMatrix) -> Configuration {
        Configuration { term, assignment, store, rho }
    }

    /// `(M | · | Ω | 1)`.
    pub fn initial(term: Term, store: Vec<ProcDef>) -> Configuration {
        Configuration::new(term, Assignment::new(), store, DensityMatrix::one())
    }

    pub fn from_program(p: &Program) -> Configuration {
        Configuration::initial(p.main.clone(), p.store.clone())
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace()
    }

    pub fn is_terminal(&self) -> bool {
        self.term.is_terminal()
    }

    pub fn is_skip(&self) -> bool {
        self.term == Term::Skip
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.term, Term::Zero { .. })
    }

    pub fn is_ordinary(&self) -> bool {
        self.term.is_ordinary() && self.store.iter().all(|d| d.bound.is_none() && d.body.is_ordinary())
    }

    pub fn is_finitary(&self) -> bool {
        self.term.is_finitary() && self.store.iter().all(|d| d.bound.is_some() && d.body.is_finitary())
    }

    pub fn show_assignment(&self) -> String {
        show_assignment(&self.assignment)
    }

    /// Types of the assigned values.
    pub fn context(&self) -> Result<VarContext, OpError> {
        context_of(&self.assignment)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let procs: Vec<String> = self
            .store
            .iter()
            .map(|d| match d.bound {
                Some(n) => format!("{}^{n}", d.name),
                None => d.name.clone(),
            })
            .collect();
        write!(
            f,
            "({} | {} | {} | {} qubits, tr {:.6})",
            self.term,
            self.show_assignment(),
            procs.join(", "),
            self.rho.n_qubits(),
            self.trace()
        )
    }
}

pub fn show_assignment(v: &Assignment) -> String {
    v.iter().map(|(x, w)| format!("{x} = {}", crate::parser::pretty::value_to_string(w))).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum OpError {
    #[error("stuck configuration: {0}")]
    Stuck(String),
    #[error(transparent)]
    QMath(#[from] QMathError),
    #[error("unbound variable `{0}`")]
    UnboundVariable(Var),
    #[error("no terminal configuration within {0} steps")]
    Timeout(usize),
    #[error("subject reduction violated: {0}")]
    SubjectReduction(String),
    #[error(transparent)]
    IllFormed(#[from] IllFormedConfig),
}

fn context_of(v: &Assignment) -> Result<VarContext, OpError> {
    v.iter()
        .map(|(x, w)| {
            type_of_value(w).map(|(_, t)| (x.clone(), t)).map_err(|e| OpError::Stuck(format!("{x}: {e}")))
        })
        .collect()
}

/// Smallest `base#k` outside `avoid`, where `base` is `name` up to its first `#`.
pub fn fresh_name(name: &str, avoid: &BTreeSet<Var>) -> Var {
    let base = name.split('#').next().unwrap_or(name);
    (0..)
        .map(|k| format!("{base}#{k}"))
        .find(|c| !avoid.contains(c))
        .expect("unbounded search")
}

/// Pointer `k` becomes `k − |{i ∈ gone | i < k}|`.
fn reindex(v: &mut Assignment, gone: &BTreeSet<usize>) {
    if gone.is_empty() {
        return;
    }
    for w in v.values_mut() {
        *w = w.map_qubits(&|k| k - gone.range(..k).count());
    }
}

/// `(discard x | V, x = v | Ω | ρ) ⇝ (skip | r_v(V) | Ω | tr_v(ρ))`, returned
/// as a configuration with the term left untouched.
pub fn discard_value(c: &Configuration, x: &str) -> Result<Configuration, OpError> {
    let mut out = c.clone();
    out.rho = discard_in(&mut out.assignment, &c.rho, x)?;
    Ok(out)
}

fn discard_in(v: &mut Assignment, rho: &DensityMatrix, x: &str) -> Result<DensityMatrix, OpError> {
    let w = v.remove(x).ok_or_else(|| OpError::UnboundVariable(x.to_string()))?;
    let q: BTreeSet<usize> = w.qubits().into_iter().collect();
    let rho = partial_trace(rho, &q)?;
    reindex(v, &q);
    Ok(rho)
}

/// Successor of one reduction step, before the rename of an indexed call
/// is applied to the whole term.
struct Succ {
    term: Term,
    assignment: Assignment,
    store: Vec<ProcDef>,
    rho: DensityMatrix,
    rename: Option<(String, u32)>,
}

/// The abstract machine.
#[derive(Clone, Debug)]
pub struct Machine {
    pub gates: GateRegistry,
    pub max_qubits: usize,
    /// Re-check every successor for well-formedness and an unchanged `Σ`.
    pub verify: bool,
    /// Drop zero-trace branches during enumeration.
    pub prune_impossible: bool,
    /// Step cap for `sample`.
    pub step_cap: usize,
}

impl Default for Machine {
    fn default() -> Machine {
        Machine {
            gates: GateRegistry::builtin(),
            max_qubits: DEFAULT_MAX_QUBITS,
            verify: false,
            prune_impossible: true,
            step_cap: 100_000,
        }
    }
}

impl Machine {
    pub fn new(gates: GateRegistry, max_qubits: usize) -> Machine {
        Machine { gates, max_qubits, ..Machine::default() }
    }

    pub fn verifying(mut self) -> Machine {
        self.verify = true;
        self
    }

    pub fn checker(&self) -> Checker<'_> {
        Checker::new(&self.gates)
    }

    /// All one-step successors of a non-terminal configuration: one, or two
    /// for a measurement (both kept, even at trace 0).
    pub fn step(&self, c: &Configuration) -> Result<Vec<Configuration>, OpError> {
        if c.is_terminal() {
            return Err(OpError::Stuck(format!("terminal configuration {c}")));
        }
        let sigma = if self.verify { Some(self.checker().check_config(c)?.output) } else { None };
        let mut avoid = c.term.var_names();
        avoid.extend(c.assignment.keys().cloned());
        let succs = self.reduce(&c.term, &c.assignment, &c.store, &c.rho, &avoid)?;
        let mut out = Vec::with_capacity(succs.len());
        for s in succs {
            let mut d = Configuration::new(s.term, s.assignment, s.store, s.rho);
            if let Some((name, n)) = s.rename {
                d.term.rebound_proc_mut(&name, Some(n + 1), Some(n));
                for def in &mut d.store {
                    def.body.rebound_proc_mut(&name, Some(n + 1), Some(n));
                    if def.name == name && def.bound == Some(n + 1) {
                        def.bound = Some(n);
                    }
                }
            }
            if let Some(sigma) = &sigma {
                let w = self.checker().check_config(&d).map_err(|e| {
                    OpError::SubjectReduction(format!("successor {d} is ill formed: {e}"))
                })?;
                if !contexts_eq(sigma, &w.output) {
                    return Err(OpError::SubjectReduction(format!("output context changed after {d}")));
                }
            }
            out.push(d);
        }
        Ok(out)
    }

    fn reduce(
        &self,
        term: &Term,
        v: &Assignment,
        omega: &[ProcDef],
        rho: &DensityMatrix,
        avoid: &BTreeSet<Var>,
    ) -> Result<Vec<Succ>, OpError> {
        let done = |term: Term, assignment: Assignment, rho: DensityMatrix| {
            Ok(vec![Succ { term, assignment, store: omega.to_vec(), rho, rename: None }])
        };
        let get = |x: &Var| v.get(x).cloned().ok_or_else(|| OpError::UnboundVariable(x.clone()));
        match term {
            Term::Skip | Term::Zero { .. } => Err(OpError::Stuck(format!("no rule for terminal {term}"))),
            Term::NewUnit { var } => {
                let mut v = v.clone();
                v.insert(var.clone(), Value::Star);
                done(Term::Skip, v, rho.clone())
            }
            Term::Discard { var } => {
                let mut v = v.clone();
                let rho = discard_in(&mut v, rho, var)?;
                done(Term::Skip, v, rho)
            }
            Term::Copy { dst, src } => {
                let w = get(src)?;
                let mut v = v.clone();
                v.insert(dst.clone(), w);
                done(Term::Skip, v, rho.clone())
            }
            Term::NewQbit { var } => {
                let rho = new_qubit(rho, self.max_qubits)?;
                let mut v = v.clone();
                v.insert(var.clone(), Value::Qubit(rho.n_qubits()));
                done(Term::Skip, v, rho)
            }
            Term::Unitary { gate, qubits } => {
                let s = self.gates.get(gate)?;
                let targets = qubits
                    .iter()
                    .map(|q| match get(q)? {
                        Value::Qubit(m) => Ok(m),
                        other => Err(OpError::Stuck(format!("{q} = {other} is not a qubit"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                done(Term::Skip, v.clone(), apply_unitary(rho, &s, &targets)?)
            }
            Term::Measure { bit, qubit } => {
                let m = match get(qubit)? {
                    Value::Qubit(m) => m,
                    other => return Err(OpError::Stuck(format!("{qubit} = {other} is not a qubit"))),
                };
                let mut out = Vec::with_capacity(2);
                for (outcome, b) in [(0, Value::ff()), (1, Value::tt())] {
                    let mut v = v.clone();
                    v.remove(qubit);
                    reindex(&mut v, &BTreeSet::from([m]));
                    v.insert(bit.clone(), b);
                    let rho = project_measure(rho, m, outcome)?;
                    out.push(Succ { term: Term::Skip, assignment: v, store: omega.to_vec(), rho, rename: None });
                }
                Ok(out)
            }
            Term::Seq(head, tail) => match head.as_ref() {
                Term::Skip => done((**tail).clone(), v.clone(), rho.clone()),
                Term::Zero { input, output } => {
                    let pi = self.checker().check_store(omega).map_err(|e| OpError::Stuck(e.to_string()))?;
                    let sigma = self.checker().check_term(&pi, output, tail).map_err(|e| OpError::Stuck(e.to_string()))?;
                    done(Term::Zero { input: input.clone(), output: sigma }, v.clone(), rho.clone())
                }
                _ => {
                    let succs = self.reduce(head, v, omega, rho, avoid)?;
                    Ok(succs
                        .into_iter()
                        .map(|s| Succ { term: Term::seq(s.term, (**tail).clone()), ..s })
                        .collect())
                }
            },
            Term::While { bound, cond, body } => {
                get(cond)?;
                let inner = match bound {
                    Some(0) => {
                        let gamma = context_of(v)?;
                        return done(Term::Zero { input: gamma.clone(), output: gamma }, v.clone(), rho.clone());
                    }
                    Some(n) => Some(n - 1),
                    None => None,
                };
                let u = fresh_name("u", avoid);
                let again = Term::While { bound: inner, cond: cond.clone(), body: body.clone() };
                let unrolled = Term::Case {
                    scrutinee: cond.clone(),
                    left_var: u.clone(),
                    left_body: Box::new(Term::Left { dst: cond.clone(), src: u.clone(), left: Type::Unit, right: Type::Unit }),
                    right_var: u.clone(),
                    right_body: Box::new(Term::seq(
                        Term::Right { dst: cond.clone(), src: u, left: Type::Unit, right: Type::Unit },
                        Term::seq((**body).clone(), again),
                    )),
                };
                done(unrolled, v.clone(), rho.clone())
            }
            Term::Left { dst, src, left, right } | Term::Right { dst, src, left, right } => {
                let w = Box::new(get(src)?);
                let (left, right) = (left.clone(), right.clone());
                let w = if matches!(term, Term::Left { .. }) {
                    Value::Left { left, right, v: w }
                } else {
                    Value::Right { left, right, v: w }
                };
                let mut v = v.clone();
                v.remove(src);
                v.insert(dst.clone(), w);
                done(Term::Skip, v, rho.clone())
            }
            Term::Case { scrutinee, left_var, left_body, right_var, right_body } => {
                let (x, w, body) = match get(scrutinee)? {
                    Value::Left { v: w, .. } => (left_var, *w, left_body),
                    Value::Right { v: w, .. } => (right_var, *w, right_body),
                    other => return Err(OpError::Stuck(format!("case on non-sum value {other}"))),
                };
                let mut v = v.clone();
                v.remove(scrutinee);
                v.insert(x.clone(), w);
                done((**body).clone(), v, rho.clone())
            }
            Term::Pair { dst, left, right } => {
                let (a, b) = (get(left)?, get(right)?);
                let mut v = v.clone();
                v.remove(left);
                v.remove(right);
                v.insert(dst.clone(), Value::pair(a, b));
                done(Term::Skip, v, rho.clone())
            }
            Term::Unpair { left, right, src } => match get(src)? {
                Value::Pair(a, b) => {
                    let mut v = v.clone();
                    v.remove(src);
                    v.insert(left.clone(), *a);
                    v.insert(right.clone(), *b);
                    done(Term::Skip, v, rho.clone())
                }
                other => Err(OpError::Stuck(format!("unpair of non-pair value {other}"))),
            },
            Term::Fold { dst, src, ty } => {
                let w = get(src)?;
                let mut v = v.clone();
                v.remove(src);
                v.insert(dst.clone(), Value::Fold { ty: ty.clone(), v: Box::new(w) });
                done(Term::Skip, v, rho.clone())
            }
            Term::Unfold { dst, src } => match get(src)? {
                Value::Fold { v: w, .. } => {
                    let mut v = v.clone();
                    v.remove(src);
                    v.insert(dst.clone(), *w);
                    done(Term::Skip, v, rho.clone())
                }
                other => Err(OpError::Stuck(format!("unfold of non-fold value {other}"))),
            },
            Term::ProcDef(d) => {
                let mut store = omega.to_vec();
                store.push((**d).clone());
                Ok(vec![Succ { term: Term::Skip, assignment: v.clone(), store, rho: rho.clone(), rename: None }])
            }
            Term::Call { name, bound, arg, result } => {
                get(arg)?;
                let def = omega
                    .iter()
                    .find(|d| d.name == *name && d.bound == *bound)
                    .ok_or_else(|| OpError::Stuck(format!("procedure {name} is not in the store")))?;
                match bound {
                    Some(0) => {
                        let gamma = context_of(v)?;
                        let mut sigma = gamma.clone();
                        sigma.remove(arg);
                        sigma.insert(result.clone(), def.result_ty.clone());
                        done(Term::Zero { input: gamma, output: sigma }, v.clone(), rho.clone())
                    }
                    Some(n) => {
                        let body = def.body.rebound_proc(name, Some(*n), Some(n - 1));
                        let renamed = alpha_call(&def.param, &def.result, &body, arg, result, avoid);
                        Ok(vec![Succ {
                            term: renamed,
                            assignment: v.clone(),
                            store: omega.to_vec(),
                            rho: rho.clone(),
                            rename: Some((name.clone(), n - 1)),
                        }])
                    }
                    None => done(alpha_call(&def.param, &def.result, &def.body, arg, result, avoid), v.clone(), rho.clone()),
                }
            }
        }
    }

    /// Breadth-first expansion to `max_steps`; children in ff-before-tt order.
    pub fn enumerate(&self, c: &Configuration, max_steps: usize) -> Result<Enumeration, OpError> {
        let total = c.trace();
        let mut out = Enumeration::default();
        let mut layer = vec![Leaf { config: c.clone(), steps: 0, path: Vec::new() }];
        for depth in 0..=max_steps {
            let mut next = Vec::new();
            for node in layer {
                if node.config.is_skip() {
                    out.leaves.push(node);
                } else if node.config.is_zero() {
                    out.zero_leaves.push(node);
                } else if depth == max_steps {
                    out.frontier.push(node);
                } else {
                    out.expanded += 1;
                    let children = self.step(&node.config)?;
                    let branching = children.len() > 1;
                    for (i, child) in children.into_iter().enumerate() {
                        if self.prune_impossible && child.trace() <= 0.0 {
                            continue;
                        }
                        let mut path = node.path.clone();
                        if branching {
                            path.push(i as u8);
                        }
                        next.push(Leaf { config: child, steps: depth + 1, path });
                    }
                }
            }
            layer = next;
            if layer.is_empty() {
                break;
            }
        }
        let mass = |v: &[Leaf]| v.iter().map(|l| l.config.trace()).sum::<f64>() + 0.0;
        let norm = if total > 0.0 { total } else { 1.0 };
        out.halt_lower_bound = mass(&out.leaves) / norm;
        out.zero_mass = mass(&out.zero_leaves) / norm;
        out.frontier_mass = mass(&out.frontier) / norm;
        Ok(out)
    }

    /// Follows one path, choosing measurement outcomes by the Born rule and
    /// renormalising after each choice.
    pub fn sample(&self, c: &Configuration, seed: u64) -> Result<Sample, OpError> {
        let tr = c.trace();
        if tr <= 0.0 || tr.is_nan() {
            return Err(OpError::Stuck("cannot sample an impossible configuration".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cur = c.clone();
        cur.rho = cur.rho.scale(1.0 / tr);
        let mut choices = Vec::new();
        let mut probability = 1.0;
        let mut steps = 0;
        while !cur.is_terminal() {
            if steps >= self.step_cap {
                return Err(OpError::Timeout(self.step_cap));
            }
            let mut children = self.step(&cur)?;
            cur = if children.len() == 1 {
                children.pop().expect("one child")
            } else {
                let (t0, t1) = (children[0].trace().max(0.0), children[1].trace().max(0.0));
                let pick = usize::from(rng.gen::<f64>() * (t0 + t1) >= t0);
                choices.push(pick as u8);
                let mut d = children.swap_remove(pick);
                let t = d.trace();
                probability *= t / (t0 + t1);
                d.rho = d.rho.scale(1.0 / t);
                d
            };
            steps += 1;
        }
        Ok(Sample { config: cur, steps, choices, probability })
    }

    /// The reduction tree to `max_steps`, stopping early at `max_nodes`.
    pub fn reduction_tree(&self, c: &Configuration, max_steps: usize, max_nodes: usize) -> Result<ReductionTree, OpError> {
        let mut tree = ReductionTree::default();
        let node = |id: usize, depth: usize, cfg: &Configuration| TreeNode {
            id,
            depth,
            trace: cfg.trace(),
            term: cfg.term.to_string(),
            assignment: cfg.show_assignment(),
            terminal: cfg.is_terminal(),
            expanded: false,
        };
        tree.nodes.push(node(0, 0, c));
        let mut queue = std::collections::VecDeque::from([(0usize, c.clone())]);
        while let Some((id, cfg)) = queue.pop_front() {
            let depth = tree.nodes[id].depth;
            if cfg.is_terminal() || depth >= max_steps || tree.nodes.len() >= max_nodes {
                continue;
            }
            tree.nodes[id].expanded = true;
            let parent_trace = cfg.trace();
            for child in self.step(&cfg)? {
                if self.prune_impossible && child.trace() <= 0.0 {
                    continue;
                }
                let cid = tree.nodes.len();
                tree.nodes.push(node(cid, depth + 1, &child));
                let p = if parent_trace > 0.0 { child.trace() / parent_trace } else { 0.0 };
                tree.edges.push(TreeEdge { from: id, to: cid, probability: p });
                queue.push_back((cid, child));
            }
        }
        Ok(tree)
    }
}

/// A configuration reached after `steps` reductions; `path` lists the
/// measurement outcomes taken (0 for ff, 1 for tt).
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub config: Configuration,
    pub steps: usize,
    pub path: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Enumeration {
    /// `skip`-terminals.
    pub leaves: Vec<Leaf>,
    /// `0`-terminals of finitary runs.
    pub zero_leaves: Vec<Leaf>,
    /// Unterminated configurations at the depth cap.
    pub frontier: Vec<Leaf>,
    /// `Σ_{r ∈ TerSeq≤n} tr(End(r)) / tr(C)` over `skip`-terminals.
    pub halt_lower_bound: f64,
    pub zero_mass: f64,
    pub frontier_mass: f64,
    pub expanded: usize,
}

/// Leaves with the same assignment and the same matrix up to 1e-10.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafGroup {
    pub assignment: String,
    pub count: usize,
    pub mass: f64,
    pub rho: DensityMatrix,
    pub min_steps: usize,
}

impl Enumeration {
    pub fn grouped(&self) -> Vec<LeafGroup> {
        let mut groups: BTreeMap<(String, Vec<(i64, i64)>), LeafGroup> = BTreeMap::new();
        for leaf in &self.leaves {
            let key_m = leaf
                .config
                .rho
                .matrix()
                .iter()
                .map(|z| ((z.re * 1e10).round() as i64, (z.im * 1e10).round() as i64))
                .collect();
            let assignment = leaf.config.show_assignment();
            groups
                .entry((assignment.clone(), key_m))
                .and_modify(|g| {
                    g.count += 1;
                    g.mass += leaf.config.trace();
                    g.min_steps = g.min_steps.min(leaf.steps);
                })
                .or_insert_with(|| LeafGroup {
                    assignment,
                    count: 1,
                    mass: leaf.config.trace(),
                    rho: leaf.config.rho.clone(),
                    min_steps: leaf.steps,
                });
        }
        let mut out: Vec<LeafGroup> = groups.into_values().collect();
        out.sort_by_key(|g| g.min_steps);
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub config: Configuration,
    pub steps: usize,
    pub choices: Vec<u8>,
    /// Probability of the path taken, relative to the starting trace.
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub id: usize,
    pub depth: usize,
    pub trace: f64,
    pub term: String,
    pub assignment: String,
    pub terminal: bool,
    pub expanded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEdge {
    pub from: usize,
    pub to: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReductionTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
}

impl ReductionTree {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nodes": self.nodes.iter().map(|n| json!({
                "id": n.id,
                "depth": n.depth,
                "term": n.term,
                "assignment": n.assignment,
                "terminal": n.terminal,
                "expanded": n.expanded,
            })).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|e| json!({
                "from": e.from,
                "to": e.to,
                "probability": e.probability,
            })).collect::<Vec<_>>(),
            "traces": self.nodes.iter().map(|n| n.trace).collect::<Vec<_>>(),
        })
    }

    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph reduction {\n  node [shape=box, fontname=monospace];\n");
        for n in &self.nodes {
            let term = if n.term.len() > 48 { format!("{}...", &n.term[..n.term.char_indices().nth(45).map_or(n.term.len(), |(i, _)| i)]) } else { n.term.clone() };
            let style = if n.terminal { ", style=bold" } else { "" };
            out.push_str(&format!(
                "  n{} [label=\"{}\\n{}\\ntr = {:.6}\"{style}];\n",
                n.id,
                esc(&term),
                esc(&n.assignment),
                n.trace
            ));
        }
        for e in &self.edges {
            out.push_str(&format!("  n{} -> n{} [label=\"{:.4}\"];\n", e.from, e.to, e.probability));
        }
        out.push_str("}\n");
        out
    }
}

/// `M_α` for `y1 = f(x1)` with `f :: x2 → y2 { M }`: the input binding
/// becomes `x1`, every binding of `y2` becomes `y1`, and every other name
/// becomes fresh with respect to `avoid`.
///
/// Renaming is done per binding so that a body whose input and output share
/// a name still works when the call site uses two different names.  When
/// that is ambiguous (branches disagree on whether the input is still live,
/// or `y1` would be bound while `x1` is live) the argument is first moved
/// into a fresh name and the body is renamed name by name.
pub fn alpha_call(x2: &Var, y2: &Var, body: &Term, x1: &Var, y1: &Var, avoid: &BTreeSet<Var>) -> Term {
    let mut taken = avoid.clone();
    taken.insert(x1.clone());
    taken.insert(y1.clone());
    let mut names = body.var_names();
    names.insert(x2.clone());
    let mut fresh = BTreeMap::new();
    for n in names {
        let f = fresh_name(&n, &taken);
        taken.insert(f.clone());
        fresh.insert(n, f);
    }
    let r = CallRenamer { y2, y1, fresh: &fresh };
    let mut env = BTreeMap::from([(x2.clone(), x1.clone())]);
    if let Some(t) = r.term(&mut env, body) {
        if env == BTreeMap::from([(y2.clone(), y1.clone())]) {
            return t;
        }
    }
    let target = if x2 == y2 {
        y1.clone()
    } else {
        let t = fresh_name(x2, &taken);
        taken.insert(t.clone());
        t
    };
    let mut pick = |base: &str| {
        let n = fresh_name(base, &taken);
        taken.insert(n.clone());
        n
    };
    let (u, p, w) = (pick("u"), pick("p"), pick("w"));
    let map = |n: &Var| -> Var {
        if n == x2 {
            target.clone()
        } else if n == y2 {
            y1.clone()
        } else {
            fresh[n].clone()
        }
    };
    Term::seq_all(vec![
        Term::NewUnit { var: u.clone() },
        Term::Pair { dst: p.clone(), left: x1.clone(), right: u },
        Term::Unpair { left: target.clone(), right: w.clone(), src: p },
        Term::Discard { var: w },
        rename_vars(body, &map),
    ])
}

struct CallRenamer<'a> {
    y2: &'a Var,
    y1: &'a Var,
    fresh: &'a BTreeMap<Var, Var>,
}

type Env = BTreeMap<Var, Var>;

impl CallRenamer<'_> {
    fn bind(&self, env: &mut Env, x: &Var) -> Option<Var> {
        let target = if x == self.y2 { self.y1.clone() } else { self.fresh.get(x)?.clone() };
        if env.contains_key(x) || env.values().any(|t| *t == target) {
            return None;
        }
        env.insert(x.clone(), target.clone());
        Some(target)
    }

    fn read(&self, env: &Env, x: &Var) -> Option<Var> {
        env.get(x).cloned()
    }

    fn take(&self, env: &mut Env, x: &Var) -> Option<Var> {
        env.remove(x)
    }

    fn term(&self, env: &mut Env, t: &Term) -> Option<Term> {
        Some(match t {
            Term::NewUnit { var } => Term::NewUnit { var: self.bind(env, var)? },
            Term::NewQbit { var } => Term::NewQbit { var: self.bind(env, var)? },
            Term::Discard { var } => Term::Discard { var: self.take(env, var)? },
            Term::Copy { dst, src } => {
                let src = self.read(env, src)?;
                Term::Copy { src, dst: self.bind(env, dst)? }
            }
            Term::Measure { bit, qubit } => {
                let qubit = self.take(env, qubit)?;
                Term::Measure { qubit, bit: self.bind(env, bit)? }
            }
            Term::Unitary { gate, qubits } => Term::Unitary {
                gate: gate.clone(),
                qubits: qubits.iter().map(|q| self.read(env, q)).collect::<Option<_>>()?,
            },
            Term::Seq(a, b) => {
                let a = self.term(env, a)?;
                Term::seq(a, self.term(env, b)?)
            }
            Term::Skip => Term::Skip,
            Term::While { bound, cond, body } => {
                let cond2 = self.read(env, cond)?;
                let before = env.clone();
                let body = self.term(env, body)?;
                if *env != before {
                    return None;
                }
                Term::While { bound: *bound, cond: cond2, body: Box::new(body) }
            }
            Term::Left { dst, src, left, right } => {
                let src = self.take(env, src)?;
                Term::Left { src, dst: self.bind(env, dst)?, left: left.clone(), right: right.clone() }
            }
            Term::Right { dst, src, left, right } => {
                let src = self.take(env, src)?;
                Term::Right { src, dst: self.bind(env, dst)?, left: left.clone(), right: right.clone() }
            }
            Term::Case { scrutinee, left_var, left_body, right_var, right_body } => {
                let scrutinee = self.take(env, scrutinee)?;
                let mut el = env.clone();
                let lv = self.bind(&mut el, left_var)?;
                let lb = self.term(&mut el, left_body)?;
                let mut er = env.clone();
                let rv = self.bind(&mut er, right_var)?;
                let rb = self.term(&mut er, right_body)?;
                if el != er {
                    return None;
                }
                *env = el;
                Term::Case {
                    scrutinee,
                    left_var: lv,
                    left_body: Box::new(lb),
                    right_var: rv,
                    right_body: Box::new(rb),
                }
            }
            Term::Pair { dst, left, right } => {
                let left = self.take(env, left)?;
                let right = self.take(env, right)?;
                Term::Pair { left, right, dst: self.bind(env, dst)? }
            }
            Term::Unpair { left, right, src } => {
                let src = self.take(env, src)?;
                let left = self.bind(env, left)?;
                Term::Unpair { left, right: self.bind(env, right)?, src }
            }
            Term::Fold { dst, src, ty } => {
                let src = self.take(env, src)?;
                Term::Fold { src, dst: self.bind(env, dst)?, ty: ty.clone() }
            }
            Term::Unfold { dst, src } => {
                let src = self.take(env, src)?;
                Term::Unfold { src, dst: self.bind(env, dst)? }
            }
            Term::Call { name, bound, arg, result } => {
                let arg = self.take(env, arg)?;
                Term::Call { name: name.clone(), bound: *bound, arg, result: self.bind(env, result)? }
            }
            Term::Zero { input, output } => {
                let mut input2 = VarContext::new();
                for (x, ty) in input {
                    input2.insert(self.take(env, x)?, ty.clone());
                }
                if !env.is_empty() {
                    return None;
                }
                let mut output2 = VarContext::new();
                for (x, ty) in output {
                    output2.insert(self.bind(env, x)?, ty.clone());
                }
                Term::Zero { input: input2, output: output2 }
            }
            Term::ProcDef(_) => return None,
        })
    }
}

/// Applies `f` to every variable occurrence, bound or free.
pub fn rename_vars(t: &Term, f: &dyn Fn(&Var) -> Var) -> Term {
    let ctx = |c: &VarContext| c.iter().map(|(x, ty)| (f(x), ty.clone())).collect();
    match t {
        Term::NewUnit { var } => Term::NewUnit { var: f(var) },
        Term::Discard { var } => Term::Discard { var: f(var) },
        Term::NewQbit { var } => Term::NewQbit { var: f(var) },
        Term::Copy { dst, src } => Term::Copy { dst: f(dst), src: f(src) },
        Term::Measure { bit, qubit } => Term::Measure { bit: f(bit), qubit: f(qubit) },
        Term::Unitary { gate, qubits } => Term::Unitary { gate: gate.clone(), qubits: qubits.iter().map(f).collect() },
        Term::Seq(a, b) => Term::seq(rename_vars(a, f), rename_vars(b, f)),
        Term::Skip => Term::Skip,
        Term::While { bound, cond, body } => {
            Term::While { bound: *bound, cond: f(cond), body: Box::new(rename_vars(body, f)) }
        }
        Term::Left { dst, src, left, right } => {
            Term::Left { dst: f(dst), src: f(src), left: left.clone(), right: right.clone() }
        }
        Term::Right { dst, src, left, right } => {
            Term::Right { dst: f(dst), src: f(src), left: left.clone(), right: right.clone() }
        }
        Term::Case { scrutinee, left_var, left_body, right_var, right_body } => Term::Case {
            scrutinee: f(scrutinee),
            left_var: f(left_var),
            left_body: Box::new(rename_vars(left_body, f)),
            right_var: f(right_var),
            right_body: Box::new(rename_vars(right_body, f)),
        },
        Term::Pair { dst, left, right } => Term::Pair { dst: f(dst), left: f(left), right: f(right) },
        Term::Unpair { left, right, src } => Term::Unpair { left: f(left), right: f(right), src: f(src) },
        Term::Fold { dst, src, ty } => Term::Fold { dst: f(dst), src: f(src), ty: ty.clone() },
        Term::Unfold { dst, src } => Term::Unfold { dst: f(dst), src: f(src) },
        Term::ProcDef(d) => Term::ProcDef(d.clone()),
        Term::Call { name, bound, arg, result } => {
            Term::Call { name: name.clone(), bound: *bound, arg: f(arg), result: f(result) }
        }
        Term::Zero { input, output } => Term::Zero { input: ctx(input), output: ctx(output) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_term};
    use crate::qmath::{c, ghz_state, CMatrix};

    fn plus() -> DensityMatrix {
        DensityMatrix::from_matrix(CMatrix::from_element(2, 2, c(0.5, 0.0))).unwrap()
    }

    #[test]
    fn seq1_drops_skip() {
        let m = Machine::default();
        let cfg = Configuration::initial(parse_term("skip; new unit u").unwrap(), vec![]);
        let next = m.step(&cfg).unwrap();
        assert_eq!(next.len(), 1);
        assert_eq!(next[0].term, Term::NewUnit { var: "u".into() });
    }

    #[test]
    fn measuring_plus_gives_two_halves() {
        let m = Machine::default().verifying();
        let cfg = Configuration::new(
            parse_term("b = measure q").unwrap(),
            Assignment::from([("q".into(), Value::Qubit(1))]),
            vec![],
            plus(),
        );
        let next = m.step(&cfg).unwrap();
        assert_eq!(next.len(), 2);
        assert_eq!(next[0].assignment["b"], Value::ff());
        assert_eq!(next[1].assignment["b"], Value::tt());
        for d in &next {
            assert_eq!(d.rho.n_qubits(), 0);
            assert!((d.trace() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn discard_reindexes_pointers() {
        let rho = DensityMatrix::from_matrix(CMatrix::identity(8, 8).scale(1.0 / 8.0)).unwrap();
        let v = Assignment::from([
            ("a".into(), Value::Qubit(1)),
            ("q".into(), Value::Qubit(2)),
            ("r".into(), Value::Qubit(3)),
        ]);
        let cfg = Configuration::new(Term::Skip, v, vec![], rho.clone());
        let d = discard_value(&cfg, "q").unwrap();
        assert_eq!(d.assignment["a"], Value::Qubit(1));
        assert_eq!(d.assignment["r"], Value::Qubit(2));
        assert_eq!(d.rho.n_qubits(), 2);

        let v = Assignment::from([
            ("x".into(), Value::pair(Value::Qubit(1), Value::Qubit(2))),
            ("y".into(), Value::Qubit(3)),
        ]);
        let d = discard_value(&Configuration::new(Term::Skip, v, vec![], rho), "x").unwrap();
        assert_eq!(d.assignment["y"], Value::Qubit(1));
        assert_eq!(d.rho.n_qubits(), 1);

        let v = Assignment::from([("b".into(), Value::tt())]);
        let cfg = Configuration::new(Term::Skip, v, vec![], DensityMatrix::one());
        assert_eq!(discard_value(&cfg, "b").unwrap().rho, DensityMatrix::one());
        assert_eq!(discard_value(&cfg, "z"), Err(OpError::UnboundVariable("z".into())));
    }

    #[test]
    fn indexed_call_at_zero_yields_zero_term() {
        let src = "proc f^0 :: x : qbit -> y : qbit { y = f^0(x) }; new qbit a; b = f^0(a)";
        let p = parse_program(src).unwrap();
        let m = Machine::default().verifying();
        let e = m.enumerate(&Configuration::from_program(&p), 50).unwrap();
        assert!(e.leaves.is_empty());
        assert_eq!(e.zero_leaves.len(), 1);
        assert!((e.zero_mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn call_alpha_renaming_keeps_names_apart() {
        let body = parse_term("t = copy x; discard x; y = copy t; discard t").unwrap();
        let avoid = BTreeSet::from(["x".to_string(), "t".to_string()]);
        let r = alpha_call(&"x".into(), &"y".into(), &body, &"x".into(), &"x".into(), &avoid);
        assert_eq!(r.to_string(), "t#0 = copy x; discard x; x = copy t#0; discard t#0");
        // input still live when the output name is bound: falls back to a prologue
        let body = parse_term("y = copy x; discard x").unwrap();
        let r = alpha_call(&"x".into(), &"y".into(), &body, &"a".into(), &"a".into(), &BTreeSet::new());
        let pi = crate::ast::ProcContext::new();
        let gamma = VarContext::from([("a".to_string(), Type::bit())]);
        let sigma = crate::typecheck::check_term(&pi, &gamma, &r).unwrap();
        assert_eq!(sigma, gamma);
    }

    #[test]
    fn ghz_driver_reaches_gamma_3() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/programs/ghz.qpl")).unwrap();
        let p = parse_program(&src).unwrap();
        let m = Machine::default().verifying();
        let e = m.enumerate(&Configuration::from_program(&p), 2000).unwrap();
        assert_eq!(e.leaves.len(), 1);
        assert_eq!(e.frontier_mass, 0.0);
        let leaf = &e.leaves[0].config;
        assert!(leaf.rho.max_abs_diff(&ghz_state(3).unwrap()) < 1e-12);
    }
}

#[cfg(test)]
mod coin_tests {
    use super::*;
    use crate::parser::parse_program;

    fn coin() -> Configuration {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/programs/cointoss.qpl")).unwrap();
        Configuration::from_program(&parse_program(&src).unwrap())
    }

    #[test]
    fn coin_toss_leaves() {
        let m = Machine::default().verifying();
        let e = m.enumerate(&coin(), 60).unwrap();
        let steps: Vec<usize> = e.leaves.iter().map(|l| l.steps).collect();
        assert_eq!(steps, vec![19, 31, 43, 55]);
        for (i, l) in e.leaves.iter().enumerate() {
            assert!((l.config.trace() - 0.5f64.powi(i as i32 + 1)).abs() < 1e-12);
            assert_eq!(l.config.assignment.get("b"), Some(&Value::ff()));
        }
        assert!((e.halt_lower_bound - (1.0 - 0.5f64.powi(4))).abs() < 1e-12);
    }

    #[test]
    fn coin_toss_sampling() {
        let m = Machine::default();
        let a = m.sample(&coin(), 7).unwrap();
        let b = m.sample(&coin(), 7).unwrap();
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.choices, b.choices);
        let n = 2000;
        let total: usize = (0..n).map(|s| (m.sample(&coin(), s).unwrap().steps - 7) / 12).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 2.0).abs() < 0.15, "mean exit round {mean}");
    }
}
