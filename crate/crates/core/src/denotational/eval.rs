//! Term evaluation on sparse context states, procedure environments and the
//! entry points `denote_term`, `denote_store` and `denote_config`.
//!
//! A state over a context `x1 : A1, ..., xn : An` is kept as a map from
//! block tuples `(b1, ..., bn)` to matrices on `⊗ dim(bi)`, with the
//! variables in whatever order the last operation left them.  Each rule
//! first permutes the variables it addresses to the end, acts there, and
//! leaves the rest untouched.  Results are sorted by name before they are
//! compared or flattened into a [`BlockState`].

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;
use std::rc::Rc;

use super::space::{denote_type, flat_index, mu_chain, split_index, BlockMap, BlockSpace};
use super::superop::{diagonal_copy, BlockState, Superoperator};
use super::values::value_block;
use super::DenoteError;
use crate::ast::{ProcContext, ProcDef, ProcSig, Term, Type, Var, VarContext};
use crate::operational::{rename_vars, Assignment, Configuration};
use crate::qmath::{c, factor_element, kron, permute_factors, trace_factor, CMatrix, DensityMatrix, GateRegistry};
use crate::typecheck::Checker;

/// One variable of a context state.
#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub name: Var,
    pub ty: Type,
    pub space: BlockSpace,
}

/// A state on `⟦Γ⟧`, storing only the blocks that are not exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct CtxState {
    pub vars: Vec<Slot>,
    pub blocks: BTreeMap<Vec<usize>, CMatrix>,
}

fn add_block(blocks: &mut BTreeMap<Vec<usize>, CMatrix>, key: Vec<usize>, m: CMatrix) {
    match blocks.get_mut(&key) {
        Some(acc) => *acc += m,
        None => {
            blocks.insert(key, m);
        }
    }
}

impl CtxState {
    /// The scalar `1` on the empty context.
    pub fn unit() -> CtxState {
        CtxState { vars: Vec::new(), blocks: BTreeMap::from([(Vec::new(), CMatrix::identity(1, 1))]) }
    }

    pub fn zero(vars: Vec<Slot>) -> CtxState {
        CtxState { vars, blocks: BTreeMap::new() }
    }

    /// Zero state on a context, variables in name order.
    pub fn zero_on(ctx: &VarContext, k: usize) -> CtxState {
        CtxState::zero(ctx.iter().map(|(x, t)| Slot { name: x.clone(), ty: t.clone(), space: denote_type(t, k) }).collect())
    }

    fn dims(&self, key: &[usize]) -> Vec<usize> {
        key.iter().zip(&self.vars).map(|(b, s)| s.space.blocks[*b]).collect()
    }

    pub fn position(&self, x: &str) -> Result<usize, DenoteError> {
        self.vars
            .iter()
            .position(|s| s.name == x)
            .ok_or_else(|| DenoteError::IllFormed(format!("variable `{x}` is not in the state")))
    }

    /// New variable `j` is old variable `order[j]`.
    pub fn reorder(&mut self, order: &[usize]) {
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return;
        }
        let mut blocks = BTreeMap::new();
        for (key, m) in std::mem::take(&mut self.blocks) {
            let dims = self.dims(&key);
            let nk = order.iter().map(|&i| key[i]).collect();
            blocks.insert(nk, permute_factors(&m, &dims, order));
        }
        self.vars = order.iter().map(|&i| self.vars[i].clone()).collect();
        self.blocks = blocks;
    }

    /// Moves the named variables to the end, in the given order.
    fn move_last(&mut self, names: &[&Var]) -> Result<(), DenoteError> {
        let pos = names.iter().map(|x| self.position(x)).collect::<Result<Vec<_>, _>>()?;
        let mut order: Vec<usize> = (0..self.vars.len()).filter(|i| !pos.contains(i)).collect();
        order.extend(pos);
        self.reorder(&order);
        Ok(())
    }

    /// Variables sorted by name.
    pub fn canonical(mut self) -> CtxState {
        let mut order: Vec<usize> = (0..self.vars.len()).collect();
        order.sort_by(|&a, &b| self.vars[a].name.cmp(&self.vars[b].name));
        self.reorder(&order);
        self
    }

    pub fn add_assign(&mut self, other: CtxState) -> Result<(), DenoteError> {
        if other.vars.len() != self.vars.len() {
            return Err(DenoteError::IllFormed("adding states on different contexts".into()));
        }
        let order = self.vars.iter().map(|s| other.position(&s.name)).collect::<Result<Vec<_>, _>>()?;
        let mut other = other;
        other.reorder(&order);
        for (key, m) in other.blocks {
            add_block(&mut self.blocks, key, m);
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.blocks.retain(|_, m| m.iter().any(|z| *z != c(0.0, 0.0)));
    }

    pub fn trace(&self) -> f64 {
        self.blocks.values().map(|m| m.trace().re).sum()
    }

    pub fn context(&self) -> VarContext {
        self.vars.iter().map(|s| (s.name.clone(), s.ty.clone())).collect()
    }

    pub fn space(&self) -> BlockSpace {
        BlockSpace::tensor_all(self.vars.iter().map(|s| &s.space))
    }

    /// Flattens into `⊗_i ⟦Ai⟧` in the current variable order.
    pub fn to_block_state(&self) -> BlockState {
        let spaces: Vec<&BlockSpace> = self.vars.iter().map(|s| &s.space).collect();
        let mut out = BlockState::zero(&self.space());
        for (key, m) in &self.blocks {
            out.blocks[flat_index(key, &spaces)] = m.clone();
        }
        out
    }

    pub fn from_block_state(vars: Vec<Slot>, s: &BlockState) -> CtxState {
        let spaces: Vec<&BlockSpace> = vars.iter().map(|s| &s.space).collect();
        let blocks = s
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, m)| m.iter().any(|z| *z != c(0.0, 0.0)))
            .map(|(i, m)| (split_index(i, &spaces), m.clone()))
            .collect();
        CtxState { vars, blocks }
    }

    /// Splits on the blocks of variable `x`: the part with `x` in block 0
    /// and the part with `x` in block 1.
    fn split_bit(&self, x: &str) -> Result<(CtxState, CtxState), DenoteError> {
        let p = self.position(x)?;
        let (mut ff, mut tt) = (CtxState::zero(self.vars.clone()), CtxState::zero(self.vars.clone()));
        for (key, m) in &self.blocks {
            let side = if key[p] == 0 { &mut ff } else { &mut tt };
            side.blocks.insert(key.clone(), m.clone());
        }
        Ok((ff, tt))
    }
}

/// A procedure's meaning.  `Kleene` evaluates the body on demand with the
/// procedure itself bound to one fewer iteration; zero iterations is the
/// zero map.
#[derive(Clone, Debug)]
pub enum ProcValue {
    Kleene { def: Rc<ProcDef>, outer: ProcEnv, iterations: usize },
    Dense { map: Rc<Superoperator>, sig: ProcSig },
}

impl ProcValue {
    pub fn sig(&self) -> ProcSig {
        match self {
            ProcValue::Kleene { def, .. } => def.sig(),
            ProcValue::Dense { sig, .. } => sig.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ProcEnv {
    pub entries: BTreeMap<String, ProcValue>,
}

impl ProcEnv {
    pub fn get(&self, name: &str) -> Option<&ProcValue> {
        self.entries.get(name)
    }

    pub fn insert(&mut self, name: &str, v: ProcValue) {
        self.entries.insert(name.to_string(), v);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The procedure context this environment interprets.
    pub fn procs(&self) -> ProcContext {
        self.entries.iter().map(|(n, v)| (n.clone(), v.sig())).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// Mass still inside a loop or recursion when the iterations ran out.
    NotConverged { residual: f64 },
    /// Mass dropped by folding past the truncation depth.
    Truncated { loss: f64 },
}

/// `⟦C⟧` as a state on `⟦Σ⟧`, variables in name order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDenotation {
    pub context: VarContext,
    pub state: BlockState,
    pub truncation_loss: f64,
    pub residual: f64,
    pub warnings: Vec<Warning>,
}

/// `⟦Γ ⊢ M : Σ⟧` with its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct TermDenotation {
    pub map: Superoperator,
    pub input: VarContext,
    pub output: VarContext,
    pub truncation_loss: f64,
    pub residual: f64,
    pub warnings: Vec<Warning>,
}

/// Evaluation settings: gate set, truncation depth and Kleene iterations.
#[derive(Clone, Debug)]
pub struct Denoter {
    pub gates: GateRegistry,
    pub k: usize,
    pub fix_iters: usize,
    pub tol: f64,
}

impl Default for Denoter {
    fn default() -> Denoter {
        Denoter { gates: GateRegistry::builtin(), k: 8, fix_iters: 64, tol: 1e-9 }
    }
}

struct Run<'a> {
    d: &'a Denoter,
    depth: Cell<usize>,
    loss: Cell<f64>,
    residual: Cell<f64>,
    chains: RefCell<BTreeMap<Type, BlockMap>>,
}

impl Denoter {
    pub fn new(gates: GateRegistry, k: usize, fix_iters: usize) -> Denoter {
        Denoter { gates, k, fix_iters, ..Denoter::default() }
    }

    fn run(&self) -> Run<'_> {
        Run { d: self, depth: Cell::new(0), loss: Cell::new(0.0), residual: Cell::new(0.0), chains: RefCell::default() }
    }

    fn warnings(&self, loss: f64, residual: f64) -> Vec<Warning> {
        let mut w = Vec::new();
        if residual > self.tol {
            w.push(Warning::NotConverged { residual });
        }
        if loss > self.tol {
            w.push(Warning::Truncated { loss });
        }
        w
    }

    pub fn slot(&self, name: &str, ty: &Type) -> Slot {
        Slot { name: name.to_string(), ty: ty.clone(), space: denote_type(ty, self.k) }
    }

    /// Definitions in order; unbounded ones get `fix_iters` iterations, `f^n` gets `n`.
    pub fn denote_store(&self, omega: &[ProcDef]) -> ProcEnv {
        let mut env = ProcEnv::default();
        for d in omega {
            self.define(&mut env, d);
        }
        env
    }

    fn define(&self, env: &mut ProcEnv, d: &ProcDef) {
        let iterations = d.bound.map_or(self.fix_iters, |n| n as usize);
        let v = ProcValue::Kleene { def: Rc::new(d.clone()), outer: env.clone(), iterations };
        env.insert(&d.name, v);
    }

    /// The superoperator `⟦Γ⟧ → ⟦Σ⟧` of `m`, contexts in name order.
    pub fn denote_term(&self, m: &Term, env: &ProcEnv, gamma: &VarContext) -> Result<TermDenotation, DenoteError> {
        let output = Checker::new(&self.gates).check_term(&env.procs(), gamma, m)?;
        let slots: Vec<Slot> = gamma.iter().map(|(x, t)| self.slot(x, t)).collect();
        let spaces: Vec<&BlockSpace> = slots.iter().map(|s| &s.space).collect();
        let domain = BlockSpace::tensor_all(spaces.iter().copied());
        let codomain = BlockSpace::tensor_all(output.values().map(|t| denote_type(t, self.k)).collect::<Vec<_>>().iter());
        let run = self.run();
        let map = Superoperator::from_fn(&domain, &codomain, |b, e| {
            let key = split_index(b, &spaces);
            let s = CtxState { vars: slots.clone(), blocks: BTreeMap::from([(key, e.clone())]) };
            let out = run.eval(m, s, &mut env.clone())?.canonical();
            Ok::<_, DenoteError>(out.to_block_state())
        })?;
        let (loss, residual) = (run.loss.get(), run.residual.get());
        Ok(TermDenotation {
            map,
            input: gamma.clone(),
            output,
            truncation_loss: loss,
            residual,
            warnings: self.warnings(loss, residual),
        })
    }

    /// `⟦V⟧ ∘ ρ`: the qubits are permuted into the order in which the values
    /// (sorted by variable) mention them.
    pub fn assignment_state(&self, v: &Assignment, rho: &DensityMatrix) -> Result<CtxState, DenoteError> {
        let mut order = Vec::new();
        let mut key = Vec::new();
        let mut vars = Vec::new();
        for (x, w) in v {
            order.extend(w.qubits());
            let (b, ty) = value_block(w, self.k)?;
            key.push(b);
            vars.push(self.slot(x, &ty));
        }
        if order.len() != rho.n_qubits() {
            return Err(DenoteError::IllFormed("value pointers do not cover the density matrix".into()));
        }
        let m = rho.permute_qubits(&order).into_matrix();
        let mut s = CtxState { vars, blocks: BTreeMap::from([(key, m)]) };
        s.prune();
        Ok(s)
    }

    /// `⟦C⟧ = ⟦M⟧(⟦Ω⟧) ∘ ⟦V⟧ ∘ ρ`.
    pub fn denote_config(&self, c: &Configuration) -> Result<StateDenotation, DenoteError> {
        let mut env = self.denote_store(&c.store);
        let s = self.assignment_state(&c.assignment, &c.rho)?;
        let run = self.run();
        let out = run.eval(&c.term, s, &mut env)?.canonical();
        let (loss, residual) = (run.loss.get(), run.residual.get());
        Ok(StateDenotation {
            context: out.context(),
            state: out.to_block_state(),
            truncation_loss: loss,
            residual,
            warnings: self.warnings(loss, residual),
        })
    }

    /// `⟦f⟧ : ⟦A⟧ → ⟦B⟧` for a procedure of the environment.
    pub fn procedure(&self, env: &ProcEnv, name: &str) -> Result<TermDenotation, DenoteError> {
        let sig = env.get(name).ok_or_else(|| DenoteError::IllFormed(format!("unknown procedure {name}")))?.sig();
        let call = Term::Call { name: name.into(), bound: sig.bound, arg: "x".into(), result: "y".into() };
        self.denote_term(&call, env, &VarContext::from([("x".to_string(), sig.input)]))
    }

    /// `△ : ⟦P⟧ → ⟦P⟧ ⊗ ⟦P⟧` for classical `P`.
    pub fn copy_map(&self, p: &Type) -> Result<Superoperator, DenoteError> {
        if !p.is_classical() {
            return Err(DenoteError::NotClassical(p.to_string()));
        }
        diagonal_copy(&denote_type(p, self.k)).ok_or_else(|| DenoteError::NotClassical(p.to_string()))
    }

    /// `(fold, unfold)` between `⟦A[μX.A/X]⟧_k` and `⟦μX.A⟧_k`.
    pub fn fold_iso(&self, mu: &Type) -> Result<(Superoperator, Superoperator), DenoteError> {
        if !matches!(mu, Type::Mu(..)) || !mu.is_closed() {
            return Err(DenoteError::IllFormed(format!("{mu} is not a closed recursive type")));
        }
        let s = mu_chain(mu, self.k);
        let unfold = Superoperator::from_fn(&s.from, &s.to, |b, e| {
            Ok::<_, DenoteError>(BlockState::single(&s.to, s.map[b], e.clone()))
        })?;
        let fold = Superoperator::from_fn(&s.to, &s.from, |b, e| {
            Ok::<_, DenoteError>(match s.preimage(b) {
                Some(i) => BlockState::single(&s.from, i, e.clone()),
                None => BlockState::zero(&s.from),
            })
        })?;
        Ok((fold, unfold))
    }
}

impl Run<'_> {
    fn chain(&self, mu: &Type) -> BlockMap {
        self.chains.borrow_mut().entry(mu.clone()).or_insert_with(|| mu_chain(mu, self.d.k)).clone()
    }

    fn space(&self, t: &Type) -> BlockSpace {
        denote_type(t, self.d.k)
    }

    fn slot_type(&self, s: &CtxState, x: &str) -> Result<Type, DenoteError> {
        Ok(s.vars[s.position(x)?].ty.clone())
    }

    fn eval(&self, t: &Term, mut s: CtxState, env: &mut ProcEnv) -> Result<CtxState, DenoteError> {
        let last = |s: &CtxState| s.vars.len() - 1;
        let out = match t {
            Term::Skip => s,
            Term::Seq(a, b) => {
                let s = self.eval(a, s, env)?;
                self.eval(b, s, env)?
            }
            Term::NewUnit { var } => {
                let blocks = std::mem::take(&mut s.blocks);
                for (mut key, m) in blocks {
                    key.push(0);
                    s.blocks.insert(key, m);
                }
                s.vars.push(self.d.slot(var, &Type::Unit));
                s
            }
            Term::NewQbit { var } => {
                let mut ket0 = CMatrix::zeros(2, 2);
                ket0[(0, 0)] = c(1.0, 0.0);
                let blocks = std::mem::take(&mut s.blocks);
                for (mut key, m) in blocks {
                    key.push(0);
                    s.blocks.insert(key, kron(&m, &ket0));
                }
                s.vars.push(self.d.slot(var, &Type::Qbit));
                s
            }
            Term::Discard { var } => {
                s.move_last(&[var])?;
                let p = last(&s);
                let mut out = CtxState::zero(s.vars[..p].to_vec());
                for (key, m) in &s.blocks {
                    add_block(&mut out.blocks, key[..p].to_vec(), trace_factor(m, &s.dims(key), p));
                }
                out
            }
            Term::Copy { dst, src } => {
                let p = s.position(src)?;
                let slot = Slot { name: dst.clone(), ..s.vars[p].clone() };
                if !slot.space.is_classical() {
                    return Err(DenoteError::NotClassical(slot.ty.to_string()));
                }
                let blocks = std::mem::take(&mut s.blocks);
                for (mut key, m) in blocks {
                    key.push(key[p]);
                    s.blocks.insert(key, m);
                }
                s.vars.push(slot);
                s
            }
            Term::Measure { bit, qubit } => {
                s.move_last(&[qubit])?;
                let p = last(&s);
                let mut vars = s.vars[..p].to_vec();
                vars.push(self.d.slot(bit, &Type::bit()));
                let mut out = CtxState::zero(vars);
                for (key, m) in &s.blocks {
                    let dims = s.dims(key);
                    for o in 0..2 {
                        let mut k2 = key[..p].to_vec();
                        k2.push(o);
                        add_block(&mut out.blocks, k2, factor_element(m, &dims, p, o, o));
                    }
                }
                out
            }
            Term::Unitary { gate, qubits } => {
                let g = self.d.gates.get(gate)?;
                let names: Vec<&Var> = qubits.iter().collect();
                s.move_last(&names)?;
                for m in s.blocks.values_mut() {
                    let rest = m.nrows() >> qubits.len();
                    let u = kron(&CMatrix::identity(rest, rest), &g.matrix);
                    *m = &u * &*m * u.adjoint();
                }
                s
            }
            Term::While { bound, cond, body } => {
                let iters = bound.map_or(self.d.fix_iters, |n| n as usize);
                let mut acc = CtxState::zero(s.vars.clone());
                let mut cur = s;
                for _ in 0..iters {
                    if cur.blocks.is_empty() {
                        break;
                    }
                    let (ff, tt) = cur.split_bit(cond)?;
                    acc.add_assign(ff)?;
                    cur = self.eval(body, tt, env)?;
                }
                if bound.is_none() {
                    self.residual.set(self.residual.get() + cur.trace());
                }
                acc
            }
            Term::Left { dst, src, left, right } | Term::Right { dst, src, left, right } => {
                s.move_last(&[src])?;
                let p = last(&s);
                let shift = if matches!(t, Term::Right { .. }) { self.space(left).len() } else { 0 };
                let ty = Type::sum(left.clone(), right.clone());
                s.vars[p] = self.d.slot(dst, &ty);
                let blocks = std::mem::take(&mut s.blocks);
                for (mut key, m) in blocks {
                    key[p] += shift;
                    s.blocks.insert(key, m);
                }
                s
            }
            Term::Case { scrutinee, left_var, left_body, right_var, right_body } => {
                let (a, b) = match self.slot_type(&s, scrutinee)? {
                    Type::Sum(a, b) => (*a, *b),
                    other => return Err(DenoteError::IllFormed(format!("case on {other}"))),
                };
                s.move_last(&[scrutinee])?;
                let p = last(&s);
                let width = self.space(&a).len();
                let mut lv = s.vars.clone();
                lv[p] = self.d.slot(left_var, &a);
                let mut rv = s.vars.clone();
                rv[p] = self.d.slot(right_var, &b);
                let (mut ls, mut rs) = (CtxState::zero(lv), CtxState::zero(rv));
                for (mut key, m) in std::mem::take(&mut s.blocks) {
                    if key[p] < width {
                        ls.blocks.insert(key, m);
                    } else {
                        key[p] -= width;
                        rs.blocks.insert(key, m);
                    }
                }
                let mut out = self.eval(left_body, ls, env)?;
                out.add_assign(self.eval(right_body, rs, env)?)?;
                out
            }
            Term::Pair { dst, left, right } => {
                s.move_last(&[left, right])?;
                let p = s.vars.len() - 2;
                let (a, b) = (s.vars[p].clone(), s.vars[p + 1].clone());
                let width = b.space.len();
                s.vars.truncate(p);
                s.vars.push(self.d.slot(dst, &Type::tensor(a.ty, b.ty)));
                for (mut key, m) in std::mem::take(&mut s.blocks) {
                    let j = key.pop().expect("two factors");
                    let i = key.pop().expect("two factors");
                    key.push(i * width + j);
                    s.blocks.insert(key, m);
                }
                s
            }
            Term::Unpair { left, right, src } => {
                let (a, b) = match self.slot_type(&s, src)? {
                    Type::Tensor(a, b) => (*a, *b),
                    other => return Err(DenoteError::IllFormed(format!("unpair of {other}"))),
                };
                s.move_last(&[src])?;
                let width = self.space(&b).len();
                s.vars.pop();
                s.vars.push(self.d.slot(left, &a));
                s.vars.push(self.d.slot(right, &b));
                for (mut key, m) in std::mem::take(&mut s.blocks) {
                    let ij = key.pop().expect("one factor");
                    key.push(ij / width);
                    key.push(ij % width);
                    s.blocks.insert(key, m);
                }
                s
            }
            Term::Fold { dst, src, ty } => {
                s.move_last(&[src])?;
                let p = last(&s);
                let chain = self.chain(ty);
                s.vars[p] = Slot { name: dst.clone(), ty: ty.clone(), space: chain.from.clone() };
                for (mut key, m) in std::mem::take(&mut s.blocks) {
                    match chain.preimage(key[p]) {
                        Some(i) => {
                            key[p] = i;
                            s.blocks.insert(key, m);
                        }
                        None => self.loss.set(self.loss.get() + m.trace().re),
                    }
                }
                s
            }
            Term::Unfold { dst, src } => {
                let mu = self.slot_type(&s, src)?;
                let unfolded = mu.unfold_mu().ok_or_else(|| DenoteError::IllFormed(format!("unfold of {mu}")))?;
                s.move_last(&[src])?;
                let p = last(&s);
                let chain = self.chain(&mu);
                s.vars[p] = Slot { name: dst.clone(), ty: unfolded, space: chain.to.clone() };
                for (mut key, m) in std::mem::take(&mut s.blocks) {
                    key[p] = chain.map[key[p]];
                    s.blocks.insert(key, m);
                }
                s
            }
            Term::ProcDef(d) => {
                self.d.define(env, d);
                s
            }
            Term::Call { name, arg, result, .. } => self.call(name, arg, result, s, env)?,
            Term::Zero { output, .. } => CtxState::zero_on(output, self.d.k),
        };
        let mut out = out;
        out.prune();
        Ok(out)
    }

    fn call(&self, name: &str, arg: &Var, result: &Var, mut s: CtxState, env: &ProcEnv) -> Result<CtxState, DenoteError> {
        let pv = env.get(name).ok_or_else(|| DenoteError::IllFormed(format!("unknown procedure {name}")))?;
        let p = s.position(arg)?;
        let out_slot = self.d.slot(result, &pv.sig().output);
        let exhausted = matches!(pv, ProcValue::Kleene { iterations: 0, .. });
        if exhausted {
            self.residual.set(self.residual.get() + s.trace());
        }
        if exhausted || s.blocks.is_empty() {
            let mut vars = s.vars;
            vars[p] = out_slot;
            return Ok(CtxState::zero(vars));
        }
        match pv {
            ProcValue::Kleene { def, outer, iterations } => {
                let d = self.depth.get() + 1;
                self.depth.set(d);
                let tag = |v: &Var| format!("{v}@{d}");
                let body = rename_vars(&def.body, &tag);
                s.vars[p].name = tag(&def.param);
                let mut inner = outer.clone();
                inner.insert(
                    name,
                    ProcValue::Kleene { def: def.clone(), outer: outer.clone(), iterations: iterations - 1 },
                );
                let out = self.eval(&body, s, &mut inner);
                self.depth.set(d - 1);
                let mut out = out?;
                let q = out.position(&tag(&def.result))?;
                out.vars[q].name = result.clone();
                Ok(out)
            }
            ProcValue::Dense { map, .. } => {
                s.move_last(&[arg])?;
                let p = s.vars.len() - 1;
                let mut vars = s.vars[..p].to_vec();
                vars.push(out_slot);
                let mut out = CtxState::zero(vars);
                for (key, m) in &s.blocks {
                    let bx = key[p];
                    let n = map.domain.blocks[bx];
                    let rest = m.nrows() / n;
                    let mut parts: BTreeMap<usize, CMatrix> = BTreeMap::new();
                    for r in 0..rest {
                        for col in 0..rest {
                            let sub = m.view((r * n, col * n), (n, n)).into_owned();
                            let img = map.apply(&BlockState::single(&map.domain, bx, sub));
                            for (q, im) in img.blocks.iter().enumerate() {
                                let mq = im.nrows();
                                let acc = parts.entry(q).or_insert_with(|| CMatrix::zeros(rest * mq, rest * mq));
                                acc.view_mut((r * mq, col * mq), (mq, mq)).copy_from(im);
                            }
                        }
                    }
                    for (q, pm) in parts {
                        let mut k2 = key[..p].to_vec();
                        k2.push(q);
                        add_block(&mut out.blocks, k2, pm);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// `denote_term` with the builtin gate set.
pub fn denote_term(m: &Term, env: &ProcEnv, gamma: &VarContext, k: usize, fix_iters: usize) -> Result<Superoperator, DenoteError> {
    Ok(Denoter::new(GateRegistry::builtin(), k, fix_iters).denote_term(m, env, gamma)?.map)
}

pub fn denote_store(omega: &[ProcDef], k: usize, fix_iters: usize) -> ProcEnv {
    Denoter::new(GateRegistry::builtin(), k, fix_iters).denote_store(omega)
}

pub fn denote_config(c: &Configuration, k: usize, fix_iters: usize) -> Result<StateDenotation, DenoteError> {
    Denoter::new(GateRegistry::builtin(), k, fix_iters).denote_config(c)
}

pub fn copy_map(p: &Type, k: usize) -> Result<Superoperator, DenoteError> {
    Denoter { k, ..Denoter::default() }.copy_map(p)
}

pub fn fold_iso(mu: &Type, k: usize) -> Result<(Superoperator, Superoperator), DenoteError> {
    Denoter { k, ..Denoter::default() }.fold_iso(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Value;
    use crate::denotational::superop::validate;
    use crate::parser::{parse_program, parse_term};
    use crate::qmath::ghz_state;

    fn program(name: &str) -> Configuration {
        let path = format!("{}/programs/{name}", env!("CARGO_MANIFEST_DIR"));
        Configuration::from_program(&parse_program(&std::fs::read_to_string(path).unwrap()).unwrap())
    }

    #[test]
    fn measuring_plus_gives_a_fair_bit() {
        let c = Configuration::initial(parse_term("new qbit q; q *= H; b = measure q").unwrap(), vec![]);
        let d = Denoter::default().denote_config(&c).unwrap();
        assert_eq!(d.context, VarContext::from([("b".to_string(), Type::bit())]));
        for m in d.state.masses() {
            assert!((m - 0.5).abs() < 1e-12);
        }
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn coin_toss_kleene_mass() {
        for n in [1, 2, 5, 10] {
            let d = Denoter::new(GateRegistry::builtin(), 4, n).denote_config(&program("cointoss.qpl")).unwrap();
            let expect = 1.0 - 0.5f64.powi(n as i32 - 1);
            assert!((d.state.trace() - expect).abs() < 1e-12, "n = {n}");
            assert!((d.residual - (1.0 - expect)).abs() < 1e-12);
            assert_eq!(d.state.masses()[1], 0.0);
        }
    }

    #[test]
    fn ghz_store_denotes_gamma_3() {
        let d = Denoter::new(GateRegistry::builtin(), 5, 8).denote_config(&program("ghz.qpl")).unwrap();
        assert_eq!(d.context.keys().collect::<Vec<_>>(), vec!["l"]);
        let l = Value::list(&Type::Qbit, (1..=3).map(Value::Qubit).collect());
        let (b, _) = value_block(&l, 5).unwrap();
        assert!((d.state.trace() - 1.0).abs() < 1e-12);
        let got = &d.state.blocks[b];
        assert!(crate::qmath::max_abs_diff(got, ghz_state(3).unwrap().matrix()) < 1e-12);
        assert_eq!(d.truncation_loss, 0.0);
    }

    #[test]
    fn term_maps_are_valid_and_agree_with_configurations() {
        let d = Denoter::default();
        let m = parse_term("q *= H; b = measure q; case b of { left u -> new qbit q; b = left<I,I> u | right u -> new qbit q; q *= X; b = right<I,I> u }").unwrap();
        let gamma = VarContext::from([("q".to_string(), Type::Qbit)]);
        let t = d.denote_term(&m, &ProcEnv::default(), &gamma).unwrap();
        let v = validate(&t.map, 1e-9);
        assert!(v.cp && v.trace_nonincreasing, "{v:?}");
        let c = Configuration::new(
            m,
            Assignment::from([("q".to_string(), Value::Qubit(1))]),
            vec![],
            DensityMatrix::one().clone(),
        );
        let rho = crate::qmath::new_qubit(&c.rho, 4).unwrap();
        let c = Configuration { rho, ..c };
        let direct = d.denote_config(&c).unwrap().state;
        let input = d.assignment_state(&c.assignment, &c.rho).unwrap().to_block_state();
        assert!(t.map.apply(&input).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn copy_map_is_diagonal_and_rejects_qubits() {
        let cp = copy_map(&Type::bit(), 4).unwrap();
        let s = BlockState::single(&BlockSpace::bit(), 0, CMatrix::identity(1, 1) * c(0.25, 0.0))
            .add(&BlockState::single(&BlockSpace::bit(), 1, CMatrix::identity(1, 1) * c(0.75, 0.0)));
        assert_eq!(cp.apply(&s).masses(), vec![0.25, 0.0, 0.0, 0.75]);
        assert!(matches!(copy_map(&Type::Qbit, 4), Err(DenoteError::NotClassical(_))));
        assert!(copy_map(&Type::nat(), 3).is_ok());
    }

    #[test]
    fn fold_inverts_unfold() {
        for mu in [Type::nat(), Type::list_q()] {
            let (fold, unfold) = fold_iso(&mu, 3).unwrap();
            let id = Superoperator::identity(&fold.codomain);
            assert!(fold.compose(&unfold).max_abs_diff(&id) < 1e-15);
            let v = validate(&fold, 1e-9);
            assert!(v.cp && v.trace_nonincreasing);
        }
    }

    #[test]
    fn folding_past_the_depth_is_reported() {
        let c = Configuration::initial(parse_term("n = s(s(s(zero)))").unwrap(), vec![]);
        let d = Denoter::new(GateRegistry::builtin(), 2, 4).denote_config(&c).unwrap();
        assert_eq!(d.state.trace(), 0.0);
        assert!((d.truncation_loss - 1.0).abs() < 1e-12);
        assert!(matches!(d.warnings[..], [Warning::Truncated { .. }]));
    }
}
