//! The term judgement `Π ⊢ ⟨Γ⟩ M ⟨Σ⟩` as a forward context transformer,
//! the store judgement `Π ⊢ Ω`, and configuration well-formedness.
//!
//! Procedure definitions may appear as statements only at the top level of
//! a sequence.  A definition extends the procedure context for the rest of
//! the sequence, mirroring the store growing by one entry when the
//! definition is executed.  Definitions inside loop bodies, case branches
//! and procedure bodies are rejected.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{contexts_eq, type_of_value, ProcContext, ProcDef, Term, Type, Var, VarContext};
use crate::operational::Configuration;
use crate::qmath::GateRegistry;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Var),
    #[error("`{var}` has type {found}, expected {expected}")]
    TypeMismatch { var: Var, expected: String, found: Type },
    #[error("cannot copy `{var}`: type {ty} is not classical")]
    NotClassical { var: Var, ty: Type },
    #[error("gate `{gate}` has arity {arity} but is applied to {given} qubits")]
    ArityMismatch { gate: String, arity: usize, given: usize },
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("case branches end in different contexts: {{{left}}} vs {{{right}}}")]
    BranchMismatch { left: String, right: String },
    #[error("unknown procedure `{0}`")]
    UnknownProcedure(String),
    #[error("variable `{0}` is already bound")]
    DuplicateVariable(Var),
    #[error("procedure `{0}` is already defined")]
    DuplicateProcedure(String),
    #[error("type annotation {0} is not closed or not well formed")]
    IllFormedType(Type),
    #[error("procedure `{0}` is defined inside a loop, branch or procedure body")]
    NestedProcedure(String),
    #[error("loop body changes the context from {{{before}}} to {{{after}}}")]
    LoopContext { before: String, after: String },
    #[error("body of `{name}` ends in {{{found}}}, expected {{{expected}}}")]
    ProcOutput { name: String, expected: String, found: String },
    #[error("`0` annotated with input {{{annotated}}} used in context {{{actual}}}")]
    ZeroContext { annotated: String, actual: String },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum IllFormedConfig {
    #[error("ill-typed term: {0}")]
    Term(TypeError),
    #[error("ill-formed assignment: {0}")]
    Assignment(String),
    #[error("ill-formed store: {0}")]
    Store(TypeError),
    #[error("value pointers {pointers:?} do not match the {n_qubits} qubits of the density matrix")]
    QubitMismatch { pointers: Vec<usize>, n_qubits: usize },
}

/// `Π; Γ; Σ; Q ⊢ C`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigWitness {
    pub procs: ProcContext,
    pub input: VarContext,
    pub output: VarContext,
    pub qubits: BTreeSet<usize>,
}

pub fn show_context(ctx: &VarContext) -> String {
    ctx.iter().map(|(x, t)| format!("{x} : {t}")).collect::<Vec<_>>().join(", ")
}

/// A checker bound to a gate set.
#[derive(Clone, Copy)]
pub struct Checker<'g> {
    gates: &'g GateRegistry,
}

impl<'g> Checker<'g> {
    pub fn new(gates: &'g GateRegistry) -> Checker<'g> {
        Checker { gates }
    }

    /// Output context `Σ` of `m` from `Γ`.
    pub fn check_term(&self, pi: &ProcContext, gamma: &VarContext, m: &Term) -> Result<VarContext, TypeError> {
        self.check_threaded(pi, gamma, m).map(|(_, s)| s)
    }

    /// Output context together with the procedure context after `m`'s
    /// top-level definitions.
    pub fn check_threaded(
        &self,
        pi: &ProcContext,
        gamma: &VarContext,
        m: &Term,
    ) -> Result<(ProcContext, VarContext), TypeError> {
        let mut pi = pi.clone();
        let mut g = gamma.clone();
        self.check(&mut pi, &mut g, m, true)?;
        Ok((pi, g))
    }

    pub fn check_store(&self, omega: &[ProcDef]) -> Result<ProcContext, TypeError> {
        let mut pi = ProcContext::new();
        for d in omega {
            self.check_def(&mut pi, d)?;
        }
        Ok(pi)
    }

    pub fn check_config(&self, c: &Configuration) -> Result<ConfigWitness, IllFormedConfig> {
        let procs = self.check_store(&c.store).map_err(IllFormedConfig::Store)?;
        let mut input = VarContext::new();
        let mut qubits = BTreeSet::new();
        for (x, v) in &c.assignment {
            let (q, a) = type_of_value(v).map_err(|e| IllFormedConfig::Assignment(format!("{x}: {e}")))?;
            if !a.is_closed() {
                return Err(IllFormedConfig::Assignment(format!("{x} has open type {a}")));
            }
            for p in q {
                if !qubits.insert(p) {
                    return Err(IllFormedConfig::Assignment(format!("qubit {p} is shared by two values")));
                }
            }
            input.insert(x.clone(), a);
        }
        let n = c.rho.n_qubits();
        if qubits != (1..=n).collect() {
            return Err(IllFormedConfig::QubitMismatch { pointers: qubits.into_iter().collect(), n_qubits: n });
        }
        let output = self.check_term(&procs, &input, &c.term).map_err(IllFormedConfig::Term)?;
        Ok(ConfigWitness { procs, input, output, qubits })
    }

    fn check_def(&self, pi: &mut ProcContext, d: &ProcDef) -> Result<(), TypeError> {
        if pi.contains_key(&d.name) {
            return Err(TypeError::DuplicateProcedure(d.name.clone()));
        }
        closed(&d.param_ty)?;
        closed(&d.result_ty)?;
        let mut inner = pi.clone();
        inner.insert(d.name.clone(), d.sig());
        let mut g = VarContext::from([(d.param.clone(), d.param_ty.clone())]);
        self.check(&mut inner, &mut g, &d.body, false)?;
        let expected = VarContext::from([(d.result.clone(), d.result_ty.clone())]);
        if !contexts_eq(&g, &expected) {
            return Err(TypeError::ProcOutput {
                name: d.name.clone(),
                expected: show_context(&expected),
                found: show_context(&g),
            });
        }
        pi.insert(d.name.clone(), d.sig());
        Ok(())
    }

    fn check(&self, pi: &mut ProcContext, g: &mut VarContext, m: &Term, top: bool) -> Result<(), TypeError> {
        match m {
            Term::NewUnit { var } => bind(g, var, Type::Unit),
            Term::NewQbit { var } => bind(g, var, Type::Qbit),
            Term::Discard { var } => take(g, var).map(|_| ()),
            Term::Copy { dst, src } => {
                let t = lookup(g, src)?;
                if !t.is_classical() {
                    return Err(TypeError::NotClassical { var: src.clone(), ty: t });
                }
                bind(g, dst, t)
            }
            Term::Measure { bit, qubit } => {
                expect(qubit, &take(g, qubit)?, &Type::Qbit)?;
                bind(g, bit, Type::bit())
            }
            Term::Unitary { gate, qubits } => {
                let arity = self.gates.arity(gate).map_err(|_| TypeError::UnknownGate(gate.clone()))?;
                let mut seen = BTreeSet::new();
                for q in qubits {
                    if !seen.insert(q) {
                        return Err(TypeError::DuplicateVariable(q.clone()));
                    }
                    expect(q, &lookup(g, q)?, &Type::Qbit)?;
                }
                if arity != qubits.len() {
                    return Err(TypeError::ArityMismatch { gate: gate.clone(), arity, given: qubits.len() });
                }
                Ok(())
            }
            Term::Seq(a, b) => {
                self.check(pi, g, a, top)?;
                self.check(pi, g, b, top)
            }
            Term::Skip => Ok(()),
            Term::While { cond, body, .. } => {
                expect(cond, &lookup(g, cond)?, &Type::bit())?;
                let before = g.clone();
                let mut inner_pi = pi.clone();
                self.check(&mut inner_pi, g, body, false)?;
                if !contexts_eq(&before, g) {
                    return Err(TypeError::LoopContext { before: show_context(&before), after: show_context(g) });
                }
                Ok(())
            }
            Term::Left { dst, src, left, right } | Term::Right { dst, src, left, right } => {
                closed(left)?;
                closed(right)?;
                let side = if matches!(m, Term::Left { .. }) { left } else { right };
                expect(src, &take(g, src)?, side)?;
                bind(g, dst, Type::sum(left.clone(), right.clone()))
            }
            Term::Case { scrutinee, left_var, left_body, right_var, right_body } => {
                let (a, b) = match take(g, scrutinee)? {
                    Type::Sum(a, b) => (*a, *b),
                    other => return Err(mismatch(scrutinee, "a sum type", other)),
                };
                let mut gl = g.clone();
                bind(&mut gl, left_var, a)?;
                self.check(&mut pi.clone(), &mut gl, left_body, false)?;
                let mut gr = g.clone();
                bind(&mut gr, right_var, b)?;
                self.check(&mut pi.clone(), &mut gr, right_body, false)?;
                if !contexts_eq(&gl, &gr) {
                    return Err(TypeError::BranchMismatch { left: show_context(&gl), right: show_context(&gr) });
                }
                *g = gl;
                Ok(())
            }
            Term::Pair { dst, left, right } => {
                if left == right {
                    return Err(TypeError::DuplicateVariable(left.clone()));
                }
                let a = take(g, left)?;
                let b = take(g, right)?;
                bind(g, dst, Type::tensor(a, b))
            }
            Term::Unpair { left, right, src } => {
                if left == right {
                    return Err(TypeError::DuplicateVariable(left.clone()));
                }
                match take(g, src)? {
                    Type::Tensor(a, b) => {
                        bind(g, left, *a)?;
                        bind(g, right, *b)
                    }
                    other => Err(mismatch(src, "a tensor type", other)),
                }
            }
            Term::Fold { dst, src, ty } => {
                closed(ty)?;
                let unfolded = ty.unfold_mu().ok_or_else(|| TypeError::IllFormedType(ty.clone()))?;
                expect(src, &take(g, src)?, &unfolded)?;
                bind(g, dst, ty.clone())
            }
            Term::Unfold { dst, src } => {
                let t = take(g, src)?;
                let unfolded = t.unfold_mu().ok_or_else(|| mismatch(src, "a recursive type", t.clone()))?;
                bind(g, dst, unfolded)
            }
            Term::ProcDef(d) => {
                if !top {
                    return Err(TypeError::NestedProcedure(d.name.clone()));
                }
                self.check_def(pi, d)
            }
            Term::Call { name, bound, arg, result } => {
                let sig = match pi.get(name) {
                    Some(s) if s.bound == *bound => s.clone(),
                    _ => {
                        let shown = match bound {
                            Some(n) => format!("{name}^{n}"),
                            None => name.clone(),
                        };
                        return Err(TypeError::UnknownProcedure(shown));
                    }
                };
                expect(arg, &take(g, arg)?, &sig.input)?;
                bind(g, result, sig.output)
            }
            Term::Zero { input, output } => {
                if !contexts_eq(input, g) {
                    return Err(TypeError::ZeroContext { annotated: show_context(input), actual: show_context(g) });
                }
                for t in input.values().chain(output.values()) {
                    closed(t)?;
                }
                *g = output.clone();
                Ok(())
            }
        }
    }
}

fn closed(t: &Type) -> Result<(), TypeError> {
    if t.is_closed() {
        Ok(())
    } else {
        Err(TypeError::IllFormedType(t.clone()))
    }
}

fn lookup(g: &VarContext, x: &Var) -> Result<Type, TypeError> {
    g.get(x).cloned().ok_or_else(|| TypeError::UnboundVariable(x.clone()))
}

fn take(g: &mut VarContext, x: &Var) -> Result<Type, TypeError> {
    g.remove(x).ok_or_else(|| TypeError::UnboundVariable(x.clone()))
}

fn bind(g: &mut VarContext, x: &Var, t: Type) -> Result<(), TypeError> {
    if g.contains_key(x) {
        return Err(TypeError::DuplicateVariable(x.clone()));
    }
    g.insert(x.clone(), t);
    Ok(())
}

fn mismatch(x: &Var, expected: &str, found: Type) -> TypeError {
    TypeError::TypeMismatch { var: x.clone(), expected: expected.to_string(), found }
}

fn expect(x: &Var, found: &Type, expected: &Type) -> Result<(), TypeError> {
    if found.alpha_eq(expected) {
        Ok(())
    } else {
        Err(TypeError::TypeMismatch { var: x.clone(), expected: expected.to_string(), found: found.clone() })
    }
}

/// `check_term` with the builtin gate set.
pub fn check_term(pi: &ProcContext, gamma: &VarContext, m: &Term) -> Result<VarContext, TypeError> {
    Checker::new(&GateRegistry::builtin()).check_term(pi, gamma, m)
}

/// `check_store` with the builtin gate set.
pub fn check_store(omega: &[ProcDef]) -> Result<ProcContext, TypeError> {
    Checker::new(&GateRegistry::builtin()).check_store(omega)
}

/// `check_config` with the builtin gate set.
pub fn check_config(c: &Configuration) -> Result<ConfigWitness, IllFormedConfig> {
    Checker::new(&GateRegistry::builtin()).check_config(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{ProcSig, Value};
    use crate::operational::Assignment;
    use crate::parser::{parse_program, parse_term};
    use crate::qmath::DensityMatrix;

    fn ctx(pairs: &[(&str, Type)]) -> VarContext {
        pairs.iter().map(|(x, t)| (x.to_string(), t.clone())).collect()
    }

    #[test]
    fn measure_produces_a_bit() {
        let m = parse_term("b = measure q").unwrap();
        let out = check_term(&ProcContext::new(), &ctx(&[("q", Type::Qbit)]), &m).unwrap();
        assert_eq!(out, ctx(&[("b", Type::bit())]));
    }

    #[test]
    fn copying_a_qubit_is_rejected() {
        let m = parse_term("y = copy x").unwrap();
        let err = check_term(&ProcContext::new(), &ctx(&[("x", Type::Qbit)]), &m).unwrap_err();
        assert!(matches!(err, TypeError::NotClassical { .. }));
    }

    #[test]
    fn discard_any_type() {
        let m = parse_term("discard x").unwrap();
        let out = check_term(&ProcContext::new(), &ctx(&[("x", Type::nat())]), &m).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn rule_side_conditions() {
        let pi = ProcContext::new();
        let q = ctx(&[("q", Type::Qbit), ("r", Type::Qbit)]);
        let err = |src: &str, g: &VarContext| check_term(&pi, g, &parse_term(src).unwrap()).unwrap_err();
        assert!(matches!(err("q *= CNOT", &q), TypeError::ArityMismatch { .. }));
        assert!(matches!(err("q, q *= CNOT", &q), TypeError::DuplicateVariable(_)));
        assert!(matches!(err("q *= FOO", &q), TypeError::UnknownGate(_)));
        assert!(matches!(err("discard z", &q), TypeError::UnboundVariable(_)));
        assert!(matches!(err("new qbit q", &q), TypeError::DuplicateVariable(_)));
        assert!(matches!(err("b = measure q; unfold_me = unfold b", &q), TypeError::TypeMismatch { .. }));
        let b = ctx(&[("b", Type::bit()), ("q", Type::Qbit)]);
        assert!(matches!(
            err("case b of left u -> discard u | right u -> discard u; discard q", &b),
            TypeError::BranchMismatch { .. }
        ));
        assert!(matches!(err("while b do { discard q }", &b), TypeError::LoopContext { .. }));
        assert!(matches!(err("y = g(q)", &q), TypeError::UnknownProcedure(_)));
    }

    #[test]
    fn ghz_store_signatures() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/programs/ghz.qpl")).unwrap();
        let p = parse_program(&src).unwrap();
        let pi = check_store(&p.store).unwrap();
        let sig = |a, b| ProcSig { bound: None, input: a, output: b };
        assert_eq!(pi["GHZnext"], sig(Type::list_q(), Type::list_q()));
        assert_eq!(pi["GHZ"], sig(Type::nat(), Type::list_q()));
        assert_eq!(pi.len(), 2);
    }

    #[test]
    fn store_edge_cases() {
        assert!(check_store(&[]).unwrap().is_empty());
        let p = parse_program("proc f :: x : bit -> y : bit { y = g(x) }; skip").unwrap();
        assert_eq!(check_store(&p.store), Err(TypeError::UnknownProcedure("g".into())));
        let p = parse_program("proc f :: x : bit -> y : bit { y = copy x; discard x }; skip").unwrap();
        let mut twice = p.store.clone();
        twice.extend(p.store);
        assert_eq!(check_store(&twice), Err(TypeError::DuplicateProcedure("f".into())));
    }

    #[test]
    fn nested_definitions_are_rejected() {
        let m = parse_term("while b do { proc f :: x : bit -> y : bit { y = copy x; discard x } }").unwrap();
        let err = check_term(&ProcContext::new(), &ctx(&[("b", Type::bit())]), &m).unwrap_err();
        assert_eq!(err, TypeError::NestedProcedure("f".into()));
    }

    #[test]
    fn definitions_extend_the_context_for_the_continuation() {
        let m = parse_term("proc f :: x : bit -> y : bit { y = copy x; discard x }; c = f(b)").unwrap();
        let out = check_term(&ProcContext::new(), &ctx(&[("b", Type::bit())]), &m).unwrap();
        assert_eq!(out, ctx(&[("c", Type::bit())]));
    }

    #[test]
    fn configurations() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/programs/cointoss.qpl")).unwrap();
        let p = parse_program(&src).unwrap();
        let body = match p.main {
            Term::Seq(_, w) => *w,
            other => other,
        };
        let c = Configuration::new(body, Assignment::from([("b".into(), Value::tt())]), vec![], DensityMatrix::one());
        let w = check_config(&c).unwrap();
        assert_eq!(w.input, ctx(&[("b", Type::bit())]));
        assert!(w.qubits.is_empty());

        let dangling = Configuration::new(
            Term::Skip,
            Assignment::from([("q".into(), Value::Qubit(1))]),
            vec![],
            DensityMatrix::one(),
        );
        assert!(matches!(check_config(&dangling), Err(IllFormedConfig::QubitMismatch { .. })));

        let empty = Configuration::initial(Term::Skip, vec![]);
        let w = check_config(&empty).unwrap();
        assert!(w.procs.is_empty() && w.input.is_empty() && w.output.is_empty() && w.qubits.is_empty());
    }
}
