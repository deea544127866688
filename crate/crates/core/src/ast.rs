//! Abstract syntax for types, terms and values, together with the purely
//! syntactic judgements on them (type formation, classicality, substitution
//! and value typing).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// Variable name.
pub type Var = String;

/// Type expressions `X | I | qbit | A + B | A ⊗ B | μX. A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Var(String),
    Unit,
    Qbit,
    Sum(Box<Type>, Box<Type>),
    Tensor(Box<Type>, Box<Type>),
    Mu(String, Box<Type>),
}

impl Type {
    pub fn sum(a: Type, b: Type) -> Type {
        Type::Sum(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: Type, b: Type) -> Type {
        Type::Tensor(Box::new(a), Box::new(b))
    }

    pub fn mu(x: &str, body: Type) -> Type {
        Type::Mu(x.to_string(), Box::new(body))
    }

    pub fn var(x: &str) -> Type {
        Type::Var(x.to_string())
    }

    /// `bit = I + I`.
    pub fn bit() -> Type {
        Type::sum(Type::Unit, Type::Unit)
    }

    /// `Nat = μX. I + X`.
    pub fn nat() -> Type {
        Type::mu("X", Type::sum(Type::Unit, Type::var("X")))
    }

    /// `List(A) = μY. I + A ⊗ Y`, with the binder renamed if `Y` is free in `a`.
    pub fn list(a: Type) -> Type {
        let fv = a.free_vars();
        let y = fresh_type_var("Y", &fv);
        Type::mu(&y, Type::sum(Type::Unit, Type::tensor(a, Type::var(&y))))
    }

    /// `ListQ = List(qbit)`.
    pub fn list_q() -> Type {
        Type::list(Type::Qbit)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Type::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Type::Unit | Type::Qbit => {}
            Type::Sum(a, b) | Type::Tensor(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Type::Mu(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// True iff the type contains no `qbit`.
    pub fn is_classical(&self) -> bool {
        match self {
            Type::Var(_) | Type::Unit => true,
            Type::Qbit => false,
            Type::Sum(a, b) | Type::Tensor(a, b) => a.is_classical() && b.is_classical(),
            Type::Mu(_, a) => a.is_classical(),
        }
    }

    /// `self[b / x]`, renaming binders that would capture free variables of `b`.
    pub fn substitute(&self, x: &str, b: &Type) -> Type {
        match self {
            Type::Var(y) if y == x => b.clone(),
            Type::Var(_) | Type::Unit | Type::Qbit => self.clone(),
            Type::Sum(l, r) => Type::sum(l.substitute(x, b), r.substitute(x, b)),
            Type::Tensor(l, r) => Type::tensor(l.substitute(x, b), r.substitute(x, b)),
            Type::Mu(y, body) => {
                if y == x {
                    return self.clone();
                }
                let fv_b = b.free_vars();
                if fv_b.contains(y) {
                    let mut avoid = fv_b;
                    avoid.extend(body.free_vars());
                    avoid.insert(x.to_string());
                    let y2 = fresh_type_var(y, &avoid);
                    let renamed = body.substitute(y, &Type::Var(y2.clone()));
                    Type::Mu(y2, Box::new(renamed.substitute(x, b)))
                } else {
                    Type::Mu(y.clone(), Box::new(body.substitute(x, b)))
                }
            }
        }
    }

    /// One-step unrolling `A[μX.A / X]` of a `μX. A`; `None` for other types.
    pub fn unfold_mu(&self) -> Option<Type> {
        match self {
            Type::Mu(x, body) => Some(body.substitute(x, self)),
            _ => None,
        }
    }

    /// Equality up to renaming of bound type variables.
    pub fn alpha_eq(&self, other: &Type) -> bool {
        fn go<'a>(a: &'a Type, b: &'a Type, env: &mut Vec<(&'a str, &'a str)>) -> bool {
            match (a, b) {
                (Type::Var(x), Type::Var(y)) => {
                    for (l, r) in env.iter().rev() {
                        if *l == x || *r == y {
                            return *l == x && *r == y;
                        }
                    }
                    x == y
                }
                (Type::Unit, Type::Unit) | (Type::Qbit, Type::Qbit) => true,
                (Type::Sum(a1, a2), Type::Sum(b1, b2))
                | (Type::Tensor(a1, a2), Type::Tensor(b1, b2)) => {
                    go(a1, b1, env) && go(a2, b2, env)
                }
                (Type::Mu(x, a), Type::Mu(y, b)) => {
                    env.push((x, y));
                    let ok = go(a, b, env);
                    env.pop();
                    ok
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

fn fresh_type_var(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|c| !avoid.contains(c))
        .expect("unbounded search")
}

/// `Θ ⊢ A`: every type variable of `a` is bound by a `μ` or listed in `theta`.
pub fn well_formed_type(theta: &[&str], a: &Type) -> bool {
    a.free_vars().iter().all(|x| theta.contains(&x.as_str()))
}

pub fn is_classical(a: &Type) -> bool {
    a.is_classical()
}

pub fn substitute_type(a: &Type, x: &str, b: &Type) -> Type {
    a.substitute(x, b)
}

/// Variable context in canonical (name-sorted) order.
pub type VarContext = BTreeMap<Var, Type>;

/// Alpha-equivalence of contexts.
pub fn contexts_eq(a: &VarContext, b: &VarContext) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|((x, s), (y, t))| x == y && s.alpha_eq(t))
}

/// Signature `f : A → B` of a procedure, with its optional bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcSig {
    pub bound: Option<u32>,
    pub input: Type,
    pub output: Type,
}

/// Procedure context, keyed by base name.  An indexed `f^n` occupies the
/// slot of `f`, so it excludes the unindexed name and every other index.
pub type ProcContext = BTreeMap<String, ProcSig>;

/// A procedure definition `proc f^n :: x : A -> y : B { M }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcDef {
    pub name: String,
    pub bound: Option<u32>,
    pub param: Var,
    pub param_ty: Type,
    pub result: Var,
    pub result_ty: Type,
    pub body: Term,
}

impl ProcDef {
    pub fn sig(&self) -> ProcSig {
        ProcSig {
            bound: self.bound,
            input: self.param_ty.clone(),
            output: self.result_ty.clone(),
        }
    }
}

/// Core terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    NewUnit { var: Var },
    Discard { var: Var },
    Copy { dst: Var, src: Var },
    NewQbit { var: Var },
    /// `bit = measure qubit`
    Measure { bit: Var, qubit: Var },
    Unitary { gate: String, qubits: Vec<Var> },
    Seq(Box<Term>, Box<Term>),
    Skip,
    While { bound: Option<u32>, cond: Var, body: Box<Term> },
    Left { dst: Var, src: Var, left: Type, right: Type },
    Right { dst: Var, src: Var, left: Type, right: Type },
    Case {
        scrutinee: Var,
        left_var: Var,
        left_body: Box<Term>,
        right_var: Var,
        right_body: Box<Term>,
    },
    Pair { dst: Var, left: Var, right: Var },
    Unpair { left: Var, right: Var, src: Var },
    /// `dst = fold src`, annotated with the recursive type `ty = μX. A`.
    Fold { dst: Var, src: Var, ty: Type },
    Unfold { dst: Var, src: Var },
    ProcDef(Box<ProcDef>),
    Call { name: String, bound: Option<u32>, arg: Var, result: Var },
    /// The empty computation `0_{Γ,Σ}`.
    Zero { input: VarContext, output: VarContext },
}

impl Term {
    pub fn seq(a: Term, b: Term) -> Term {
        Term::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence; `skip` when empty.
    pub fn seq_all(terms: Vec<Term>) -> Term {
        let mut it = terms.into_iter().rev();
        match it.next() {
            None => Term::Skip,
            Some(last) => it.fold(last, |acc, t| Term::seq(t, acc)),
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Term::Skip | Term::Zero { .. })
    }

    /// No bounds and no `0` anywhere.
    pub fn is_ordinary(&self) -> bool {
        self.all_nodes(&|t| match t {
            Term::While { bound, .. } | Term::Call { bound, .. } => bound.is_none(),
            Term::ProcDef(d) => d.bound.is_none(),
            Term::Zero { .. } => false,
            _ => true,
        })
    }

    /// Every loop, definition and call carries a bound.
    pub fn is_finitary(&self) -> bool {
        self.all_nodes(&|t| match t {
            Term::While { bound, .. } | Term::Call { bound, .. } => bound.is_some(),
            Term::ProcDef(d) => d.bound.is_some(),
            _ => true,
        })
    }

    fn all_nodes(&self, p: &dyn Fn(&Term) -> bool) -> bool {
        if !p(self) {
            return false;
        }
        match self {
            Term::Seq(a, b) => a.all_nodes(p) && b.all_nodes(p),
            Term::While { body, .. } => body.all_nodes(p),
            Term::Case { left_body, right_body, .. } => {
                left_body.all_nodes(p) && right_body.all_nodes(p)
            }
            Term::ProcDef(d) => d.body.all_nodes(p),
            _ => true,
        }
    }

    /// Every variable name occurring in the term, bound or free.
    pub fn var_names(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        let mut add = |v: &Var| {
            out.insert(v.clone());
        };
        match self {
            Term::NewUnit { var } | Term::Discard { var } | Term::NewQbit { var } => add(var),
            Term::Copy { dst, src }
            | Term::Left { dst, src, .. }
            | Term::Right { dst, src, .. }
            | Term::Fold { dst, src, .. }
            | Term::Unfold { dst, src } => {
                add(dst);
                add(src);
            }
            Term::Measure { bit, qubit } => {
                add(bit);
                add(qubit);
            }
            Term::Unitary { qubits, .. } => qubits.iter().for_each(add),
            Term::Seq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Term::Skip => {}
            Term::While { cond, body, .. } => {
                add(cond);
                body.collect_vars(out);
            }
            Term::Case { scrutinee, left_var, left_body, right_var, right_body } => {
                add(scrutinee);
                add(left_var);
                add(right_var);
                left_body.collect_vars(out);
                right_body.collect_vars(out);
            }
            Term::Pair { dst, left, right } | Term::Unpair { src: dst, left, right } => {
                add(dst);
                add(left);
                add(right);
            }
            Term::ProcDef(d) => {
                add(&d.param);
                add(&d.result);
                d.body.collect_vars(out);
            }
            Term::Call { arg, result, .. } => {
                add(arg);
                add(result);
            }
            Term::Zero { input, output } => {
                input.keys().chain(output.keys()).for_each(add);
            }
        }
    }

    /// Replaces every reference to procedure `name` carrying bound `from`
    /// (definitions and calls alike) by bound `to`.
    pub fn rebound_proc(&self, name: &str, from: Option<u32>, to: Option<u32>) -> Term {
        let mut t = self.clone();
        t.rebound_proc_mut(name, from, to);
        t
    }

    pub fn rebound_proc_mut(&mut self, name: &str, from: Option<u32>, to: Option<u32>) {
        match self {
            Term::Call { name: n, bound, .. } if n == name && *bound == from => *bound = to,
            Term::Seq(a, b) => {
                a.rebound_proc_mut(name, from, to);
                b.rebound_proc_mut(name, from, to);
            }
            Term::While { body, .. } => body.rebound_proc_mut(name, from, to),
            Term::Case { left_body, right_body, .. } => {
                left_body.rebound_proc_mut(name, from, to);
                right_body.rebound_proc_mut(name, from, to);
            }
            Term::ProcDef(d) => {
                if d.name == name && d.bound == from {
                    d.bound = to;
                }
                d.body.rebound_proc_mut(name, from, to);
            }
            _ => {}
        }
    }
}

/// Values `* | n | left v | right v | (v, w) | fold v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Star,
    /// Pointer to qubit `n` (1-based) of the density matrix.
    Qubit(usize),
    Left { left: Type, right: Type, v: Box<Value> },
    Right { left: Type, right: Type, v: Box<Value> },
    Pair(Box<Value>, Box<Value>),
    Fold { ty: Type, v: Box<Value> },
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("ill-typed value: {0}")]
pub struct IllTypedValue(pub String);

impl Value {
    pub fn ff() -> Value {
        Value::Left { left: Type::Unit, right: Type::Unit, v: Box::new(Value::Star) }
    }

    pub fn tt() -> Value {
        Value::Right { left: Type::Unit, right: Type::Unit, v: Box::new(Value::Star) }
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// The numeral `s^n(zero)`.
    pub fn nat(n: usize) -> Value {
        let nat = Type::nat();
        let mut v = Value::Fold {
            ty: nat.clone(),
            v: Box::new(Value::Left { left: Type::Unit, right: nat.clone(), v: Box::new(Value::Star) }),
        };
        for _ in 0..n {
            v = Value::Fold {
                ty: nat.clone(),
                v: Box::new(Value::Right { left: Type::Unit, right: nat.clone(), v: Box::new(v) }),
            };
        }
        v
    }

    /// A list value of element type `elem`, head first.
    pub fn list(elem: &Type, items: Vec<Value>) -> Value {
        let lt = Type::list(elem.clone());
        let cell = Type::tensor(elem.clone(), lt.clone());
        let mut v = Value::Fold {
            ty: lt.clone(),
            v: Box::new(Value::Left { left: Type::Unit, right: cell.clone(), v: Box::new(Value::Star) }),
        };
        for item in items.into_iter().rev() {
            v = Value::Fold {
                ty: lt.clone(),
                v: Box::new(Value::Right {
                    left: Type::Unit,
                    right: cell.clone(),
                    v: Box::new(Value::pair(item, v)),
                }),
            };
        }
        v
    }

    /// Qubit pointers in left-to-right order of occurrence.
    pub fn qubits(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_qubits(&mut out);
        out
    }

    fn collect_qubits(&self, out: &mut Vec<usize>) {
        match self {
            Value::Star => {}
            Value::Qubit(n) => out.push(*n),
            Value::Left { v, .. } | Value::Right { v, .. } | Value::Fold { v, .. } => {
                v.collect_qubits(out)
            }
            Value::Pair(a, b) => {
                a.collect_qubits(out);
                b.collect_qubits(out);
            }
        }
    }

    /// Applies `f` to every qubit pointer.
    pub fn map_qubits(&self, f: &dyn Fn(usize) -> usize) -> Value {
        match self {
            Value::Star => Value::Star,
            Value::Qubit(n) => Value::Qubit(f(*n)),
            Value::Left { left, right, v } => Value::Left {
                left: left.clone(),
                right: right.clone(),
                v: Box::new(v.map_qubits(f)),
            },
            Value::Right { left, right, v } => Value::Right {
                left: left.clone(),
                right: right.clone(),
                v: Box::new(v.map_qubits(f)),
            },
            Value::Pair(a, b) => Value::pair(a.map_qubits(f), b.map_qubits(f)),
            Value::Fold { ty, v } => Value::Fold { ty: ty.clone(), v: Box::new(v.map_qubits(f)) },
        }
    }

    /// Number of `fold` constructors on the longest path.
    pub fn fold_depth(&self) -> usize {
        match self {
            Value::Star | Value::Qubit(_) => 0,
            Value::Left { v, .. } | Value::Right { v, .. } => v.fold_depth(),
            Value::Fold { v, .. } => 1 + v.fold_depth(),
            Value::Pair(a, b) => a.fold_depth().max(b.fold_depth()),
        }
    }
}

/// `Q ⊢ v : A`: the qubit pointer context and type of a value.
pub fn type_of_value(v: &Value) -> Result<(BTreeSet<usize>, Type), IllTypedValue> {
    match v {
        Value::Star => Ok((BTreeSet::new(), Type::Unit)),
        Value::Qubit(n) => {
            if *n == 0 {
                return Err(IllTypedValue("qubit pointers are 1-based".into()));
            }
            Ok((BTreeSet::from([*n]), Type::Qbit))
        }
        Value::Left { left, right, v: inner } | Value::Right { left, right, v: inner } => {
            if !left.is_closed() || !right.is_closed() {
                return Err(IllTypedValue(format!("open annotation on {v}")));
            }
            let (q, a) = type_of_value(inner)?;
            let side = if matches!(v, Value::Left { .. }) { left } else { right };
            if !a.alpha_eq(side) {
                return Err(IllTypedValue(format!("{v}: component has type {a}, expected {side}")));
            }
            Ok((q, Type::sum(left.clone(), right.clone())))
        }
        Value::Pair(a, b) => {
            let (qa, ta) = type_of_value(a)?;
            let (qb, tb) = type_of_value(b)?;
            if !qa.is_disjoint(&qb) {
                return Err(IllTypedValue(format!("pair ({a}, {b}) shares qubit pointers")));
            }
            Ok((qa.union(&qb).copied().collect(), Type::tensor(ta, tb)))
        }
        Value::Fold { ty, v } => {
            let unfolded = ty
                .unfold_mu()
                .ok_or_else(|| IllTypedValue(format!("fold annotation {ty} is not recursive")))?;
            if !ty.is_closed() {
                return Err(IllTypedValue(format!("open annotation {ty}")));
            }
            let (q, a) = type_of_value(v)?;
            if !a.alpha_eq(&unfolded) {
                return Err(IllTypedValue(format!("fold of {v} : {a} at {ty}")));
            }
            Ok((q, ty.clone()))
        }
    }
}
