//! Sugar removal.  Context tracking here is best effort: core statements
//! pass through untouched whatever their types, and only sugar that needs a
//! type (list and numeral literals, pattern cases, nested calls) consults the
//! tracked context.

use std::collections::{BTreeMap, BTreeSet};

use super::{Alt, DesugarError, Expr, Pattern, Span, SurfaceKind, SurfaceTerm};
use crate::ast::{ProcContext, ProcDef, ProcSig, Term, Type, Var, VarContext};

/// Desugars a term starting from the empty context.
pub fn desugar(t: &SurfaceTerm) -> Result<Term, DesugarError> {
    desugar_in(&ProcContext::new(), &VarContext::new(), t)
}

/// Desugars a term whose free variables and procedures are typed by `gamma` and `pi`.
pub fn desugar_in(pi: &ProcContext, gamma: &VarContext, t: &SurfaceTerm) -> Result<Term, DesugarError> {
    let mut used = BTreeSet::new();
    collect_names(t, &mut used);
    used.extend(gamma.keys().cloned());
    let mut d = Desugarer { used, counter: 0 };
    let mut ctx = Ctx { procs: pi.clone(), vars: gamma.clone(), expect: BTreeMap::new() };
    d.term(t, &mut ctx)
}

#[derive(Clone)]
struct Ctx {
    procs: ProcContext,
    vars: VarContext,
    /// Declared types of procedure outputs, used to type `nil` and friends.
    expect: BTreeMap<Var, Type>,
}

impl Ctx {
    fn take(&mut self, x: &Var) -> Option<Type> {
        self.vars.remove(x)
    }

    fn put(&mut self, x: &Var, t: Option<Type>) {
        match t {
            Some(t) => {
                self.vars.insert(x.clone(), t);
            }
            None => {
                self.vars.remove(x);
            }
        }
    }

    /// Tracks the effect of a simple core statement.
    fn apply(&mut self, t: &Term) {
        match t {
            Term::NewUnit { var } => self.put(var, Some(Type::Unit)),
            Term::NewQbit { var } => self.put(var, Some(Type::Qbit)),
            Term::Discard { var } => {
                self.take(var);
            }
            Term::Copy { dst, src } => {
                let ty = self.vars.get(src).cloned();
                self.put(dst, ty);
            }
            Term::Measure { bit, qubit } => {
                self.take(qubit);
                self.put(bit, Some(Type::bit()));
            }
            Term::Left { dst, src, left, right } | Term::Right { dst, src, left, right } => {
                self.take(src);
                self.put(dst, Some(Type::sum(left.clone(), right.clone())));
            }
            Term::Pair { dst, left, right } => {
                let a = self.take(left);
                let b = self.take(right);
                self.put(dst, a.zip(b).map(|(a, b)| Type::tensor(a, b)));
            }
            Term::Unpair { left, right, src } => match self.take(src) {
                Some(Type::Tensor(a, b)) => {
                    self.put(left, Some(*a));
                    self.put(right, Some(*b));
                }
                _ => {
                    self.put(left, None);
                    self.put(right, None);
                }
            },
            Term::Fold { dst, src, ty } => {
                self.take(src);
                self.put(dst, Some(ty.clone()));
            }
            Term::Unfold { dst, src } => {
                let ty = self.take(src).and_then(|t| t.unfold_mu());
                self.put(dst, ty);
            }
            Term::Call { name, arg, result, .. } => {
                self.take(arg);
                let out = self.procs.get(name).map(|s| s.output.clone());
                self.put(result, out);
            }
            Term::Zero { output, .. } => self.vars = output.clone(),
            _ => {}
        }
    }
}

/// Element type of a `μY. I + A ⊗ Y`.
fn list_elem(t: &Type) -> Option<Type> {
    if let Type::Mu(y, body) = t {
        if let Type::Sum(l, r) = body.as_ref() {
            if let (Type::Unit, Type::Tensor(a, v)) = (l.as_ref(), r.as_ref()) {
                if **v == Type::Var(y.clone()) && !a.free_vars().contains(y) {
                    return Some((**a).clone());
                }
            }
        }
    }
    None
}

fn is_nat(t: &Type) -> bool {
    t.alpha_eq(&Type::nat())
}

fn collect_names(t: &SurfaceTerm, out: &mut BTreeSet<Var>) {
    fn expr_names(e: &Expr, out: &mut BTreeSet<Var>) {
        match e {
            Expr::Var(x) | Expr::Copy(x) | Expr::Measure(x) => {
                out.insert(x.clone());
            }
            Expr::Left { arg, .. }
            | Expr::Right { arg, .. }
            | Expr::Fold { arg, .. }
            | Expr::Unfold(arg)
            | Expr::Call { arg, .. }
            | Expr::Succ(arg) => expr_names(arg, out),
            Expr::Pair(a, b) | Expr::Cons(a, b) => {
                expr_names(a, out);
                expr_names(b, out);
            }
            Expr::Tt | Expr::Ff | Expr::Zero | Expr::Nil(_) => {}
        }
    }
    let mut add = |x: &Var| {
        out.insert(x.clone());
    };
    match &t.kind {
        SurfaceKind::Skip => {}
        SurfaceKind::NewUnit(x) | SurfaceKind::NewQbit(x) | SurfaceKind::Discard(x) => add(x),
        SurfaceKind::Unitary { qubits, .. } => qubits.iter().for_each(add),
        SurfaceKind::Assign { dst, expr } => {
            add(dst);
            expr_names(expr, out);
        }
        SurfaceKind::Unpair { left, right, src } => {
            add(left);
            add(right);
            add(src);
        }
        SurfaceKind::Seq(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
        SurfaceKind::While { cond, body, .. } => {
            add(cond);
            collect_names(body, out);
        }
        SurfaceKind::If { cond, then, otherwise } => {
            add(cond);
            collect_names(then, out);
            if let Some(o) = otherwise {
                collect_names(o, out);
            }
        }
        SurfaceKind::Case { scrutinee, first, second } => {
            add(scrutinee);
            for alt in [first, second] {
                match &alt.pattern {
                    Pattern::Left(x) | Pattern::Right(x) | Pattern::Succ(x) => {
                        out.insert(x.clone());
                    }
                    Pattern::Cons(h, r) => {
                        out.insert(h.clone());
                        out.insert(r.clone());
                    }
                    _ => {}
                }
                collect_names(&alt.body, out);
            }
        }
        SurfaceKind::ProcDef { param, result, body, .. } => {
            add(param);
            add(result);
            collect_names(body, out);
        }
        SurfaceKind::Zero { input, output } => input.keys().chain(output.keys()).for_each(add),
    }
}

struct Desugarer {
    used: BTreeSet<Var>,
    counter: usize,
}

enum CaseShape {
    Plain(Var, Var),
    Bool,
    Nat(Var),
    List(Var, Var),
}

impl Desugarer {
    fn fresh(&mut self, base: &str) -> Var {
        loop {
            let name = format!("{base}#{}", self.counter);
            self.counter += 1;
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn term(&mut self, t: &SurfaceTerm, ctx: &mut Ctx) -> Result<Term, DesugarError> {
        let span = t.span;
        let simple = |term: Term, ctx: &mut Ctx| {
            ctx.apply(&term);
            Ok(term)
        };
        match &t.kind {
            SurfaceKind::Skip => Ok(Term::Skip),
            SurfaceKind::NewUnit(x) => simple(Term::NewUnit { var: x.clone() }, ctx),
            SurfaceKind::NewQbit(x) => simple(Term::NewQbit { var: x.clone() }, ctx),
            SurfaceKind::Discard(x) => simple(Term::Discard { var: x.clone() }, ctx),
            SurfaceKind::Unitary { gate, qubits } => {
                simple(Term::Unitary { gate: gate.clone(), qubits: qubits.clone() }, ctx)
            }
            SurfaceKind::Unpair { left, right, src } => simple(
                Term::Unpair { left: left.clone(), right: right.clone(), src: src.clone() },
                ctx,
            ),
            SurfaceKind::Assign { dst, expr } => {
                let hint = ctx.expect.get(dst).cloned();
                let mut out = Vec::new();
                self.emit_into(expr, dst, hint.as_ref(), &mut out, ctx, span)?;
                Ok(Term::seq_all(out))
            }
            SurfaceKind::Seq(a, b) => {
                let a = self.term(a, ctx)?;
                let b = self.term(b, ctx)?;
                Ok(Term::seq(a, b))
            }
            SurfaceKind::While { bound, cond, body } => {
                let mut inner = ctx.clone();
                let body = self.term(body, &mut inner)?;
                Ok(Term::While { bound: *bound, cond: cond.clone(), body: Box::new(body) })
            }
            SurfaceKind::If { cond, then, otherwise } => {
                let u = self.fresh("u");
                let back_left = Term::Left { dst: cond.clone(), src: u.clone(), left: Type::Unit, right: Type::Unit };
                let back_right =
                    Term::Right { dst: cond.clone(), src: u.clone(), left: Type::Unit, right: Type::Unit };
                let mut then_ctx = ctx.clone();
                let m = self.term(then, &mut then_ctx)?;
                let left_body = match otherwise {
                    None => back_left,
                    Some(n) => {
                        let mut else_ctx = ctx.clone();
                        Term::seq(back_left, self.term(n, &mut else_ctx)?)
                    }
                };
                *ctx = then_ctx;
                Ok(Term::Case {
                    scrutinee: cond.clone(),
                    left_var: u.clone(),
                    left_body: Box::new(left_body),
                    right_var: u,
                    right_body: Box::new(Term::seq(back_right, m)),
                })
            }
            SurfaceKind::Case { scrutinee, first, second } => self.case(scrutinee, first, second, ctx, span),
            SurfaceKind::ProcDef { name, bound, param, param_ty, result, result_ty, body } => {
                let sig = ProcSig { bound: *bound, input: param_ty.clone(), output: result_ty.clone() };
                let mut procs = ctx.procs.clone();
                procs.insert(name.clone(), sig.clone());
                let mut inner = Ctx {
                    procs,
                    vars: VarContext::from([(param.clone(), param_ty.clone())]),
                    expect: BTreeMap::from([(result.clone(), result_ty.clone())]),
                };
                let body = self.term(body, &mut inner)?;
                ctx.procs.insert(name.clone(), sig);
                Ok(Term::ProcDef(Box::new(ProcDef {
                    name: name.clone(),
                    bound: *bound,
                    param: param.clone(),
                    param_ty: param_ty.clone(),
                    result: result.clone(),
                    result_ty: result_ty.clone(),
                    body,
                })))
            }
            SurfaceKind::Zero { input, output } => {
                simple(Term::Zero { input: input.clone(), output: output.clone() }, ctx)
            }
        }
    }

    fn case(
        &mut self,
        scrutinee: &Var,
        first: &Alt,
        second: &Alt,
        ctx: &mut Ctx,
        span: Span,
    ) -> Result<Term, DesugarError> {
        let err = |message: String| DesugarError { span, message };
        let (l, r) = match (&first.pattern, &second.pattern) {
            (Pattern::Left(_) | Pattern::Ff | Pattern::Zero | Pattern::Nil, _) => (first, second),
            _ => (second, first),
        };
        let shape = match (&l.pattern, &r.pattern) {
            (Pattern::Left(a), Pattern::Right(b)) => CaseShape::Plain(a.clone(), b.clone()),
            (Pattern::Ff, Pattern::Tt) => CaseShape::Bool,
            (Pattern::Zero, Pattern::Succ(n)) => CaseShape::Nat(n.clone()),
            (Pattern::Nil, Pattern::Cons(h, t)) => CaseShape::List(h.clone(), t.clone()),
            _ => return Err(err("case alternatives do not form a matching pair of patterns".into())),
        };
        let known = ctx.vars.get(scrutinee).cloned();
        let mut prefix = Vec::new();
        let mut target = scrutinee.clone();
        let mut left_prefix = Vec::new();
        let mut right_prefix = Vec::new();
        let (lv, rv);
        match shape {
            CaseShape::Plain(a, b) => {
                lv = a;
                rv = b;
            }
            CaseShape::Bool => {
                if let Some(t) = &known {
                    if !t.alpha_eq(&Type::bit()) {
                        return Err(err(format!("`tt`/`ff` patterns used on `{scrutinee}` of type {t}")));
                    }
                }
                lv = self.fresh("u");
                rv = lv.clone();
                left_prefix.push(Term::Discard { var: lv.clone() });
                right_prefix.push(Term::Discard { var: rv.clone() });
            }
            CaseShape::Nat(n) => {
                if let Some(t) = &known {
                    if !is_nat(t) {
                        return Err(err(format!("`zero`/`s` patterns used on `{scrutinee}` of type {t}")));
                    }
                }
                target = self.fresh("t");
                prefix.push(Term::Unfold { dst: target.clone(), src: scrutinee.clone() });
                lv = self.fresh("u");
                left_prefix.push(Term::Discard { var: lv.clone() });
                rv = n;
            }
            CaseShape::List(h, tl) => {
                if let Some(t) = &known {
                    if list_elem(t).is_none() {
                        return Err(err(format!("`nil`/`::` patterns used on `{scrutinee}` of type {t}")));
                    }
                }
                target = self.fresh("t");
                prefix.push(Term::Unfold { dst: target.clone(), src: scrutinee.clone() });
                lv = self.fresh("u");
                left_prefix.push(Term::Discard { var: lv.clone() });
                rv = self.fresh("p");
                right_prefix.push(Term::Unpair { left: h, right: tl, src: rv.clone() });
            }
        }
        for p in &prefix {
            ctx.apply(p);
        }
        let (lt, rt) = match ctx.take(&target) {
            Some(Type::Sum(a, b)) => (Some(*a), Some(*b)),
            _ => (None, None),
        };
        let mut lctx = ctx.clone();
        lctx.put(&lv, lt);
        let mut rctx = ctx.clone();
        rctx.put(&rv, rt);
        let mut branch = |prefix: Vec<Term>, body: &SurfaceTerm, c: &mut Ctx| -> Result<Term, DesugarError> {
            for p in &prefix {
                c.apply(p);
            }
            let b = self.term(body, c)?;
            let mut all = prefix;
            all.push(b);
            Ok(Term::seq_all(all))
        };
        let lb = branch(left_prefix, &l.body, &mut lctx)?;
        let rb = branch(right_prefix, &r.body, &mut rctx)?;
        *ctx = lctx;
        prefix.push(Term::Case {
            scrutinee: target,
            left_var: lv,
            left_body: Box::new(lb),
            right_var: rv,
            right_body: Box::new(rb),
        });
        Ok(Term::seq_all(prefix))
    }

    /// Variable holding the value of `e`, emitting code when `e` is compound.
    fn atom(
        &mut self,
        e: &Expr,
        hint: Option<&Type>,
        out: &mut Vec<Term>,
        ctx: &mut Ctx,
        span: Span,
    ) -> Result<Var, DesugarError> {
        if let Expr::Var(x) = e {
            return Ok(x.clone());
        }
        let t = self.fresh("t");
        self.emit_into(e, &t, hint, out, ctx, span)?;
        Ok(t)
    }

    fn push(&self, out: &mut Vec<Term>, ctx: &mut Ctx, t: Term) {
        ctx.apply(&t);
        out.push(t);
    }

    fn emit_into(
        &mut self,
        e: &Expr,
        dst: &Var,
        hint: Option<&Type>,
        out: &mut Vec<Term>,
        ctx: &mut Ctx,
        span: Span,
    ) -> Result<(), DesugarError> {
        let err = |message: String| DesugarError { span, message };
        let dst = dst.clone();
        match e {
            Expr::Var(x) => {
                return Err(err(format!("`{dst} = {x}` is not a term; variables cannot be renamed directly")))
            }
            Expr::Copy(x) => self.push(out, ctx, Term::Copy { dst, src: x.clone() }),
            Expr::Measure(q) => self.push(out, ctx, Term::Measure { bit: dst, qubit: q.clone() }),
            Expr::Left { left, right, arg } => {
                let src = self.atom(arg, Some(left), out, ctx, span)?;
                self.push(out, ctx, Term::Left { dst, src, left: left.clone(), right: right.clone() });
            }
            Expr::Right { left, right, arg } => {
                let src = self.atom(arg, Some(right), out, ctx, span)?;
                self.push(out, ctx, Term::Right { dst, src, left: left.clone(), right: right.clone() });
            }
            Expr::Fold { ty, arg } => {
                let inner = ty.unfold_mu();
                let src = self.atom(arg, inner.as_ref(), out, ctx, span)?;
                self.push(out, ctx, Term::Fold { dst, src, ty: ty.clone() });
            }
            Expr::Unfold(arg) => {
                let src = self.atom(arg, None, out, ctx, span)?;
                self.push(out, ctx, Term::Unfold { dst, src });
            }
            Expr::Pair(a, b) => {
                let (ha, hb) = match hint {
                    Some(Type::Tensor(x, y)) => (Some(x.as_ref()), Some(y.as_ref())),
                    _ => (None, None),
                };
                let left = self.atom(a, ha, out, ctx, span)?;
                let right = self.atom(b, hb, out, ctx, span)?;
                self.push(out, ctx, Term::Pair { dst, left, right });
            }
            Expr::Call { name, bound, arg } => {
                let input = ctx.procs.get(name).map(|s| s.input.clone());
                let a = self.atom(arg, input.as_ref(), out, ctx, span)?;
                self.push(out, ctx, Term::Call { name: name.clone(), bound: *bound, arg: a, result: dst });
            }
            Expr::Tt | Expr::Ff => {
                if let Some(t) = hint {
                    if !t.alpha_eq(&Type::bit()) {
                        return Err(err(format!("boolean literal used at type {t}")));
                    }
                }
                let u = self.fresh("u");
                self.push(out, ctx, Term::NewUnit { var: u.clone() });
                let (left, right) = (Type::Unit, Type::Unit);
                let t = if matches!(e, Expr::Tt) {
                    Term::Right { dst, src: u, left, right }
                } else {
                    Term::Left { dst, src: u, left, right }
                };
                self.push(out, ctx, t);
            }
            Expr::Zero | Expr::Succ(_) => {
                let nat = match hint {
                    Some(t) if is_nat(t) => t.clone(),
                    Some(t) => return Err(err(format!("numeral used at type {t}"))),
                    None => Type::nat(),
                };
                let t = self.fresh("t");
                if let Expr::Succ(pred) = e {
                    let n = self.atom(pred, Some(&nat), out, ctx, span)?;
                    if let Some(nt) = ctx.vars.get(&n) {
                        if !is_nat(nt) {
                            return Err(err(format!("`s` applied to `{n}` of type {nt}")));
                        }
                    }
                    self.push(out, ctx, Term::Right { dst: t.clone(), src: n, left: Type::Unit, right: nat.clone() });
                } else {
                    let u = self.fresh("u");
                    self.push(out, ctx, Term::NewUnit { var: u.clone() });
                    self.push(out, ctx, Term::Left { dst: t.clone(), src: u, left: Type::Unit, right: nat.clone() });
                }
                self.push(out, ctx, Term::Fold { dst, src: t, ty: nat });
            }
            Expr::Nil(ann) => {
                let hinted = hint.and_then(list_elem);
                if let (Some(t), None) = (hint, &hinted) {
                    return Err(err(format!("`nil` used at non-list type {t}")));
                }
                let elem = match (ann, &hinted) {
                    (Some(a), Some(h)) if !a.alpha_eq(h) => {
                        return Err(err(format!("`nil<{a}>` used at type {}", hint.unwrap())))
                    }
                    (Some(a), _) => a.clone(),
                    (None, Some(h)) => h.clone(),
                    (None, None) => {
                        return Err(err("cannot infer the element type of `nil`; write `nil<A>`".into()))
                    }
                };
                let list = match hint {
                    Some(h) if hinted.is_some() => h.clone(),
                    _ => Type::list(elem.clone()),
                };
                let u = self.fresh("u");
                let t = self.fresh("t");
                self.push(out, ctx, Term::NewUnit { var: u.clone() });
                self.push(out, ctx, Term::Left {
                    dst: t.clone(),
                    src: u,
                    left: Type::Unit,
                    right: Type::tensor(elem, list.clone()),
                });
                self.push(out, ctx, Term::Fold { dst, src: t, ty: list });
            }
            Expr::Cons(head, tail) => {
                let hinted = hint.and_then(list_elem);
                if let (Some(t), None) = (hint, &hinted) {
                    return Err(err(format!("`::` used at non-list type {t}")));
                }
                let h = self.atom(head, hinted.as_ref(), out, ctx, span)?;
                let elem = match (ctx.vars.get(&h).cloned(), hinted.clone()) {
                    (Some(a), Some(b)) if !a.alpha_eq(&b) => {
                        return Err(err(format!("list element `{h}` has type {a}, expected {b}")))
                    }
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => return Err(err(format!("cannot infer the type of list element `{h}`"))),
                };
                let list = match hint {
                    Some(t) if hinted.is_some() => t.clone(),
                    _ => Type::list(elem.clone()),
                };
                let rest = self.atom(tail, Some(&list), out, ctx, span)?;
                if let Some(rt) = ctx.vars.get(&rest) {
                    if !rt.alpha_eq(&list) {
                        return Err(err(format!("`::` tail `{rest}` has type {rt}, expected {list}")));
                    }
                }
                let p = self.fresh("p");
                let r = self.fresh("t");
                self.push(out, ctx, Term::Pair { dst: p.clone(), left: h, right: rest });
                self.push(out, ctx, Term::Right {
                    dst: r.clone(),
                    src: p,
                    left: Type::Unit,
                    right: Type::tensor(elem, list.clone()),
                });
                self.push(out, ctx, Term::Fold { dst, src: r, ty: list });
            }
        }
        Ok(())
    }
}
