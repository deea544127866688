//! Concrete syntax: lexer, parser, desugaring to core terms and the
//! pretty-printer.
//!
//! Statements are separated by `;` (right-associative).  Case alternatives
//! without surrounding braces extend as far right as possible; write
//! `case y of { left a -> M | right b -> N }; P` to sequence after a case.
//!
//! Sugar and its expansion (`u`, `t`, `p` stand for fresh names):
//!
//! | surface                        | core                                                          |
//! |--------------------------------|---------------------------------------------------------------|
//! | `if b then {M}`                | `case b of { left u -> b = left u | right u -> b = right u; M }` |
//! | `if b then {M} else {N}`       | `case b of { left u -> b = left u; N | right u -> b = right u; M }` |
//! | `x = tt` / `x = ff`            | `new unit u; x = right<I, I> u` / `left`                      |
//! | `x = zero`, `x = s(n)`         | `fold<Nat>` of `left<I, Nat> *` / `right<I, Nat> n`           |
//! | `x = nil`, `x = h :: l`        | `fold<List(A)>` of `left *` / `right (h, l)`                  |
//! | `case n of zero -> M \| s(m) -> N` | `t = unfold n; case t of { left u -> discard u; M \| right m -> N }` |
//! | `case l of nil -> M \| h :: r -> N` | `t = unfold l; case t of { left u -> discard u; M \| right p -> (h, r) = p; N }` |
//! | `case b of ff -> M \| tt -> N` | `case b of { left u -> discard u; M \| right u -> discard u; N }` |
//! | `y = f(g(x))`                  | `t = g(x); y = f(t)`                                          |

mod desugar;
mod lexer;
pub mod pretty;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::{ProcDef, Term, Type, Value, Var, VarContext};
use lexer::{lex, Tok, Token};

pub use desugar::{desugar, desugar_in};
pub use lexer::Span;
pub use pretty::{pretty_print, pretty_print_block, type_to_string};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{column}: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("desugaring error at {}:{}: {message}", span.line, span.column)]
pub struct DesugarError {
    pub span: Span,
    pub message: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Desugar(#[from] DesugarError),
}

/// Right-hand sides of `x = ...`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Var(Var),
    Copy(Var),
    Measure(Var),
    Left { left: Type, right: Type, arg: Box<Expr> },
    Right { left: Type, right: Type, arg: Box<Expr> },
    Fold { ty: Type, arg: Box<Expr> },
    Unfold(Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    Call { name: String, bound: Option<u32>, arg: Box<Expr> },
    Tt,
    Ff,
    Zero,
    Succ(Box<Expr>),
    /// `nil`, optionally annotated with the element type.
    Nil(Option<Type>),
    Cons(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Left(Var),
    Right(Var),
    Ff,
    Tt,
    Zero,
    Succ(Var),
    Nil,
    Cons(Var, Var),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Alt {
    pub pattern: Pattern,
    pub body: SurfaceTerm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceKind {
    Skip,
    NewUnit(Var),
    NewQbit(Var),
    Discard(Var),
    Unitary { gate: String, qubits: Vec<Var> },
    Assign { dst: Var, expr: Expr },
    Unpair { left: Var, right: Var, src: Var },
    Seq(Box<SurfaceTerm>, Box<SurfaceTerm>),
    While { bound: Option<u32>, cond: Var, body: Box<SurfaceTerm> },
    If { cond: Var, then: Box<SurfaceTerm>, otherwise: Option<Box<SurfaceTerm>> },
    Case { scrutinee: Var, first: Box<Alt>, second: Box<Alt> },
    ProcDef {
        name: String,
        bound: Option<u32>,
        param: Var,
        param_ty: Type,
        result: Var,
        result_ty: Type,
        body: Box<SurfaceTerm>,
    },
    Zero { input: VarContext, output: VarContext },
}

/// A parsed term with sugar, annotated with source positions.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceTerm {
    pub kind: SurfaceKind,
    pub span: Span,
}

/// A program: leading procedure definitions (the initial store) and the main term.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub store: Vec<ProcDef>,
    pub main: Term,
}

const KEYWORDS: &[&str] = &[
    "new", "unit", "qbit", "discard", "copy", "measure", "skip", "while", "do", "case", "of",
    "left", "right", "fold", "unfold", "proc", "if", "then", "else", "tt", "ff", "zero", "nil",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses surface syntax.
pub fn parse(src: &str) -> Result<SurfaceTerm, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.term()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Parses and desugars a whole source text into a core term.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    Ok(desugar(&parse(src)?)?)
}

/// Parses a program and moves its leading procedure definitions into the store.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut rest = parse_term(src)?;
    let mut store = Vec::new();
    loop {
        match rest {
            Term::Seq(head, tail) if matches!(*head, Term::ProcDef(_)) => {
                if let Term::ProcDef(d) = *head {
                    store.push(*d);
                }
                rest = *tail;
            }
            Term::ProcDef(d) => {
                store.push(*d);
                rest = Term::Skip;
            }
            other => return Ok(Program { store, main: other }),
        }
    }
}

pub fn parse_type(src: &str) -> Result<Type, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.ty()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Parses `* | n | left<A, B> v | right<A, B> v | (v, w) | fold<T> v`.
pub fn parse_value(src: &str) -> Result<Value, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let v = p.value()?;
    p.expect(Tok::Eof)?;
    Ok(v)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, SyntaxError> {
        let sp = self.span();
        Err(SyntaxError {
            line: sp.line,
            column: sp.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else if tok == Tok::Eof {
            self.error(&["end of input"])
        } else {
            let want = format!("`{}`", tok.symbol());
            self.error(&[want.as_str()])
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            let want = format!("`{kw}`");
            self.error(&[want.as_str()])
        }
    }

    fn var(&mut self) -> Result<Var, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["variable"]),
        }
    }

    fn number(&mut self) -> Result<u64, SyntaxError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error(&["number"]),
        }
    }

    fn bound(&mut self) -> Result<Option<u32>, SyntaxError> {
        if *self.peek() == Tok::Caret {
            self.bump();
            let n = self.number()?;
            u32::try_from(n).map(Some).or_else(|_| self.error(&["bound below 2^32"]))
        } else {
            Ok(None)
        }
    }

    fn at_term_end(&self) -> bool {
        matches!(self.peek(), Tok::RBrace | Tok::Bar | Tok::Eof)
    }

    fn term(&mut self) -> Result<SurfaceTerm, SyntaxError> {
        let first = self.stmt()?;
        // a closing brace of a definition may stand in for the separator
        let implicit = matches!(first.kind, SurfaceKind::ProcDef { .. }) && !self.at_term_end();
        if *self.peek() == Tok::Semi || implicit {
            if *self.peek() == Tok::Semi {
                self.bump();
            }
            if self.at_term_end() {
                return Ok(first);
            }
            let rest = self.term()?;
            let span = first.span;
            return Ok(SurfaceTerm { kind: SurfaceKind::Seq(Box::new(first), Box::new(rest)), span });
        }
        Ok(first)
    }

    fn block(&mut self) -> Result<SurfaceTerm, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let t = self.term()?;
        self.expect(Tok::RBrace)?;
        Ok(t)
    }

    fn stmt(&mut self) -> Result<SurfaceTerm, SyntaxError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::LBrace => return self.block(),
            Tok::LParen => {
                self.bump();
                let left = self.var()?;
                self.expect(Tok::Comma)?;
                let right = self.var()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Eq)?;
                let src = self.var()?;
                SurfaceKind::Unpair { left, right, src }
            }
            Tok::Num(0) => {
                self.bump();
                self.expect(Tok::Lt)?;
                let input = self.context(Tok::Semi)?;
                self.expect(Tok::Semi)?;
                let output = self.context(Tok::Gt)?;
                self.expect(Tok::Gt)?;
                SurfaceKind::Zero { input, output }
            }
            Tok::Ident(w) => match w.as_str() {
                "skip" => {
                    self.bump();
                    SurfaceKind::Skip
                }
                "new" => {
                    self.bump();
                    if self.is_kw("unit") {
                        self.bump();
                        SurfaceKind::NewUnit(self.var()?)
                    } else if self.is_kw("qbit") {
                        self.bump();
                        SurfaceKind::NewQbit(self.var()?)
                    } else {
                        return self.error(&["`unit`", "`qbit`"]);
                    }
                }
                "discard" => {
                    self.bump();
                    SurfaceKind::Discard(self.var()?)
                }
                "while" => {
                    self.bump();
                    let bound = self.bound()?;
                    let cond = self.var()?;
                    self.expect_kw("do")?;
                    let body = self.block()?;
                    SurfaceKind::While { bound, cond, body: Box::new(body) }
                }
                "if" => {
                    self.bump();
                    let cond = self.var()?;
                    self.expect_kw("then")?;
                    let then = Box::new(self.block()?);
                    let otherwise = if self.is_kw("else") {
                        self.bump();
                        Some(Box::new(self.block()?))
                    } else {
                        None
                    };
                    SurfaceKind::If { cond, then, otherwise }
                }
                "case" => self.case()?,
                "proc" => self.proc_def()?,
                _ if is_keyword(&w) => {
                    return self.error(&["statement"]);
                }
                _ => self.var_stmt()?,
            },
            _ => return self.error(&["statement"]),
        };
        Ok(SurfaceTerm { kind, span })
    }

    fn var_stmt(&mut self) -> Result<SurfaceKind, SyntaxError> {
        let first = self.var()?;
        match self.peek() {
            Tok::Comma | Tok::StarEq => {
                let mut qubits = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    qubits.push(self.var()?);
                }
                self.expect(Tok::StarEq)?;
                let gate = match self.peek().clone() {
                    Tok::Ident(g) if !is_keyword(&g) => {
                        self.bump();
                        g
                    }
                    _ => return self.error(&["gate name"]),
                };
                Ok(SurfaceKind::Unitary { gate, qubits })
            }
            Tok::Eq => {
                self.bump();
                let expr = self.expr()?;
                Ok(SurfaceKind::Assign { dst: first, expr })
            }
            _ => self.error(&["`=`", "`*=`", "`,`"]),
        }
    }

    fn case(&mut self) -> Result<SurfaceKind, SyntaxError> {
        self.expect_kw("case")?;
        let scrutinee = self.var()?;
        self.expect_kw("of")?;
        let braced = *self.peek() == Tok::LBrace;
        if braced {
            self.bump();
        }
        let first = self.alt()?;
        self.expect(Tok::Bar)?;
        let second = self.alt()?;
        if braced {
            self.expect(Tok::RBrace)?;
        }
        Ok(SurfaceKind::Case { scrutinee, first: Box::new(first), second: Box::new(second) })
    }

    fn alt(&mut self) -> Result<Alt, SyntaxError> {
        let pattern = match self.peek().clone() {
            Tok::Ident(w) => match w.as_str() {
                "left" => {
                    self.bump();
                    Pattern::Left(self.var()?)
                }
                "right" => {
                    self.bump();
                    Pattern::Right(self.var()?)
                }
                "tt" => {
                    self.bump();
                    Pattern::Tt
                }
                "ff" => {
                    self.bump();
                    Pattern::Ff
                }
                "zero" => {
                    self.bump();
                    Pattern::Zero
                }
                "nil" => {
                    self.bump();
                    Pattern::Nil
                }
                "s" if *self.peek_at(1) == Tok::LParen => {
                    self.bump();
                    self.bump();
                    let n = self.var()?;
                    self.expect(Tok::RParen)?;
                    Pattern::Succ(n)
                }
                _ if !is_keyword(&w) && *self.peek_at(1) == Tok::ColonColon => {
                    let h = self.var()?;
                    self.bump();
                    let t = self.var()?;
                    Pattern::Cons(h, t)
                }
                _ => return self.error(&["case pattern"]),
            },
            _ => return self.error(&["case pattern"]),
        };
        self.expect(Tok::Arrow)?;
        let body = self.term()?;
        Ok(Alt { pattern, body })
    }

    fn proc_def(&mut self) -> Result<SurfaceKind, SyntaxError> {
        self.expect_kw("proc")?;
        let name = self.var()?;
        let bound = self.bound()?;
        self.expect(Tok::ColonColon)?;
        let param = self.var()?;
        self.expect(Tok::Colon)?;
        let param_ty = self.ty()?;
        self.expect(Tok::Arrow)?;
        let result = self.var()?;
        self.expect(Tok::Colon)?;
        let result_ty = self.ty()?;
        let body = self.block()?;
        Ok(SurfaceKind::ProcDef { name, bound, param, param_ty, result, result_ty, body: Box::new(body) })
    }

    fn context(&mut self, end: Tok) -> Result<VarContext, SyntaxError> {
        let mut ctx = BTreeMap::new();
        if *self.peek() == end {
            return Ok(ctx);
        }
        loop {
            let x = self.var()?;
            self.expect(Tok::Colon)?;
            let t = self.ty()?;
            if ctx.insert(x.clone(), t).is_some() {
                return self.error(&["distinct variable names"]);
            }
            if *self.peek() != Tok::Comma {
                return Ok(ctx);
            }
            self.bump();
        }
    }

    fn annotation2(&mut self) -> Result<(Type, Type), SyntaxError> {
        self.expect(Tok::Lt)?;
        let a = self.ty()?;
        self.expect(Tok::Comma)?;
        let b = self.ty()?;
        self.expect(Tok::Gt)?;
        Ok((a, b))
    }

    fn annotation1(&mut self) -> Result<Type, SyntaxError> {
        self.expect(Tok::Lt)?;
        let a = self.ty()?;
        self.expect(Tok::Gt)?;
        Ok(a)
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let head = self.prim()?;
        if *self.peek() == Tok::ColonColon {
            self.bump();
            let tail = self.expr()?;
            return Ok(Expr::Cons(Box::new(head), Box::new(tail)));
        }
        Ok(head)
    }

    fn prim(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let a = self.expr()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let b = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::Pair(Box::new(a), Box::new(b)));
                }
                self.expect(Tok::RParen)?;
                Ok(a)
            }
            Tok::Ident(w) => match w.as_str() {
                "copy" => {
                    self.bump();
                    Ok(Expr::Copy(self.var()?))
                }
                "measure" => {
                    self.bump();
                    Ok(Expr::Measure(self.var()?))
                }
                "left" | "right" => {
                    self.bump();
                    let (left, right) = self.annotation2()?;
                    let arg = Box::new(self.prim()?);
                    Ok(if w == "left" {
                        Expr::Left { left, right, arg }
                    } else {
                        Expr::Right { left, right, arg }
                    })
                }
                "fold" => {
                    self.bump();
                    let ty = self.annotation1()?;
                    Ok(Expr::Fold { ty, arg: Box::new(self.prim()?) })
                }
                "unfold" => {
                    self.bump();
                    Ok(Expr::Unfold(Box::new(self.prim()?)))
                }
                "tt" => {
                    self.bump();
                    Ok(Expr::Tt)
                }
                "ff" => {
                    self.bump();
                    Ok(Expr::Ff)
                }
                "zero" => {
                    self.bump();
                    Ok(Expr::Zero)
                }
                "nil" => {
                    self.bump();
                    if *self.peek() == Tok::Lt {
                        Ok(Expr::Nil(Some(self.annotation1()?)))
                    } else {
                        Ok(Expr::Nil(None))
                    }
                }
                "s" if *self.peek_at(1) == Tok::LParen => {
                    self.bump();
                    self.bump();
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Succ(Box::new(e)))
                }
                _ if is_keyword(&w) => self.error(&["expression"]),
                _ => {
                    self.bump();
                    if matches!(self.peek(), Tok::LParen | Tok::Caret) {
                        let bound = self.bound()?;
                        self.expect(Tok::LParen)?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Call { name: w, bound, arg: Box::new(arg) })
                    } else {
                        Ok(Expr::Var(w))
                    }
                }
            },
            _ => self.error(&["expression"]),
        }
    }

    fn ty(&mut self) -> Result<Type, SyntaxError> {
        if *self.peek() == Tok::Mu {
            self.bump();
            let x = self.type_var()?;
            self.expect(Tok::Dot)?;
            let body = self.ty()?;
            return Ok(Type::Mu(x, Box::new(body)));
        }
        let left = self.tensor_ty()?;
        if *self.peek() == Tok::Plus {
            self.bump();
            let right = self.ty()?;
            return Ok(Type::sum(left, right));
        }
        Ok(left)
    }

    fn tensor_ty(&mut self) -> Result<Type, SyntaxError> {
        let left = self.atom_ty()?;
        if *self.peek() == Tok::Star {
            self.bump();
            let right = if *self.peek() == Tok::Mu { self.ty()? } else { self.tensor_ty()? };
            return Ok(Type::tensor(left, right));
        }
        Ok(left)
    }

    fn type_var(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_type_keyword(&s) && !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(&["type variable"]),
        }
    }

    fn atom_ty(&mut self) -> Result<Type, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) => match s.as_str() {
                "I" => {
                    self.bump();
                    Ok(Type::Unit)
                }
                "qbit" => {
                    self.bump();
                    Ok(Type::Qbit)
                }
                "bit" => {
                    self.bump();
                    Ok(Type::bit())
                }
                "Nat" => {
                    self.bump();
                    Ok(Type::nat())
                }
                "ListQ" => {
                    self.bump();
                    Ok(Type::list_q())
                }
                "List" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let a = self.ty()?;
                    self.expect(Tok::RParen)?;
                    Ok(Type::list(a))
                }
                _ => Ok(Type::Var(self.type_var()?)),
            },
            _ => self.error(&["type"]),
        }
    }

    fn value(&mut self) -> Result<Value, SyntaxError> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(Value::Star)
            }
            Tok::Num(n) => {
                self.bump();
                Ok(Value::Qubit(n as usize))
            }
            Tok::LParen => {
                self.bump();
                let a = self.value()?;
                self.expect(Tok::Comma)?;
                let b = self.value()?;
                self.expect(Tok::RParen)?;
                Ok(Value::pair(a, b))
            }
            Tok::Ident(w) if w == "left" || w == "right" => {
                self.bump();
                let (left, right) = self.annotation2()?;
                let v = Box::new(self.value()?);
                Ok(if w == "left" { Value::Left { left, right, v } } else { Value::Right { left, right, v } })
            }
            Tok::Ident(w) if w == "fold" => {
                self.bump();
                let ty = self.annotation1()?;
                Ok(Value::Fold { ty, v: Box::new(self.value()?) })
            }
            _ => self.error(&["value"]),
        }
    }
}

fn is_type_keyword(s: &str) -> bool {
    matches!(s, "I" | "qbit" | "bit" | "Nat" | "ListQ" | "List")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cointoss_body_parses_to_core_sequence() {
        let t = parse_term("new qbit q; q *= H;").unwrap();
        assert_eq!(
            t,
            Term::seq(
                Term::NewQbit { var: "q".into() },
                Term::Unitary { gate: "H".into(), qubits: vec!["q".into()] }
            )
        );
    }

    #[test]
    fn minimal_loop() {
        let t = parse_term("while b do { skip }").unwrap();
        assert_eq!(t, Term::While { bound: None, cond: "b".into(), body: Box::new(Term::Skip) });
    }

    #[test]
    fn missing_gate_is_reported_at_gate_position() {
        let e = parse("q *= ;").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
        assert!(e.expected.contains(&"gate name".to_string()));
    }

    #[test]
    fn types_and_aliases() {
        assert_eq!(parse_type("mu X. I + X").unwrap(), Type::nat());
        assert_eq!(parse_type("Nat").unwrap(), Type::nat());
        assert_eq!(parse_type("List(qbit)").unwrap(), Type::list_q());
        assert_eq!(parse_type("bit * qbit").unwrap(), Type::tensor(Type::bit(), Type::Qbit));
        assert_eq!(
            parse_type("I + qbit * qbit").unwrap(),
            Type::sum(Type::Unit, Type::tensor(Type::Qbit, Type::Qbit))
        );
    }

    #[test]
    fn values() {
        assert_eq!(parse_value("right<I, I> *").unwrap(), Value::tt());
        assert_eq!(parse_value("(1, 2)").unwrap(), Value::pair(Value::Qubit(1), Value::Qubit(2)));
    }

    #[test]
    fn comments_are_skipped() {
        let t = parse_term("-- nothing here\nskip -- trailing\n").unwrap();
        assert_eq!(t, Term::Skip);
    }
}
