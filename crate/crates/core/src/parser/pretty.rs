use std::fmt;

use crate::ast::{Term, Type, Value, VarContext};

#[derive(Clone, Copy, PartialEq)]
enum Pos {
    Top,
    SumLeft,
    SumRight,
    TensorLeft,
    TensorRight,
}

fn alias(t: &Type) -> Option<String> {
    if *t == Type::bit() {
        return Some("bit".into());
    }
    if *t == Type::nat() {
        return Some("Nat".into());
    }
    if let Type::Mu(_, body) = t {
        if let Type::Sum(_, r) = body.as_ref() {
            if let Type::Tensor(a, _) = r.as_ref() {
                if Type::list((**a).clone()) == *t {
                    return Some(if **a == Type::Qbit {
                        "ListQ".into()
                    } else {
                        format!("List({})", type_to_string(a))
                    });
                }
            }
        }
    }
    None
}

fn write_type(t: &Type, pos: Pos, out: &mut String) {
    if let Some(a) = alias(t) {
        out.push_str(&a);
        return;
    }
    let wrap = match t {
        Type::Sum(..) => matches!(pos, Pos::SumLeft | Pos::TensorLeft | Pos::TensorRight),
        Type::Tensor(..) => pos == Pos::TensorLeft,
        Type::Mu(..) => pos != Pos::Top,
        _ => false,
    };
    if wrap {
        out.push('(');
    }
    match t {
        Type::Var(x) => out.push_str(x),
        Type::Unit => out.push('I'),
        Type::Qbit => out.push_str("qbit"),
        Type::Sum(a, b) => {
            write_type(a, Pos::SumLeft, out);
            out.push_str(" + ");
            write_type(b, Pos::SumRight, out);
        }
        Type::Tensor(a, b) => {
            write_type(a, Pos::TensorLeft, out);
            out.push_str(" * ");
            write_type(b, Pos::TensorRight, out);
        }
        Type::Mu(x, body) => {
            out.push_str("mu ");
            out.push_str(x);
            out.push_str(". ");
            write_type(body, Pos::Top, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

/// Renders a type in surface syntax, using `bit`, `Nat`, `List(A)` and
/// `ListQ` where the structure matches the alias exactly.
pub fn type_to_string(t: &Type) -> String {
    let mut s = String::new();
    write_type(t, Pos::Top, &mut s);
    s
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&type_to_string(self))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Star => write!(f, "*"),
            Value::Qubit(n) => write!(f, "{n}"),
            Value::Left { left, right, v } => write!(f, "left<{left}, {right}> {v}"),
            Value::Right { left, right, v } => write!(f, "right<{left}, {right}> {v}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Fold { ty, v } => write!(f, "fold<{ty}> {v}"),
        }
    }
}

/// Values with booleans, numerals and lists written in surface form:
/// `ff`, `s(zero)`, `1 :: 2 :: nil`.  Falls back to [`Value`]'s display.
pub fn value_to_string(v: &Value) -> String {
    let unit_sum = |l: &Type, r: &Type| *l == Type::Unit && *r == Type::Unit;
    match v {
        Value::Left { left, right, v } if unit_sum(left, right) && **v == Value::Star => "ff".into(),
        Value::Right { left, right, v } if unit_sum(left, right) && **v == Value::Star => "tt".into(),
        Value::Fold { ty, v: inner } if ty.alpha_eq(&Type::nat()) => match &**inner {
            Value::Left { .. } => "zero".into(),
            Value::Right { v: n, .. } => format!("s({})", value_to_string(n)),
            _ => v.to_string(),
        },
        Value::Fold { ty: Type::Mu(y, body), v: inner } if is_list_body(y, body) => match &**inner {
            Value::Left { .. } => "nil".into(),
            Value::Right { v: cell, .. } => match &**cell {
                Value::Pair(h, t) => format!("{} :: {}", value_to_string(h), value_to_string(t)),
                _ => v.to_string(),
            },
            _ => v.to_string(),
        },
        Value::Left { left, right, v } => format!("left<{left}, {right}> {}", value_to_string(v)),
        Value::Right { left, right, v } => format!("right<{left}, {right}> {}", value_to_string(v)),
        Value::Pair(a, b) => format!("({}, {})", value_to_string(a), value_to_string(b)),
        other => other.to_string(),
    }
}

fn is_list_body(y: &str, body: &Type) -> bool {
    match body {
        Type::Sum(l, r) => {
            **l == Type::Unit
                && matches!(&**r, Type::Tensor(a, rest) if **rest == Type::Var(y.to_string()) && a.is_closed())
        }
        _ => false,
    }
}

fn context(ctx: &VarContext) -> String {
    ctx.iter().map(|(x, t)| format!("{x} : {t}")).collect::<Vec<_>>().join(", ")
}

fn bound(b: &Option<u32>) -> String {
    b.map(|n| format!("^{n}")).unwrap_or_default()
}

fn compact(t: &Term) -> String {
    match t {
        Term::NewUnit { var } => format!("new unit {var}"),
        Term::Discard { var } => format!("discard {var}"),
        Term::Copy { dst, src } => format!("{dst} = copy {src}"),
        Term::NewQbit { var } => format!("new qbit {var}"),
        Term::Measure { bit, qubit } => format!("{bit} = measure {qubit}"),
        Term::Unitary { gate, qubits } => format!("{} *= {gate}", qubits.join(", ")),
        Term::Seq(a, b) => {
            let head = if matches!(**a, Term::Seq(..)) { format!("{{ {} }}", compact(a)) } else { compact(a) };
            format!("{head}; {}", compact(b))
        }
        Term::Skip => "skip".into(),
        Term::While { bound: b, cond, body } => format!("while{} {cond} do {{ {} }}", bound(b), compact(body)),
        Term::Left { dst, src, left, right } => format!("{dst} = left<{left}, {right}> {src}"),
        Term::Right { dst, src, left, right } => format!("{dst} = right<{left}, {right}> {src}"),
        Term::Case { scrutinee, left_var, left_body, right_var, right_body } => format!(
            "case {scrutinee} of {{ left {left_var} -> {} | right {right_var} -> {} }}",
            compact(left_body),
            compact(right_body)
        ),
        Term::Pair { dst, left, right } => format!("{dst} = ({left}, {right})"),
        Term::Unpair { left, right, src } => format!("({left}, {right}) = {src}"),
        Term::Fold { dst, src, ty } => format!("{dst} = fold<{ty}> {src}"),
        Term::Unfold { dst, src } => format!("{dst} = unfold {src}"),
        Term::ProcDef(d) => format!(
            "proc {}{} :: {} : {} -> {} : {} {{ {} }}",
            d.name,
            bound(&d.bound),
            d.param,
            d.param_ty,
            d.result,
            d.result_ty,
            compact(&d.body)
        ),
        Term::Call { name, bound: b, arg, result } => format!("{result} = {name}{}({arg})", bound(b)),
        Term::Zero { input, output } => format!("0<{}; {}>", context(input), context(output)),
    }
}

/// Single-line rendering; parsing it back yields the same core term.
pub fn pretty_print(t: &Term) -> String {
    compact(t)
}

const WIDTH: usize = 80;

fn statements(t: &Term) -> Vec<&Term> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Term::Seq(a, b) = cur {
        out.push(a.as_ref());
        cur = b;
    }
    out.push(cur);
    out
}

fn block(t: &Term, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let one = compact(t);
    if one.len() + indent <= WIDTH {
        return format!("{pad}{one}");
    }
    match t {
        Term::Seq(..) => statements(t)
            .iter()
            .map(|s| {
                if matches!(s, Term::Seq(..)) {
                    format!("{pad}{{\n{}\n{pad}}}", block(s, indent + 2))
                } else {
                    block(s, indent)
                }
            })
            .collect::<Vec<_>>()
            .join(";\n"),
        Term::While { bound: b, cond, body } => {
            format!("{pad}while{} {cond} do {{\n{}\n{pad}}}", bound(b), block(body, indent + 2))
        }
        Term::Case { scrutinee, left_var, left_body, right_var, right_body } => format!(
            "{pad}case {scrutinee} of {{\n{pad}  left {left_var} ->\n{}\n{pad}| right {right_var} ->\n{}\n{pad}}}",
            block(left_body, indent + 4),
            block(right_body, indent + 4)
        ),
        Term::ProcDef(d) => format!(
            "{pad}proc {}{} :: {} : {} -> {} : {} {{\n{}\n{pad}}}",
            d.name,
            bound(&d.bound),
            d.param,
            d.param_ty,
            d.result,
            d.result_ty,
            block(&d.body, indent + 2)
        ),
        _ => format!("{pad}{one}"),
    }
}

/// Indented multi-line rendering, parsing back to the same core term.
pub fn pretty_print_block(t: &Term) -> String {
    block(t, 0)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&compact(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    #[test]
    fn small_examples() {
        assert_eq!(pretty_print(&Term::Skip), "skip");
        assert_eq!(pretty_print(&Term::seq(Term::Skip, Term::Skip)), "skip; skip");
        let w = Term::While { bound: None, cond: "b".into(), body: Box::new(Term::Skip) };
        assert_eq!(pretty_print(&w), "while b do { skip }");
    }

    #[test]
    fn type_aliases_print_only_on_exact_structure() {
        assert_eq!(Type::nat().to_string(), "Nat");
        assert_eq!(Type::list_q().to_string(), "ListQ");
        assert_eq!(Type::list(Type::bit()).to_string(), "List(bit)");
        let renamed = Type::mu("Z", Type::sum(Type::Unit, Type::var("Z")));
        assert_eq!(renamed.to_string(), "mu Z. I + Z");
        let t = Type::tensor(Type::sum(Type::Qbit, Type::Unit), Type::mu("X", Type::var("X")));
        assert_eq!(t.to_string(), "(qbit + I) * (mu X. X)");
    }

    #[test]
    fn left_nested_sequences_round_trip() {
        let t = Term::seq(Term::seq(Term::Skip, Term::Discard { var: "x".into() }), Term::Skip);
        assert_eq!(parse_term(&pretty_print(&t)).unwrap(), t);
        assert_eq!(parse_term(&pretty_print_block(&t)).unwrap(), t);
    }
}
