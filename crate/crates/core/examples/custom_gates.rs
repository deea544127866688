//! User gates from a JSON registry; non-unitary matrices are rejected.

use qpl::operational::{Configuration, Machine};
use qpl::parser::parse_program;
use qpl::qmath::GateRegistry;

fn main() {
    let gates = GateRegistry::from_json(
        r#"{ "SX": { "arity": 1, "matrix": [[[0.5, 0.5], [0.5, -0.5]], [[0.5, -0.5], [0.5, 0.5]]] } }"#,
    )
    .unwrap();
    let src = "new qbit q;\nq *= SX;\nq *= SX;\nb = measure q";
    let c = Configuration::from_program(&parse_program(src).unwrap());
    let e = Machine::new(gates, 4).enumerate(&c, 100).unwrap();
    for g in e.grouped() {
        println!("{} with probability {:.3}", g.assignment, g.mass);
    }

    let bad = GateRegistry::from_json(r#"{ "K": { "arity": 1, "matrix": [[[1,0],[1,0]],[[0,0],[1,0]]] } }"#);
    println!("{}", bad.unwrap_err());
}
