//! Recursive procedures over lists of qubits build GHZ states.

use qpl::operational::{Configuration, Machine};
use qpl::parser::parse_program;
use qpl::qmath::{ghz_state, GateRegistry, DEFAULT_MAX_QUBITS};

const SRC: &str = include_str!("../programs/ghz.qpl");

fn main() {
    let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);
    for n in 1..=5 {
        let nat = format!("{}zero{}", "s(".repeat(n), ")".repeat(n));
        let src = SRC.replace("n = s(s(s(zero)));", &format!("n = {nat};"));
        let c = Configuration::from_program(&parse_program(&src).unwrap());
        let e = machine.enumerate(&c, 10_000).unwrap();
        let leaf = &e.leaves[0];
        let err = leaf.config.rho.max_abs_diff(&ghz_state(n).unwrap());
        println!("n = {n}: {} steps, {}, |rho - GHZ| = {err:.1e}", leaf.steps, leaf.config.show_assignment());
    }
}
