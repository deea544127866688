//! Exhaustive branch enumeration and seeded sampling of a fair coin loop.

use qpl::operational::{Configuration, Machine};
use qpl::parser::parse_program;
use qpl::qmath::{GateRegistry, DEFAULT_MAX_QUBITS};

const SRC: &str = include_str!("../programs/cointoss.qpl");

fn main() {
    let c = Configuration::from_program(&parse_program(SRC).unwrap());
    let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);

    let e = machine.enumerate(&c, 247).unwrap();
    for leaf in e.leaves.iter().take(5) {
        println!("step {:>3}: trace {:.3e}  {}", leaf.steps, leaf.config.trace(), leaf.config.show_assignment());
    }
    println!("... {} terminals", e.leaves.len());
    println!("halt lower bound {:.16e}, frontier {:.3e}", e.halt_lower_bound, e.frontier_mass);

    for seed in 0..4 {
        let s = machine.sample(&c, seed).unwrap();
        println!("seed {seed}: {} steps, choices {:?}, probability {}", s.steps, s.choices, s.probability);
    }
}
