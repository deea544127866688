//! Bounded approximants of a loop: they always halt and their denotations
//! climb towards the unbounded one.

use qpl::denotational::Denoter;
use qpl::operational::{Configuration, Machine};
use qpl::parser::parse_program;
use qpl::qmath::{GateRegistry, DEFAULT_MAX_QUBITS};
use qpl::verify::{build_finitary, config_approximates};

fn main() {
    let c = Configuration::from_program(&parse_program(include_str!("../programs/cointoss.qpl")).unwrap());
    let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);
    let den = Denoter::new(GateRegistry::builtin(), 8, 64);
    let full = den.denote_config(&c).unwrap().state.trace();
    for n in [0, 1, 2, 4, 8] {
        let a = build_finitary(&c, n);
        let e = machine.enumerate(&a.config, 10_000).unwrap();
        let mass = den.denote_config(&a.config).unwrap().state.trace();
        println!(
            "bound {n}: approximates {}, halts {:.6}, zero mass {:.6}, frontier {}, denotation {mass:.6} of {full:.6}",
            config_approximates(&a.config, &c),
            e.halt_lower_bound,
            e.zero_mass,
            e.frontier_mass,
        );
    }
}
