//! Denotations of configurations and terms as block states and superoperators.

use qpl::ast::{Type, VarContext};
use qpl::denotational::{validate, Denoter, ProcEnv};
use qpl::operational::Configuration;
use qpl::parser::{parse_program, parse_term};
use qpl::qmath::GateRegistry;

fn main() {
    let den = Denoter::new(GateRegistry::builtin(), 8, 64);

    let coin = Configuration::from_program(&parse_program(include_str!("../programs/cointoss.qpl")).unwrap());
    let d = den.denote_config(&coin).unwrap();
    println!("coin toss: mass {:.16e}, residual {:.1e}", d.state.trace(), d.residual);
    for (i, m) in d.state.masses().iter().enumerate() {
        println!("  block {i}: {m:.6}");
    }

    // A measurement as a map qbit -> bit.
    let gamma = VarContext::from([("q".to_string(), Type::Qbit)]);
    let t = parse_term("q *= H; b = measure q").unwrap();
    let map = den.denote_term(&t, &ProcEnv::default(), &gamma).unwrap();
    let v = validate(&map.map, 1e-9);
    println!(
        "H then measure: {} -> {}, cp {} (min Choi eig {:.1e}), trace non-increasing {}",
        map.map.domain.state_dim(),
        map.map.codomain.state_dim(),
        v.cp,
        v.min_choi_eig,
        v.trace_nonincreasing
    );
}
