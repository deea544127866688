//! Parse a program, desugar it, and type it.

use qpl::parser::pretty::pretty_print;
use qpl::parser::parse_program;
use qpl::typecheck::{check_config, show_context};
use qpl::operational::Configuration;

const SRC: &str = "
proc flip :: x : bit -> y : bit {
  case x of
      ff -> y = tt
    | tt -> y = ff
}

b = ff;
c = copy b;
d = flip(c)
";

fn main() {
    let program = parse_program(SRC).expect("parses");
    let config = Configuration::from_program(&program);
    for def in &config.store {
        println!("{} : {} -> {}", def.name, def.param_ty, def.result_ty);
    }
    println!("core term:\n{}", pretty_print(&config.term));
    let witness = check_config(&config).expect("well-typed");
    println!("main : <{}> -> <{}>", show_context(&witness.input), show_context(&witness.output));

    // Copying a qubit is rejected.
    let bad = parse_program("new qbit q;\nr = copy q").expect("parses");
    let err = check_config(&Configuration::from_program(&bad)).unwrap_err();
    println!("rejected: {err}");
}
