//! Runs the full verification suite over the bundled programs.

use qpl::operational::Configuration;
use qpl::parser::parse_program;
use qpl::qmath::{GateRegistry, DEFAULT_MAX_QUBITS};
use qpl::verify::{Params, Verifier};

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("programs");
    let mut programs = Vec::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let src = std::fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        programs.push((name, Configuration::from_program(&parse_program(&src).unwrap())));
    }
    programs.sort_by(|a, b| a.0.cmp(&b.0));

    let v = Verifier::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS, Params { max_steps: 400, ..Params::default() });
    for report in v.verify_all(&programs) {
        let checks: Vec<String> = report.checks.iter().map(|r| format!("{}={}", r.name, r.status)).collect();
        println!("{:<18} {:<5} {}", report.program, report.status, checks.join(" "));
    }
}
