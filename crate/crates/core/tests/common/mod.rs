#![allow(dead_code)]

use std::path::PathBuf;

use qpl::operational::Configuration;
use qpl::parser::parse_program;

pub fn programs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("programs")
}

pub fn load(name: &str) -> Configuration {
    let src = std::fs::read_to_string(programs_dir().join(name)).unwrap();
    Configuration::from_program(&parse_program(&src).unwrap())
}

/// Every `.qpl` file of the corpus, sorted by name.
pub fn corpus() -> Vec<(String, Configuration)> {
    let mut names: Vec<String> = std::fs::read_dir(programs_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".qpl"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), load(&n))).collect()
}
