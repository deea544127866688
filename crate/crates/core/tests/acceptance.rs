//! The eleven acceptance criteria.  Each test prints one PASS/FAIL line to
//! stderr (uncaptured) before asserting.

mod common;

use std::collections::{BTreeSet, VecDeque};
use std::io::Write;
use std::time::{Duration, Instant};

use qpl::ast::{Term, Type};
use qpl::operational::{Configuration, Machine};
use qpl::parser::parse_program;
use qpl::qmath::{ghz_state, GateRegistry, DEFAULT_MAX_QUBITS};
use qpl::verify::{
    causality_error, comonoid_errors, copyability_error, sample_values, Params, Status, Verifier,
};

use common::{corpus, load, programs_dir};

fn report(n: u32, ok: bool, detail: String) {
    let line = format!("criterion {n:02} {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn verifier(params: Params) -> Verifier {
    Verifier::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS, params)
}

fn ordinary_corpus() -> Vec<(String, Configuration)> {
    corpus().into_iter().filter(|(_, c)| c.is_ordinary()).collect()
}

fn kind(t: &Term) -> &'static str {
    match t {
        Term::NewUnit { .. } => "new unit",
        Term::Discard { .. } => "discard",
        Term::Copy { .. } => "copy",
        Term::NewQbit { .. } => "new qbit",
        Term::Measure { .. } => "measure",
        Term::Unitary { .. } => "unitary",
        Term::Seq(..) => "seq",
        Term::Skip => "skip",
        Term::While { .. } => "while",
        Term::Left { .. } => "left",
        Term::Right { .. } => "right",
        Term::Case { .. } => "case",
        Term::Pair { .. } => "pair",
        Term::Unpair { .. } => "unpair",
        Term::Fold { .. } => "fold",
        Term::Unfold { .. } => "unfold",
        Term::ProcDef(_) => "proc",
        Term::Call { .. } => "call",
        Term::Zero { .. } => "zero",
    }
}

fn collect_kinds(t: &Term, out: &mut BTreeSet<&'static str>) {
    out.insert(kind(t));
    match t {
        Term::Seq(a, b) => {
            collect_kinds(a, out);
            collect_kinds(b, out);
        }
        Term::While { body, .. } => collect_kinds(body, out),
        Term::Case { left_body, right_body, .. } => {
            collect_kinds(left_body, out);
            collect_kinds(right_body, out);
        }
        Term::ProcDef(d) => collect_kinds(&d.body, out),
        _ => {}
    }
}

#[test]
fn criterion_01_coin_toss_enumeration() {
    let path = programs_dir().join("cointoss.qpl");
    let start = Instant::now();
    let out = qpl::cli::main_with_args([
        "qpl",
        "enumerate",
        path.to_str().unwrap(),
        "--max-steps",
        "247",
        "--format",
        "json",
    ]);
    let elapsed = start.elapsed();
    assert_eq!(out.code, 0, "{}", out.stderr);
    let j: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let traces: Vec<f64> = j["leaves"].as_array().unwrap().iter().map(|l| l["trace"].as_f64().unwrap()).collect();
    let err = (1..=20)
        .map(|i| traces.get(i - 1).map_or(f64::INFINITY, |t| (t - 0.5f64.powi(i as i32)).abs()))
        .fold(0.0, f64::max);
    let halt = j["halt_lower_bound"].as_f64().unwrap();
    let ok = traces.len() >= 20 && err <= 1e-12 && halt >= 1.0 - 2f64.powi(-20) && elapsed < Duration::from_secs(5);
    report(
        1,
        ok,
        format!("leaves={} max_err={err:e} halt={halt:.16e} time={:.3}s", traces.len(), elapsed.as_secs_f64()),
    );
    assert!(ok);
}

#[test]
fn criterion_02_ghz() {
    let start = Instant::now();
    let src = std::fs::read_to_string(programs_dir().join("ghz.qpl")).unwrap();
    let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);
    let mut worst = 0f64;
    let mut leaves = Vec::new();
    for n in 1..=5 {
        let nat = format!("{}zero{}", "s(".repeat(n), ")".repeat(n));
        let prog = src.replace("n = s(s(s(zero)));", &format!("n = {nat};"));
        let c = Configuration::from_program(&parse_program(&prog).unwrap());
        let e = machine.enumerate(&c, 10_000).unwrap();
        leaves.push(e.leaves.len());
        if e.leaves.len() != 1 || !e.frontier.is_empty() {
            worst = f64::INFINITY;
            continue;
        }
        worst = worst.max(e.leaves[0].config.rho.max_abs_diff(&ghz_state(n).unwrap()));
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-12 && elapsed < Duration::from_secs(10);
    report(2, ok, format!("n=1..5 leaves={leaves:?} max_err={worst:e} time={:.3}s", elapsed.as_secs_f64()));
    assert!(ok);
}

#[test]
fn criterion_03_progress() {
    let v = verifier(Params::default());
    let programs = corpus();
    let mut kinds = BTreeSet::new();
    let (mut worst, mut nodes, mut failures) = (0f64, 0f64, Vec::new());
    for (name, c) in &programs {
        let (r, _) = v.check_progress(c);
        worst = worst.max(r.max_error);
        nodes += r.metrics["nodes"];
        if r.status == Status::Fail {
            failures.push(format!("{name}: {}", r.note));
        }
        // Constructors reached at run time, including the `0` of a spent call.
        let mut queue = VecDeque::from([c.clone()]);
        let mut seen = 0;
        while let Some(cfg) = queue.pop_front() {
            collect_kinds(&cfg.term, &mut kinds);
            for d in &cfg.store {
                collect_kinds(&d.body, &mut kinds);
            }
            seen += 1;
            if cfg.is_terminal() || seen > 2000 {
                continue;
            }
            queue.extend(v.machine.step(&cfg).unwrap());
        }
    }
    let all = [
        "new unit", "discard", "copy", "new qbit", "measure", "unitary", "seq", "skip", "while", "left", "right",
        "case", "pair", "unpair", "fold", "unfold", "proc", "call", "zero",
    ];
    let missing: Vec<_> = all.iter().filter(|k| !kinds.contains(*k)).collect();
    let ok = programs.len() >= 10 && missing.is_empty() && worst <= 1e-12 && failures.is_empty();
    report(
        3,
        ok,
        format!("programs={} nodes={nodes} max_err={worst:e} missing={missing:?} {failures:?}", programs.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_04_subject_reduction() {
    let v = verifier(Params::default());
    let (mut steps, mut violations) = (0f64, 0f64);
    for (_, c) in corpus() {
        let (_, r) = v.check_progress(&c);
        steps += r.metrics["steps"];
        violations += r.metrics["violations"];
    }
    let ok = steps > 0.0 && violations == 0.0;
    report(4, ok, format!("steps={steps} violations={violations}"));
    assert!(ok);
}

#[test]
fn criterion_05_soundness() {
    let v = verifier(Params::default());
    let (mut checked, mut worst, mut bad) = (0f64, 0f64, Vec::new());
    for (name, c) in corpus() {
        let r = v.soundness_sweep(&c);
        checked += r.metrics["checked"];
        worst = worst.max(r.max_error);
        if r.status == Status::Fail {
            bad.push(format!("{name}: {}", r.note));
        }
    }
    let ok = checked > 0.0 && worst <= 1e-9 && bad.is_empty();
    report(5, ok, format!("configurations={checked} max_err={worst:e} {bad:?}"));
    assert!(ok);
}

#[test]
fn criterion_06_big_step() {
    let v = verifier(Params { max_steps: 200, ..Params::default() });
    let b = v.big_step(&load("cointoss.qpl")).unwrap();
    let err = b.denotation.state.max_abs_diff(&b.last());
    let monotone = b.min_increment_eig >= -1e-12;
    let tt = v.big_step(&load("ttloop.qpl")).unwrap();
    let diverges = tt.denotation.state.trace() == 0.0 && tt.partial.is_empty();
    let bound = 2f64.powi(-20) + 1e-9;
    let ok = err <= bound && monotone && diverges;
    report(
        6,
        ok,
        format!(
            "|D-S_200|={err:e} bound={bound:e} frontier={:e} monotone={monotone} ttloop_zero={diverges}",
            b.frontier_mass
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_07_adequacy() {
    let v = verifier(Params { tol: 1e-6, ..Params::default() });
    let (mut worst, mut terminal, mut bad) = (0f64, 0f64, Vec::new());
    for (name, c) in corpus() {
        let r = v.check_adequacy(&c);
        worst = worst.max(r.max_error - r.metrics["frontier_mass"]);
        terminal = terminal.max(r.metrics["terminal_mass_error"]);
        if r.status == Status::Fail {
            bad.push(format!("{name}: {}", r.note));
        }
    }
    let tt = v.big_step(&load("ttloop.qpl")).unwrap();
    let divergent = tt.denotation.state.trace() == 0.0 && tt.halt_lower_bound == 0.0;
    let ok = worst <= 1e-6 && terminal <= 1e-12 && bad.is_empty() && divergent;
    report(7, ok, format!("max_err={worst:e} terminal_mass={terminal:e} ttloop_exact={divergent} {bad:?}"));
    assert!(ok);
}

#[test]
fn criterion_08_causality_copyability() {
    let k = 8;
    let quantum = [
        Type::tensor(Type::Qbit, Type::bit()),
        Type::list_q(),
        Type::sum(Type::Qbit, Type::Unit),
        Type::tensor(Type::nat(), Type::list_q()),
    ];
    let classical = [Type::bit(), Type::nat(), Type::list(Type::bit()), Type::tensor(Type::bit(), Type::nat())];
    let (mut causal, mut copied, mut worst) = (0, 0, 0f64);
    for (i, t) in quantum.iter().chain(&classical).enumerate() {
        for v in sample_values(t, 5, 20, i as u64) {
            worst = worst.max(causality_error(&v, k).unwrap());
            causal += 1;
        }
    }
    for (i, t) in classical.iter().enumerate() {
        for v in sample_values(t, 5, 20, 100 + i as u64) {
            worst = worst.max(copyability_error(&v, k).unwrap());
            copied += 1;
        }
    }
    let ok = causal >= 50 && copied >= 50 && worst <= 1e-12;
    report(8, ok, format!("causality={causal} copyability={copied} max_err={worst:e}"));
    assert!(ok);
}

#[test]
fn criterion_09_comonoid() {
    let cases = [
        (Type::Unit, 8),
        (Type::bit(), 8),
        (Type::tensor(Type::bit(), Type::bit()), 8),
        (Type::nat(), 6),
        (Type::list(Type::bit()), 4),
    ];
    let mut worst = 0f64;
    let mut detail = Vec::new();
    for (t, k) in &cases {
        let e = comonoid_errors(t, *k).unwrap().max();
        detail.push(format!("{t}@{k}={e:e}"));
        worst = worst.max(e);
    }
    let ok = worst <= 1e-12;
    report(9, ok, detail.join(" "));
    assert!(ok);
}

#[test]
fn criterion_10_finitary() {
    let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);
    let mut finitary = Vec::new();
    for (name, c) in corpus().into_iter().filter(|(_, c)| c.is_finitary() && !c.is_ordinary()) {
        let e = machine.enumerate(&c, 10_000).unwrap();
        finitary.push((name, e.frontier_mass));
    }
    let v = verifier(Params { tol: 1e-6, ..Params::default() });
    let (mut worst, mut chain, mut bad) = (0f64, f64::INFINITY, Vec::new());
    for (name, c) in ordinary_corpus() {
        let r = v.check_approximation(&c);
        worst = worst.max(r.max_error);
        chain = chain.min(r.metrics["min_chain_eig"]);
        if r.status != Status::Pass {
            bad.push(format!("{name}: {}", r.note));
        }
    }
    let normalises = !finitary.is_empty() && finitary.iter().all(|(_, m)| *m == 0.0);
    let ok = normalises && worst <= 1e-6 && chain >= -1e-10 && bad.is_empty();
    report(10, ok, format!("finitary={finitary:?} max_err={worst:e} min_chain_eig={chain:e} {bad:?}"));
    assert!(ok);
}

#[test]
fn criterion_11_validity() {
    let v = verifier(Params::default());
    let (mut maps, mut min_choi, mut max_dual, mut bad) = (0f64, f64::INFINITY, f64::NEG_INFINITY, Vec::new());
    for (name, c) in corpus() {
        let r = v.check_validity(&c);
        maps += r.metrics["maps"];
        min_choi = min_choi.min(r.metrics["min_choi_eig"]);
        max_dual = max_dual.max(r.metrics["max_dual_unit_eig"]);
        if r.status == Status::Fail {
            bad.push(format!("{name}: {}", r.note));
        }
    }
    let ok = maps > 0.0 && min_choi >= -1e-9 && max_dual <= 1.0 + 1e-9 && bad.is_empty();
    report(11, ok, format!("maps={maps} min_choi_eig={min_choi:e} max_dual_unit_eig={max_dual:e} {bad:?}"));
    assert!(ok);
}
