//! Invariants over generated programs, values and states.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use qpl::ast::{type_of_value, Type, VarContext};
use qpl::denotational::space::{flat_index, split_index};
use qpl::denotational::{denote_type, validate, BlockSpace, Denoter, ProcEnv, Superoperator};
use qpl::operational::{Configuration, Machine};
use qpl::parser::pretty::pretty_print;
use qpl::parser::{parse_program, parse_term, parse_value};
use qpl::qmath::{
    apply_unitary, c, gate, partial_trace, project_measure, CMatrix, DensityMatrix, GateRegistry,
    DEFAULT_MAX_QUBITS,
};
use qpl::verify::{causality_error, sample_values, Params, Status, Verifier};

const ONE_QUBIT: [&str; 7] = ["I", "X", "Y", "Z", "H", "S", "T"];
const TWO_QUBIT: [&str; 3] = ["CNOT", "CZ", "SWAP"];

/// Straight-line source built from `(op, a, b)` triples; ops that do not
/// apply to the current live variables are skipped.
fn circuit_source(ops: &[(u8, usize, usize)]) -> String {
    let (mut qubits, mut bits): (Vec<String>, Vec<String>) = (Vec::new(), Vec::new());
    let mut fresh = 0;
    let mut name = |p: &str| {
        fresh += 1;
        format!("{p}{fresh}")
    };
    let mut lines = Vec::new();
    for &(op, a, b) in ops {
        match op % 7 {
            0 if qubits.len() < 4 => {
                let q = name("q");
                lines.push(format!("new qbit {q}"));
                qubits.push(q);
            }
            1 if !qubits.is_empty() => {
                lines.push(format!("{} *= {}", qubits[a % qubits.len()], ONE_QUBIT[b % ONE_QUBIT.len()]));
            }
            2 if qubits.len() >= 2 => {
                let i = a % qubits.len();
                let j = (i + 1 + b % (qubits.len() - 1)) % qubits.len();
                lines.push(format!("{}, {} *= {}", qubits[i], qubits[j], TWO_QUBIT[(a + b) % 3]));
            }
            3 if !qubits.is_empty() => {
                let q = qubits.remove(a % qubits.len());
                let m = name("m");
                lines.push(format!("{m} = measure {q}"));
                bits.push(m);
            }
            4 if !bits.is_empty() && !qubits.is_empty() => {
                let m = bits.remove(a % bits.len());
                lines.push(format!("if {m} then {{ {} *= X }}", qubits[b % qubits.len()]));
            }
            5 if !bits.is_empty() => {
                lines.push(format!("discard {}", bits.remove(a % bits.len())));
            }
            6 if !bits.is_empty() => {
                let m = name("m");
                lines.push(format!("{m} = copy {}", bits[a % bits.len()]));
                bits.push(m);
            }
            _ => {}
        }
    }
    if lines.is_empty() {
        "skip".into()
    } else {
        lines.join(";\n")
    }
}

fn circuit() -> impl Strategy<Value = String> {
    prop::collection::vec((0u8..7, 0usize..8, 0usize..8), 1..14).prop_map(|ops| circuit_source(&ops))
}

fn density(n: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let d = 1 << n;
    let a = CMatrix::from_fn(d, d, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        c(re + (i == j) as u8 as f64 * 0.1, im)
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix(m.map(|z| z / tr)).unwrap()
}

fn state() -> impl Strategy<Value = DensityMatrix> {
    (1usize..=3, prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)).prop_map(|(n, e)| density(n, &e))
}

fn value_types() -> Vec<Type> {
    vec![
        Type::Unit,
        Type::bit(),
        Type::Qbit,
        Type::nat(),
        Type::list_q(),
        Type::list(Type::bit()),
        Type::tensor(Type::Qbit, Type::sum(Type::bit(), Type::Qbit)),
        Type::list(Type::tensor(Type::nat(), Type::Qbit)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn values_print_and_parse_back(ti in 0usize..8, seed in any::<u64>()) {
        let t = &value_types()[ti];
        for v in sample_values(t, 4, 4, seed) {
            prop_assert_eq!(parse_value(&v.to_string()).unwrap(), v.clone());
            let (qs, ty) = type_of_value(&v).unwrap();
            prop_assert!(ty.alpha_eq(t), "{} : {} vs {}", v, ty, t);
            if t.is_classical() {
                prop_assert!(qs.is_empty());
            }
            prop_assert!(causality_error(&v, 4).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn unitaries_preserve_trace_and_positivity(rho in state(), g in 0usize..10, a in 0usize..3, b in 0usize..3) {
        let n = rho.n_qubits();
        let name = ONE_QUBIT.iter().chain(&TWO_QUBIT).nth(g).unwrap();
        let s = gate(name).unwrap();
        prop_assume!(s.arity <= n);
        let first = a % n + 1;
        let targets = if s.arity == 1 { vec![first] } else { vec![first, (first + b % (n - 1)) % n + 1] };
        let out = apply_unitary(&rho, &s, &targets).unwrap();
        prop_assert!((out.trace() - rho.trace()).abs() <= 1e-12);
        prop_assert!(out.validate(1e-10).is_ok());
    }

    #[test]
    fn measurement_splits_the_trace(rho in state(), m in 0usize..3) {
        let m = m % rho.n_qubits() + 1;
        let parts: Vec<f64> = (0..2).map(|i| project_measure(&rho, m, i).unwrap().trace()).collect();
        prop_assert!(parts.iter().all(|p| *p >= -1e-12));
        prop_assert!((parts[0] + parts[1] - rho.trace()).abs() <= 1e-12);
    }

    #[test]
    fn local_gates_commute_with_tracing_elsewhere(rho in state(), g in 0usize..7, t in 0usize..3, m in 0usize..3) {
        let n = rho.n_qubits();
        prop_assume!(n >= 2);
        let (t, m) = (t % n + 1, m % n + 1);
        prop_assume!(t != m);
        let s = gate(ONE_QUBIT[g]).unwrap();
        let traced = BTreeSet::from([m]);
        let lhs = partial_trace(&apply_unitary(&rho, &s, &[t]).unwrap(), &traced).unwrap();
        let shifted = if t > m { t - 1 } else { t };
        let rhs = apply_unitary(&partial_trace(&rho, &traced).unwrap(), &s, &[shifted]).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn flat_index_round_trips(dims in prop::collection::vec(1usize..5, 1..5), seed in any::<usize>()) {
        let spaces: Vec<BlockSpace> = dims.iter().map(|&d| BlockSpace::new(vec![1; d])).collect();
        let refs: Vec<&BlockSpace> = spaces.iter().collect();
        let total: usize = dims.iter().product();
        let flat = seed % total;
        let key = split_index(flat, &refs);
        prop_assert!(key.iter().zip(&dims).all(|(k, d)| k < d));
        prop_assert_eq!(flat_index(&key, &refs), flat);
    }

    #[test]
    fn convex_sums_of_channels_are_valid(
        seqs in prop::collection::vec(prop::collection::vec(0usize..7, 1..5), 1..4),
        weights in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let den = Denoter::new(GateRegistry::builtin(), 2, 4);
        let gamma = VarContext::from([("q".to_string(), Type::Qbit)]);
        let total: f64 = weights.iter().take(seqs.len()).sum::<f64>() + 1e-3;
        let space = BlockSpace::qbit();
        let mut sum = Superoperator::zero(&space, &space);
        for (seq, w) in seqs.iter().zip(&weights) {
            let src: Vec<String> = seq.iter().map(|g| format!("q *= {}", ONE_QUBIT[*g])).collect();
            let t = parse_term(&src.join("; ")).unwrap();
            let map = den.denote_term(&t, &ProcEnv::default(), &gamma).unwrap().map;
            prop_assert!(validate(&map, 1e-10).cp);
            sum = sum.add(&map.scale(w / total));
        }
        let v = validate(&sum, 1e-10);
        prop_assert!(v.cp && v.trace_nonincreasing);
    }

    #[test]
    fn halting_bound_grows_with_the_horizon(n in 0usize..120, extra in 0usize..120) {
        let c = common::load("cointoss.qpl");
        let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);
        let a = machine.enumerate(&c, n).unwrap();
        let b = machine.enumerate(&c, n + extra).unwrap();
        prop_assert!(a.halt_lower_bound <= b.halt_lower_bound);
        prop_assert!((a.halt_lower_bound + a.frontier_mass - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn kleene_iterates_form_a_chain(n in 0usize..24) {
        let c = common::load("cointoss.qpl");
        let lo = Denoter::new(GateRegistry::builtin(), 8, n).denote_config(&c).unwrap();
        let hi = Denoter::new(GateRegistry::builtin(), 8, n + 1).denote_config(&c).unwrap();
        prop_assert!(hi.state.sub(&lo.state).min_eigenvalue() >= -1e-12);
        prop_assert!(hi.state.trace() <= 1.0 + 1e-12);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>()) {
        let c = common::load("teleport.qpl");
        let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);
        let a = machine.sample(&c, seed).unwrap();
        prop_assert_eq!(&a, &machine.sample(&c, seed).unwrap());
        prop_assert!(a.probability > 0.0 && a.probability <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn core_terms_print_and_parse_back(src in circuit()) {
        let t = parse_term(&src).unwrap();
        prop_assert_eq!(parse_term(&pretty_print(&t)).unwrap(), t);
    }

    #[test]
    fn circuits_satisfy_every_check(src in circuit()) {
        let c = Configuration::from_program(&parse_program(&src).unwrap());
        let machine = Machine::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS);
        let e = machine.enumerate(&c, 10_000).unwrap();
        prop_assert!(e.frontier.is_empty());
        prop_assert!((e.halt_lower_bound - 1.0).abs() <= 1e-12);
        let v = Verifier::new(GateRegistry::builtin(), DEFAULT_MAX_QUBITS, Params { k: 2, ..Params::default() });
        let report = v.verify("circuit", &c);
        for r in &report.checks {
            prop_assert_eq!(r.status, Status::Pass, "{}: {} in\n{}", r.name, r.note, src);
        }
    }

    #[test]
    fn circuit_denotations_have_unit_mass(src in circuit()) {
        let c = Configuration::from_program(&parse_program(&src).unwrap());
        let d = Denoter::new(GateRegistry::builtin(), 2, 4).denote_config(&c).unwrap();
        prop_assert!((d.state.trace() - 1.0).abs() <= 1e-12);
        let dims: usize = d.context.values().map(|t| denote_type(t, 2).state_dim()).product();
        prop_assert_eq!(d.state.space.state_dim(), dims);
    }
}
