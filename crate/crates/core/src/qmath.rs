//! Dense complex linear algebra: density matrices, gates, unitary embedding,
//! measurement projection and partial trace.
//!
//! Qubit 1 is the most significant tensor factor; a fresh qubit is appended
//! as the least significant one.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const DEFAULT_MAX_QUBITS: usize = 12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QMathError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("capacity exceeded: {requested} qubits requested, limit is {limit}")]
    CapacityExceeded { requested: usize, limit: usize },
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit {0} targeted twice")]
    DuplicateTarget(usize),
    #[error("gate `{gate}` has arity {arity} but was given {given} targets")]
    ArityMismatch { gate: String, arity: usize, given: usize },
    #[error("gate `{gate}` is not unitary (max |U†U - I| = {error:e})")]
    NotUnitary { gate: String, error: f64 },
    #[error("invalid gate registry: {0}")]
    InvalidRegistry(String),
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus of `a - b`; infinite on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Real eigenvalues of a Hermitian matrix (the Hermitian part is used).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Digits of `idx` in the mixed radix `dims` (first factor most significant).
fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, d) in out.iter_mut().zip(dims).rev() {
        *slot = idx % d;
        idx /= d;
    }
}

fn undigits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (x, d)| acc * d + x)
}

/// Index map for reordering tensor factors: new factor `j` is old factor `order[j]`.
pub fn factor_permutation(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let mut old = vec![0; dims.len()];
    let mut new = vec![0; dims.len()];
    (0..total)
        .map(|i| {
            digits(i, dims, &mut old);
            for (j, &o) in order.iter().enumerate() {
                new[j] = old[o];
            }
            undigits(&new, &new_dims)
        })
        .collect()
}

/// Reorders the tensor factors of an operator on `⊗ dims`.
pub fn permute_factors(m: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return m.clone();
    }
    let map = factor_permutation(dims, order);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for cidx in 0..n {
        for r in 0..n {
            out[(map[r], map[cidx])] = m[(r, cidx)];
        }
    }
    out
}

/// Traces out factor `which` of an operator on `⊗ dims`.
pub fn trace_factor(m: &CMatrix, dims: &[usize], which: usize) -> CMatrix {
    let d = dims[which];
    let outer: usize = dims[..which].iter().product();
    let inner: usize = dims[which + 1..].iter().product();
    let n = outer * inner;
    let mut out = CMatrix::zeros(n, n);
    for a in 0..outer {
        for b in 0..inner {
            let r = a * inner + b;
            for a2 in 0..outer {
                for b2 in 0..inner {
                    let col = a2 * inner + b2;
                    let mut s = C64::new(0.0, 0.0);
                    for k in 0..d {
                        s += m[((a * d + k) * inner + b, (a2 * d + k) * inner + b2)];
                    }
                    out[(r, col)] = s;
                }
            }
        }
    }
    out
}

/// Compresses factor `which` to the matrix element `⟨i| · |j⟩`.
pub fn factor_element(m: &CMatrix, dims: &[usize], which: usize, i: usize, j: usize) -> CMatrix {
    let d = dims[which];
    let inner: usize = dims[which + 1..].iter().product();
    let outer: usize = dims[..which].iter().product();
    let n = outer * inner;
    CMatrix::from_fn(n, n, |r, col| {
        let (a, b) = (r / inner, r % inner);
        let (a2, b2) = (col / inner, col % inner);
        m[((a * d + i) * inner + b, (a2 * d + j) * inner + b2)]
    })
}

/// Inserts `sigma` as a new tensor factor at position `at` of an operator on `⊗ dims`.
pub fn insert_factor(m: &CMatrix, dims: &[usize], at: usize, sigma: &CMatrix) -> CMatrix {
    let out = kron(m, sigma);
    let mut new_dims = dims.to_vec();
    new_dims.push(sigma.nrows());
    let last = new_dims.len() - 1;
    let mut order: Vec<usize> = (0..last).collect();
    order.insert(at, last);
    permute_factors(&out, &new_dims, &order)
}

/// A named unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub name: String,
    pub arity: usize,
    pub matrix: CMatrix,
}

impl Gate {
    pub fn new(name: &str, arity: usize, matrix: CMatrix) -> Result<Gate, QMathError> {
        let dim = 1usize << arity;
        if matrix.shape() != (dim, dim) {
            return Err(QMathError::InvalidRegistry(format!(
                "gate `{name}` of arity {arity} needs a {dim}x{dim} matrix"
            )));
        }
        let error = max_abs_diff(&(matrix.adjoint() * &matrix), &CMatrix::identity(dim, dim));
        if error > 1e-12 {
            return Err(QMathError::NotUnitary { gate: name.to_string(), error });
        }
        Ok(Gate { name: name.to_string(), arity, matrix })
    }
}

fn builtin(name: &str) -> Option<Gate> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let one = |rows: Vec<Vec<C64>>| {
        let n = rows.len();
        CMatrix::from_fn(n, n, |i, j| rows[i][j])
    };
    let (arity, m) = match name {
        "I" => (1, CMatrix::identity(2, 2)),
        "X" => (1, one(vec![vec![z, o], vec![o, z]])),
        "Y" => (1, one(vec![vec![z, c(0.0, -1.0)], vec![c(0.0, 1.0), z]])),
        "Z" => (1, one(vec![vec![o, z], vec![z, -o]])),
        "H" => (1, one(vec![vec![c(r, 0.0), c(r, 0.0)], vec![c(r, 0.0), c(-r, 0.0)]])),
        "S" => (1, one(vec![vec![o, z], vec![z, c(0.0, 1.0)]])),
        "T" => (1, one(vec![vec![o, z], vec![z, c(r, r)]])),
        "CNOT" => (2, CMatrix::from_fn(4, 4, |i, j| {
            let target = [0, 1, 3, 2][j];
            if i == target { o } else { z }
        })),
        "CZ" => (2, CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![o, o, o, -o]))),
        "SWAP" => (2, CMatrix::from_fn(4, 4, |i, j| {
            let target = [0, 2, 1, 3][j];
            if i == target { o } else { z }
        })),
        _ => return None,
    };
    Some(Gate { name: name.to_string(), arity, matrix: m })
}

pub const BUILTIN_GATES: [&str; 10] = ["I", "X", "Y", "Z", "H", "S", "T", "CNOT", "CZ", "SWAP"];

/// Looks up a builtin gate.
pub fn gate(name: &str) -> Result<Gate, QMathError> {
    builtin(name).ok_or_else(|| QMathError::UnknownGate(name.to_string()))
}

/// Builtin gates plus user gates loaded from a JSON registry.
#[derive(Clone, Debug, Default)]
pub struct GateRegistry {
    custom: BTreeMap<String, Gate>,
}

#[derive(Deserialize)]
struct GateSpec {
    arity: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl GateRegistry {
    pub fn builtin() -> GateRegistry {
        GateRegistry::default()
    }

    /// Parses `{ name: { arity, matrix: [[[re, im], ...], ...] } }`, rejecting
    /// non-unitary matrices and names that shadow builtins.
    pub fn from_json(text: &str) -> Result<GateRegistry, QMathError> {
        let specs: BTreeMap<String, GateSpec> =
            serde_json::from_str(text).map_err(|e| QMathError::InvalidRegistry(e.to_string()))?;
        let mut custom = BTreeMap::new();
        for (name, spec) in specs {
            if builtin(&name).is_some() {
                return Err(QMathError::InvalidRegistry(format!("`{name}` shadows a builtin gate")));
            }
            let n = spec.matrix.len();
            if spec.matrix.iter().any(|row| row.len() != n) {
                return Err(QMathError::InvalidRegistry(format!("`{name}`: matrix is not square")));
            }
            let m = CMatrix::from_fn(n, n, |i, j| c(spec.matrix[i][j][0], spec.matrix[i][j][1]));
            custom.insert(name.clone(), Gate::new(&name, spec.arity, m)?);
        }
        Ok(GateRegistry { custom })
    }

    pub fn get(&self, name: &str) -> Result<Gate, QMathError> {
        match builtin(name) {
            Some(g) => Ok(g),
            None => self
                .custom
                .get(name)
                .cloned()
                .ok_or_else(|| QMathError::UnknownGate(name.to_string())),
        }
    }

    pub fn arity(&self, name: &str) -> Result<usize, QMathError> {
        self.get(name).map(|g| g.arity)
    }

    pub fn names(&self) -> Vec<String> {
        BUILTIN_GATES
            .iter()
            .map(|s| s.to_string())
            .chain(self.custom.keys().cloned())
            .collect()
    }
}

/// An (unnormalised) density matrix on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: CMatrix,
}

impl DensityMatrix {
    /// The 1×1 matrix `[1]` on zero qubits.
    pub fn one() -> DensityMatrix {
        DensityMatrix::scalar(1.0)
    }

    pub fn scalar(x: f64) -> DensityMatrix {
        DensityMatrix { n_qubits: 0, data: CMatrix::from_element(1, 1, c(x, 0.0)) }
    }

    /// Wraps a `2^n × 2^n` matrix.
    pub fn from_matrix(data: CMatrix) -> Result<DensityMatrix, QMathError> {
        let d = data.nrows();
        if d != data.ncols() || !d.is_power_of_two() {
            return Err(QMathError::InvalidRegistry(format!(
                "density matrix must be 2^n square, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(DensityMatrix { n_qubits: d.trailing_zeros() as usize, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    pub fn scale(&self, x: f64) -> DensityMatrix {
        DensityMatrix { n_qubits: self.n_qubits, data: &self.data * c(x, 0.0) }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    /// Hermiticity, positivity and trace bounds at the given tolerance.
    pub fn validate(&self, tol: f64) -> Result<(), String> {
        let herm = max_abs_diff(&self.data, &self.data.adjoint());
        if herm > tol {
            return Err(format!("not Hermitian (deviation {herm:e})"));
        }
        let min = min_eigenvalue(&self.data);
        if min < -1e-10_f64.max(tol) {
            return Err(format!("not positive (min eigenvalue {min:e})"));
        }
        let tr = self.trace();
        if !(-tol..=1.0 + tol).contains(&tr) {
            return Err(format!("trace {tr} outside [0, 1]"));
        }
        Ok(())
    }

    /// Reorders qubits: new qubit `j` (1-based) is old qubit `order[j-1]`.
    pub fn permute_qubits(&self, order: &[usize]) -> DensityMatrix {
        let dims = vec![2; self.n_qubits];
        let zero_based: Vec<usize> = order.iter().map(|q| q - 1).collect();
        DensityMatrix { n_qubits: self.n_qubits, data: permute_factors(&self.data, &dims, &zero_based) }
    }

    fn check_index(&self, m: usize) -> Result<(), QMathError> {
        if m == 0 || m > self.n_qubits {
            Err(QMathError::IndexOutOfRange { index: m, n_qubits: self.n_qubits })
        } else {
            Ok(())
        }
    }
}

/// `ρ ⊗ |0⟩⟨0|`.
pub fn new_qubit(rho: &DensityMatrix, max_qubits: usize) -> Result<DensityMatrix, QMathError> {
    if rho.n_qubits + 1 > max_qubits {
        return Err(QMathError::CapacityExceeded { requested: rho.n_qubits + 1, limit: max_qubits });
    }
    let mut ket0 = CMatrix::zeros(2, 2);
    ket0[(0, 0)] = c(1.0, 0.0);
    Ok(DensityMatrix { n_qubits: rho.n_qubits + 1, data: kron(&rho.data, &ket0) })
}

/// Multiplies `u`, embedded at `targets`, into the rows of `m`.
fn apply_left(m: &CMatrix, n_qubits: usize, u: &CMatrix, targets: &[usize]) -> CMatrix {
    let k = targets.len();
    let dim = m.nrows();
    let positions: Vec<usize> = targets.iter().map(|t| n_qubits - t).collect();
    let mask: usize = positions.iter().map(|p| 1usize << p).sum();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|j| {
            (0..k)
                .filter(|i| j >> (k - 1 - i) & 1 == 1)
                .map(|i| 1usize << positions[i])
                .sum()
        })
        .collect();
    let mut out = CMatrix::zeros(dim, m.ncols());
    let mut buf = vec![C64::new(0.0, 0.0); 1 << k];
    for col in 0..m.ncols() {
        for base in (0..dim).filter(|b| b & mask == 0) {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = m[(base | off, col)];
            }
            for (i, off) in offsets.iter().enumerate() {
                let mut s = C64::new(0.0, 0.0);
                for (j, x) in buf.iter().enumerate() {
                    s += u[(i, j)] * x;
                }
                out[(base | off, col)] = s;
            }
        }
    }
    out
}

/// `S_m⃗(ρ)`: conjugation by `s` acting on `targets` (in gate-argument order).
pub fn apply_unitary(rho: &DensityMatrix, s: &Gate, targets: &[usize]) -> Result<DensityMatrix, QMathError> {
    if targets.len() != s.arity {
        return Err(QMathError::ArityMismatch {
            gate: s.name.clone(),
            arity: s.arity,
            given: targets.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for &t in targets {
        rho.check_index(t)?;
        if !seen.insert(t) {
            return Err(QMathError::DuplicateTarget(t));
        }
    }
    let a = apply_left(&rho.data, rho.n_qubits, &s.matrix, targets);
    let b = apply_left(&a.adjoint(), rho.n_qubits, &s.matrix, targets);
    Ok(DensityMatrix { n_qubits: rho.n_qubits, data: b.adjoint() })
}

/// `_m⟨i| ρ |i⟩_m`, with qubit `m` removed.
pub fn project_measure(rho: &DensityMatrix, m: usize, outcome: usize) -> Result<DensityMatrix, QMathError> {
    rho.check_index(m)?;
    let dims = vec![2; rho.n_qubits];
    Ok(DensityMatrix {
        n_qubits: rho.n_qubits - 1,
        data: factor_element(&rho.data, &dims, m - 1, outcome, outcome),
    })
}

/// Traces out the listed qubits; the rest keep their relative order.
pub fn partial_trace(rho: &DensityMatrix, qubits: &BTreeSet<usize>) -> Result<DensityMatrix, QMathError> {
    for &q in qubits {
        rho.check_index(q)?;
    }
    let mut data = rho.data.clone();
    let mut n = rho.n_qubits;
    for &q in qubits.iter().rev() {
        data = trace_factor(&data, &vec![2; n], q - 1);
        n -= 1;
    }
    Ok(DensityMatrix { n_qubits: n, data })
}

/// `γ_n = (|0…0⟩ + |1…1⟩)(⟨0…0| + ⟨1…1|) / 2`.
pub fn ghz_state(n: usize) -> Result<DensityMatrix, QMathError> {
    if n > DEFAULT_MAX_QUBITS {
        return Err(QMathError::CapacityExceeded { requested: n, limit: DEFAULT_MAX_QUBITS });
    }
    let d = 1usize << n;
    let mut data = CMatrix::zeros(d, d);
    for &i in &[0, d - 1] {
        for &j in &[0, d - 1] {
            data[(i, j)] = c(0.5, 0.0);
        }
    }
    Ok(DensityMatrix { n_qubits: n, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(xs: &[f64]) -> DensityMatrix {
        let v: Vec<C64> = xs.iter().map(|x| c(*x, 0.0)).collect();
        DensityMatrix::from_matrix(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))).unwrap()
    }

    #[test]
    fn hadamard_is_unitary_and_maps_zero_to_plus() {
        let h = gate("H").unwrap();
        let err = max_abs_diff(&(h.matrix.adjoint() * &h.matrix), &CMatrix::identity(2, 2));
        assert!(err < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let ket0 = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let plus = &h.matrix * ket0;
        assert!((plus[0] - c(r, 0.0)).norm() < 1e-15 && (plus[1] - c(r, 0.0)).norm() < 1e-15);
        for z in h.matrix.iter() {
            assert!((z.norm() - r).abs() < 1e-15);
        }
    }

    #[test]
    fn builtins_are_unitary_and_unknown_rejected() {
        for name in BUILTIN_GATES {
            let g = gate(name).unwrap();
            Gate::new(name, g.arity, g.matrix).unwrap();
        }
        assert_eq!(gate("I").unwrap().matrix, CMatrix::identity(2, 2));
        assert_eq!(gate("FOO"), Err(QMathError::UnknownGate("FOO".into())));
    }

    #[test]
    fn new_qubit_tensors_ket_zero() {
        let r = new_qubit(&DensityMatrix::one(), 12).unwrap();
        assert_eq!(r, diag(&[1.0, 0.0]));
        let r = new_qubit(&diag(&[0.5, 0.5]), 12).unwrap();
        assert_eq!(r, diag(&[0.5, 0.0, 0.5, 0.0]));
        let full = (0..3).try_fold(DensityMatrix::one(), |r, _| new_qubit(&r, 3)).unwrap();
        assert!(matches!(new_qubit(&full, 3), Err(QMathError::CapacityExceeded { requested: 4, limit: 3 })));
    }

    #[test]
    fn hadamard_on_ket_zero() {
        let r = apply_unitary(&diag(&[1.0, 0.0]), &gate("H").unwrap(), &[1]).unwrap();
        for z in r.matrix().iter() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn cnot_target_order_matters_on_ket_10() {
        let cnot = gate("CNOT").unwrap();
        let ket00 = diag(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            apply_unitary(&ket00, &cnot, &[1, 2]).unwrap(),
            apply_unitary(&ket00, &cnot, &[2, 1]).unwrap()
        );
        // |10⟩: control qubit 1 flips qubit 2; control qubit 2 leaves it alone.
        let ket10 = diag(&[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(apply_unitary(&ket10, &cnot, &[1, 2]).unwrap(), diag(&[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(apply_unitary(&ket10, &cnot, &[2, 1]).unwrap(), ket10);
    }

    #[test]
    fn unitary_argument_errors() {
        let r = diag(&[1.0, 0.0, 0.0, 0.0]);
        let cnot = gate("CNOT").unwrap();
        assert_eq!(apply_unitary(&r, &cnot, &[1, 1]), Err(QMathError::DuplicateTarget(1)));
        assert!(matches!(apply_unitary(&r, &cnot, &[1, 3]), Err(QMathError::IndexOutOfRange { index: 3, .. })));
    }

    #[test]
    fn measurement_and_partial_trace_examples() {
        let plus = apply_unitary(&diag(&[1.0, 0.0]), &gate("H").unwrap(), &[1]).unwrap();
        let p0 = project_measure(&plus, 1, 0).unwrap();
        assert!((p0.trace() - 0.5).abs() < 1e-15 && p0.n_qubits() == 0);
        assert_eq!(project_measure(&diag(&[1.0, 0.0]), 1, 1).unwrap().trace(), 0.0);

        let g2 = ghz_state(2).unwrap();
        let r = partial_trace(&g2, &BTreeSet::from([2])).unwrap();
        assert!(r.max_abs_diff(&diag(&[0.5, 0.5])) < 1e-15);
        assert_eq!(partial_trace(&g2, &BTreeSet::new()).unwrap(), g2);
        assert!((partial_trace(&g2, &BTreeSet::from([1, 2])).unwrap().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz_reference() {
        let g1 = ghz_state(1).unwrap();
        assert!(g1.matrix().iter().all(|z| *z == c(0.5, 0.0)));
        let g3 = ghz_state(3).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let corner = (i == 0 || i == 7) && (j == 0 || j == 7);
                assert_eq!(g3.matrix()[(i, j)], c(if corner { 0.5 } else { 0.0 }, 0.0));
            }
        }
        for n in 1..=8 {
            assert!((ghz_state(n).unwrap().trace() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn registry_validation() {
        let ok = r#"{"SX": {"arity": 1, "matrix": [[[0.5,0.5],[0.5,-0.5]],[[0.5,-0.5],[0.5,0.5]]]}}"#;
        let reg = GateRegistry::from_json(ok).unwrap();
        assert_eq!(reg.arity("SX").unwrap(), 1);
        let bad = r#"{"BAD": {"arity": 1, "matrix": [[[1,0],[1,0]],[[0,0],[1,0]]]}}"#;
        assert!(matches!(GateRegistry::from_json(bad), Err(QMathError::NotUnitary { .. })));
        let shadow = r#"{"H": {"arity": 1, "matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]}}"#;
        assert!(matches!(GateRegistry::from_json(shadow), Err(QMathError::InvalidRegistry(_))));
    }
}
