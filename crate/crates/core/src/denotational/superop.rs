//! Superoperators between block spaces as dense transfer matrices on
//! block-vectorised states (blocks in order, column-major inside a block).

use nalgebra::DVector;

use super::space::{split_index, BlockSpace};
use crate::qmath::{c, hermitian_eigenvalues, kron, permute_factors, CMatrix, C64};

/// A state of `⊕_i M_{n_i}(ℂ)`: one matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    pub space: BlockSpace,
    pub blocks: Vec<CMatrix>,
}

impl BlockState {
    pub fn zero(space: &BlockSpace) -> BlockState {
        BlockState { space: space.clone(), blocks: space.blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect() }
    }

    /// `m` placed in block `b`, zero elsewhere.
    pub fn single(space: &BlockSpace, b: usize, m: CMatrix) -> BlockState {
        let mut s = BlockState::zero(space);
        assert_eq!(m.nrows(), space.blocks[b], "block size mismatch");
        s.blocks[b] = m;
        s
    }

    pub fn scalar(x: f64) -> BlockState {
        BlockState::single(&BlockSpace::unit(), 0, CMatrix::from_element(1, 1, c(x, 0.0)))
    }

    pub fn to_vec(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.space.state_dim());
        let mut o = 0;
        for m in &self.blocks {
            for (i, z) in m.iter().enumerate() {
                v[o + i] = *z;
            }
            o += m.len();
        }
        v
    }

    pub fn from_vec(space: &BlockSpace, v: &DVector<C64>) -> BlockState {
        let mut o = 0;
        let blocks = space
            .blocks
            .iter()
            .map(|&n| {
                let m = CMatrix::from_iterator(n, n, v.iter().skip(o).take(n * n).copied());
                o += n * n;
                m
            })
            .collect();
        BlockState { space: space.clone(), blocks }
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|m| m.trace().re).sum()
    }

    /// Trace of each block.
    pub fn masses(&self) -> Vec<f64> {
        self.blocks.iter().map(|m| m.trace().re).collect()
    }

    pub fn max_abs_diff(&self, other: &BlockState) -> f64 {
        assert_eq!(self.space, other.space, "comparing states on different spaces");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &BlockState) -> BlockState {
        assert_eq!(self.space, other.space);
        BlockState {
            space: self.space.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &BlockState) -> BlockState {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, x: f64) -> BlockState {
        BlockState { space: self.space.clone(), blocks: self.blocks.iter().map(|m| m * c(x, 0.0)).collect() }
    }

    /// Smallest eigenvalue over all blocks, `+∞` for the empty space.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|m| hermitian_eigenvalues(&((m + m.adjoint()) * c(0.5, 0.0))))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A linear map `domain → codomain` given by its transfer matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    pub domain: BlockSpace,
    pub codomain: BlockSpace,
    pub transfer: CMatrix,
}

fn unit_matrix(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = c(1.0, 0.0);
    m
}

impl Superoperator {
    pub fn zero(domain: &BlockSpace, codomain: &BlockSpace) -> Superoperator {
        Superoperator {
            domain: domain.clone(),
            codomain: codomain.clone(),
            transfer: CMatrix::zeros(codomain.state_dim(), domain.state_dim()),
        }
    }

    pub fn identity(space: &BlockSpace) -> Superoperator {
        let d = space.state_dim();
        Superoperator { domain: space.clone(), codomain: space.clone(), transfer: CMatrix::identity(d, d) }
    }

    /// Tabulates `f` on the matrix units `E_ij` of every input block.
    pub fn from_fn<E>(
        domain: &BlockSpace,
        codomain: &BlockSpace,
        mut f: impl FnMut(usize, &CMatrix) -> Result<BlockState, E>,
    ) -> Result<Superoperator, E> {
        let mut s = Superoperator::zero(domain, codomain);
        let offsets = domain.offsets();
        for (b, &n) in domain.blocks.iter().enumerate() {
            for j in 0..n {
                for i in 0..n {
                    let out = f(b, &unit_matrix(n, i, j))?;
                    assert_eq!(&out.space, codomain, "tabulated map left its codomain");
                    s.transfer.set_column(offsets[b] + i + j * n, &out.to_vec());
                }
            }
        }
        Ok(s)
    }

    pub fn apply(&self, s: &BlockState) -> BlockState {
        assert_eq!(s.space, self.domain, "state is not in the domain");
        BlockState::from_vec(&self.codomain, &(&self.transfer * s.to_vec()))
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Superoperator) -> Superoperator {
        assert_eq!(first.codomain, self.domain, "composing mismatched superoperators");
        Superoperator {
            domain: first.domain.clone(),
            codomain: self.codomain.clone(),
            transfer: &self.transfer * &first.transfer,
        }
    }

    pub fn tensor(&self, other: &Superoperator) -> Superoperator {
        let domain = self.domain.tensor(&other.domain);
        let codomain = self.codomain.tensor(&other.codomain);
        let (d1, d2) = (&self.domain, &other.domain);
        let width = other.codomain.len();
        let result: Result<_, ()> = Superoperator::from_fn(&domain, &codomain, |b, e| {
            let key = split_index(b, &[d1, d2]);
            let (n1, n2) = (d1.blocks[key[0]], d2.blocks[key[1]]);
            let (r, col) = nonzero(e);
            let left = self.apply(&BlockState::single(d1, key[0], unit_matrix(n1, r / n2, col / n2)));
            let right = other.apply(&BlockState::single(d2, key[1], unit_matrix(n2, r % n2, col % n2)));
            let mut out = BlockState::zero(&codomain);
            for (p, a) in left.blocks.iter().enumerate() {
                for (q, bm) in right.blocks.iter().enumerate() {
                    out.blocks[p * width + q] = kron(a, bm);
                }
            }
            Ok(out)
        });
        result.expect("infallible")
    }

    /// `a ⊗ b → b ⊗ a`.
    pub fn swap(a: &BlockSpace, b: &BlockSpace) -> Superoperator {
        let domain = a.tensor(b);
        let codomain = b.tensor(a);
        let result: Result<_, ()> = Superoperator::from_fn(&domain, &codomain, |blk, e| {
            let key = split_index(blk, &[a, b]);
            let dims = [a.blocks[key[0]], b.blocks[key[1]]];
            let m = permute_factors(e, &dims, &[1, 0]);
            Ok(BlockState::single(&codomain, key[1] * a.len() + key[0], m))
        });
        result.expect("infallible")
    }

    /// Hilbert-Schmidt adjoint; the Heisenberg-picture counterpart.
    pub fn adjoint(&self) -> Superoperator {
        Superoperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            transfer: self.transfer.adjoint(),
        }
    }

    pub fn add(&self, other: &Superoperator) -> Superoperator {
        assert!(self.domain == other.domain && self.codomain == other.codomain);
        Superoperator { transfer: &self.transfer + &other.transfer, ..self.clone() }
    }

    pub fn scale(&self, x: f64) -> Superoperator {
        Superoperator { transfer: &self.transfer * c(x, 0.0), ..self.clone() }
    }

    pub fn sub(&self, other: &Superoperator) -> Superoperator {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        if self.domain != other.domain || self.codomain != other.codomain {
            return f64::INFINITY;
        }
        (&self.transfer - &other.transfer).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Choi matrix `Σ_ij E_ij ⊗ f(E_ij)_q` of the component from input block
    /// `p` to output block `q`.
    pub fn choi(&self, p: usize, q: usize) -> CMatrix {
        let (n, m) = (self.domain.blocks[p], self.codomain.blocks[q]);
        let (ip, oq) = (self.domain.offsets()[p], self.codomain.offsets()[q]);
        let mut out = CMatrix::zeros(n * m, n * m);
        for i in 0..n {
            for j in 0..n {
                let col = ip + i + j * n;
                for r in 0..m {
                    for s in 0..m {
                        out[(i * m + r, j * m + s)] = self.transfer[(oq + r + s * m, col)];
                    }
                }
            }
        }
        out
    }

    /// `f^†(1)` restricted to input block `p`: entry `(i, j)` is `tr f(E_ji)`.
    pub fn dual_unit(&self, p: usize) -> CMatrix {
        let n = self.domain.blocks[p];
        let ip = self.domain.offsets()[p];
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let col = ip + j + i * n;
                let mut t = c(0.0, 0.0);
                for (q, &m) in self.codomain.blocks.iter().enumerate() {
                    let oq = self.codomain.offsets()[q];
                    for r in 0..m {
                        t += self.transfer[(oq + r + r * m, col)];
                    }
                }
                out[(i, j)] = t;
            }
        }
        out
    }
}

fn nonzero(e: &CMatrix) -> (usize, usize) {
    for j in 0..e.ncols() {
        for i in 0..e.nrows() {
            if e[(i, j)] != c(0.0, 0.0) {
                return (i, j);
            }
        }
    }
    (0, 0)
}

/// Complete positivity and trace non-increase of a superoperator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Validation {
    pub cp: bool,
    pub trace_nonincreasing: bool,
    pub min_choi_eig: f64,
    pub max_dual_unit_eig: f64,
}

pub fn validate(s: &Superoperator, tol: f64) -> Validation {
    let mut min_choi = f64::INFINITY;
    for p in 0..s.domain.len() {
        for q in 0..s.codomain.len() {
            let ch = s.choi(p, q);
            let herm = (&ch + ch.adjoint()) * c(0.5, 0.0);
            for e in hermitian_eigenvalues(&herm) {
                min_choi = min_choi.min(e);
            }
        }
    }
    let mut max_dual = f64::NEG_INFINITY;
    for p in 0..s.domain.len() {
        let d = s.dual_unit(p);
        let herm = (&d + d.adjoint()) * c(0.5, 0.0);
        for e in hermitian_eigenvalues(&herm) {
            max_dual = max_dual.max(e);
        }
    }
    if min_choi == f64::INFINITY {
        min_choi = 0.0;
    }
    if max_dual == f64::NEG_INFINITY {
        max_dual = 0.0;
    }
    Validation {
        cp: min_choi >= -tol,
        trace_nonincreasing: max_dual <= 1.0 + tol,
        min_choi_eig: min_choi,
        max_dual_unit_eig: max_dual,
    }
}

/// `⋄ : A → I`, the total trace.
pub fn discard_map(space: &BlockSpace) -> Superoperator {
    let unit = BlockSpace::unit();
    let result: Result<_, ()> = Superoperator::from_fn(space, &unit, |_, e| Ok(BlockState::scalar(e.trace().re)));
    result.expect("infallible")
}

/// `△ : P → P ⊗ P` on a classical block space: block `i` goes to block `(i, i)`.
pub fn diagonal_copy(space: &BlockSpace) -> Option<Superoperator> {
    if !space.is_classical() {
        return None;
    }
    let out = space.tensor(space);
    let m = space.len();
    let result: Result<_, ()> =
        Superoperator::from_fn(space, &out, |b, e| Ok(BlockState::single(&out, b * m + b, e.clone())));
    Some(result.expect("infallible"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_transpose() {
        let q = BlockSpace::qbit();
        let v = validate(&Superoperator::identity(&q), 1e-9);
        assert!(v.cp && v.trace_nonincreasing);
        let t: Result<_, ()> = Superoperator::from_fn(&q, &q, |_, e| Ok(BlockState::single(&q, 0, e.transpose())));
        let v = validate(&t.unwrap(), 1e-9);
        assert!(!v.cp);
        assert!((v.min_choi_eig + 1.0).abs() < 1e-12);
    }

    #[test]
    fn discard_is_trace() {
        let d = discard_map(&BlockSpace::qbit());
        let rho = BlockState::single(
            &BlockSpace::qbit(),
            0,
            CMatrix::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.5, 0.0)]),
        );
        assert!((d.apply(&rho).trace() - 0.8).abs() < 1e-15);
        assert_eq!(discard_map(&BlockSpace::unit()), Superoperator::identity(&BlockSpace::unit()));
    }

    #[test]
    fn swap_is_an_involution_and_adjoint_reverses() {
        let (a, b) = (BlockSpace::new(vec![1, 2]), BlockSpace::new(vec![2, 1, 1]));
        let s = Superoperator::swap(&a, &b);
        let back = Superoperator::swap(&b, &a).compose(&s);
        assert!(back.max_abs_diff(&Superoperator::identity(&a.tensor(&b))) < 1e-15);
        assert!(s.adjoint().max_abs_diff(&Superoperator::swap(&b, &a)) < 1e-15);
    }

    #[test]
    fn tensor_of_identities() {
        let (a, b) = (BlockSpace::new(vec![1, 2]), BlockSpace::qbit());
        let t = Superoperator::identity(&a).tensor(&Superoperator::identity(&b));
        assert!(t.max_abs_diff(&Superoperator::identity(&a.tensor(&b))) < 1e-15);
    }
}
