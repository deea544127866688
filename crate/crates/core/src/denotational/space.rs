//! Finite-dimensional interpretation of types as direct sums of matrix
//! algebras, with μ-types truncated at depth `k`.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::Type;

/// `⊕_i M_{n_i}(ℂ)`, recorded as the list of `n_i`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockSpace {
    pub blocks: Vec<usize>,
}

impl BlockSpace {
    pub fn new(blocks: Vec<usize>) -> BlockSpace {
        BlockSpace { blocks }
    }

    pub fn unit() -> BlockSpace {
        BlockSpace::new(vec![1])
    }

    pub fn qbit() -> BlockSpace {
        BlockSpace::new(vec![2])
    }

    pub fn bit() -> BlockSpace {
        BlockSpace::new(vec![1, 1])
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `Σ n_i²`, the length of a block-vectorised state.
    pub fn state_dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    /// Start of each block in the vectorised state.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|n| {
                let o = acc;
                acc += n * n;
                o
            })
            .collect()
    }

    pub fn sum(&self, other: &BlockSpace) -> BlockSpace {
        let mut blocks = self.blocks.clone();
        blocks.extend(&other.blocks);
        BlockSpace::new(blocks)
    }

    /// Blocks `n_i · m_j`, `i` outer.
    pub fn tensor(&self, other: &BlockSpace) -> BlockSpace {
        BlockSpace::new(self.blocks.iter().flat_map(|n| other.blocks.iter().map(move |m| n * m)).collect())
    }

    pub fn tensor_all<'a>(spaces: impl IntoIterator<Item = &'a BlockSpace>) -> BlockSpace {
        spaces.into_iter().fold(BlockSpace::unit(), |acc, s| acc.tensor(s))
    }

    /// Every block one-dimensional.
    pub fn is_classical(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }
}

impl fmt::Display for BlockSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.blocks)
    }
}

/// Flat block index of a tuple of block indices, lexicographic.
pub fn flat_index(key: &[usize], spaces: &[&BlockSpace]) -> usize {
    key.iter().zip(spaces).fold(0, |acc, (b, s)| acc * s.len() + b)
}

/// Inverse of [`flat_index`].
pub fn split_index(mut flat: usize, spaces: &[&BlockSpace]) -> Vec<usize> {
    let mut key = vec![0; spaces.len()];
    for (i, s) in spaces.iter().enumerate().rev() {
        key[i] = flat % s.len();
        flat /= s.len();
    }
    key
}

/// A block embedding: block `i` of `from` is block `map[i]` of `to`, of the same size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMap {
    pub from: BlockSpace,
    pub to: BlockSpace,
    pub map: Vec<usize>,
}

impl BlockMap {
    pub fn identity(s: &BlockSpace) -> BlockMap {
        BlockMap { from: s.clone(), to: s.clone(), map: (0..s.len()).collect() }
    }

    fn empty() -> BlockMap {
        BlockMap { from: BlockSpace::default(), to: BlockSpace::default(), map: Vec::new() }
    }

    /// Preimage of block `j` of the codomain.
    pub fn preimage(&self, j: usize) -> Option<usize> {
        self.map.iter().position(|&m| m == j)
    }
}

/// The action of a type on block embeddings of its free variables.  With
/// identities everywhere this is just the interpretation of the type.
pub fn type_arrow(a: &Type, env: &BTreeMap<String, BlockMap>, k: usize) -> BlockMap {
    match a {
        Type::Var(x) => env.get(x).cloned().unwrap_or_else(|| panic!("free type variable {x}")),
        Type::Unit => BlockMap::identity(&BlockSpace::unit()),
        Type::Qbit => BlockMap::identity(&BlockSpace::qbit()),
        Type::Sum(l, r) => {
            let (f, g) = (type_arrow(l, env, k), type_arrow(r, env, k));
            let shift = f.to.len();
            BlockMap {
                from: f.from.sum(&g.from),
                to: f.to.sum(&g.to),
                map: f.map.iter().copied().chain(g.map.iter().map(|j| j + shift)).collect(),
            }
        }
        Type::Tensor(l, r) => {
            let (f, g) = (type_arrow(l, env, k), type_arrow(r, env, k));
            let width = g.to.len();
            BlockMap {
                from: f.from.tensor(&g.from),
                to: f.to.tensor(&g.to),
                map: f.map.iter().flat_map(|i| g.map.iter().map(move |j| i * width + j)).collect(),
            }
        }
        Type::Mu(x, body) => {
            let mut cur = BlockMap::empty();
            for _ in 0..k {
                let mut inner = env.clone();
                inner.insert(x.clone(), cur);
                cur = type_arrow(body, &inner, k);
            }
            cur
        }
    }
}

/// `⟦A⟧_k` for a closed type.
pub fn denote_type(a: &Type, k: usize) -> BlockSpace {
    type_arrow(a, &BTreeMap::new(), k).from
}

/// The chain embedding `s_k : T_k ↪ T_{k+1}` of `μX. A`, where
/// `T_0 = 0` and `T_{j+1} = ⟦A⟧(T_j)`.  `T_{k+1}` is also the
/// interpretation of the one-step unfolding `A[μX. A/X]` at depth `k`.
pub fn mu_chain(mu: &Type, k: usize) -> BlockMap {
    let (x, body) = match mu {
        Type::Mu(x, body) => (x, body),
        other => panic!("mu_chain on non-recursive type {other}"),
    };
    let t1 = type_arrow(body, &BTreeMap::from([(x.clone(), BlockMap::empty())]), k).from;
    let mut s = BlockMap { from: BlockSpace::default(), to: t1, map: Vec::new() };
    for _ in 0..k {
        s = type_arrow(body, &BTreeMap::from([(x.clone(), s)]), k);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(denote_type(&Type::nat(), 4).blocks, vec![1, 1, 1, 1]);
        assert_eq!(denote_type(&Type::list_q(), 3).blocks, vec![1, 2, 4]);
        for k in 0..4 {
            assert_eq!(denote_type(&Type::tensor(Type::bit(), Type::Qbit), k).blocks, vec![2, 2]);
        }
        assert!(denote_type(&Type::nat(), 0).is_empty());
    }

    #[test]
    fn chain_embeddings() {
        let s = mu_chain(&Type::nat(), 3);
        assert_eq!(s.from.blocks, vec![1, 1, 1]);
        assert_eq!(s.to.blocks, vec![1, 1, 1, 1]);
        assert_eq!(s.map, vec![0, 1, 2]);
        let s = mu_chain(&Type::list_q(), 2);
        assert_eq!(s.to.blocks, vec![1, 2, 4]);
        assert_eq!(s.map, vec![0, 1]);
        // the unfolded type has the same interpretation as the codomain
        for k in 0..5 {
            for t in [Type::nat(), Type::list_q(), Type::list(Type::bit())] {
                assert_eq!(denote_type(&t.unfold_mu().unwrap(), k), mu_chain(&t, k).to);
                assert_eq!(denote_type(&t, k), mu_chain(&t, k).from);
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let (a, b, c) = (BlockSpace::bit(), BlockSpace::new(vec![1, 2, 4]), BlockSpace::qbit());
        let spaces = [&a, &b, &c];
        for flat in 0..6 {
            assert_eq!(flat_index(&split_index(flat, &spaces), &spaces), flat);
        }
        let t = BlockSpace::tensor_all(spaces);
        assert_eq!(t.blocks, vec![2, 4, 8, 2, 4, 8]);
    }
}
