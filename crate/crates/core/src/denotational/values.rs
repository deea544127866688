//! Values as state transformers `⟦Q⟧ → ⟦A⟧`.

use super::space::{denote_type, mu_chain, BlockSpace};
use super::superop::{BlockState, Superoperator};
use super::DenoteError;
use crate::ast::{type_of_value, Type, Value};
use crate::qmath::permute_factors;

/// Block of `⟦A⟧_k` in which `⟦v⟧` lands, with the type `A` of `v`.
pub fn value_block(v: &Value, k: usize) -> Result<(usize, Type), DenoteError> {
    Ok(match v {
        Value::Star => (0, Type::Unit),
        Value::Qubit(_) => (0, Type::Qbit),
        Value::Left { left, right, v: inner } => {
            let (i, _) = value_block(inner, k)?;
            (i, Type::sum(left.clone(), right.clone()))
        }
        Value::Right { left, right, v: inner } => {
            let (i, _) = value_block(inner, k)?;
            (denote_type(left, k).len() + i, Type::sum(left.clone(), right.clone()))
        }
        Value::Pair(a, b) => {
            let (i, ta) = value_block(a, k)?;
            let (j, tb) = value_block(b, k)?;
            (i * denote_type(&tb, k).len() + j, Type::tensor(ta, tb))
        }
        Value::Fold { ty, v: inner } => {
            let (i, _) = value_block(inner, k)?;
            let pre = mu_chain(ty, k).preimage(i).ok_or_else(|| DenoteError::TruncationOverflow {
                value: v.to_string(),
                depth: k,
            })?;
            (pre, ty.clone())
        }
    })
}

/// Permutation taking the qubits of `v` from ascending pointer order to
/// their order of occurrence in `v`.
pub fn occurrence_order(v: &Value) -> Vec<usize> {
    let qs = v.qubits();
    let mut sorted = qs.clone();
    sorted.sort_unstable();
    qs.iter().map(|q| sorted.binary_search(q).expect("pointer present")).collect()
}

/// `⟦Q ⊢ v : A⟧ : [2^{|Q|}] → ⟦A⟧_k`.
pub fn denote_value(v: &Value, k: usize) -> Result<Superoperator, DenoteError> {
    let (_, ty) = type_of_value(v).map_err(|e| DenoteError::IllFormed(e.to_string()))?;
    let (block, _) = value_block(v, k)?;
    let n = v.qubits().len();
    let domain = BlockSpace::new(vec![1 << n]);
    let codomain = denote_type(&ty, k);
    let order = occurrence_order(v);
    let dims = vec![2; n];
    Superoperator::from_fn(&domain, &codomain, |_, e| {
        Ok(BlockState::single(&codomain, block, permute_factors(e, &dims, &order)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{gate, kron, CMatrix};

    #[test]
    fn star_and_tt() {
        assert_eq!(denote_value(&Value::Star, 3).unwrap(), Superoperator::identity(&BlockSpace::unit()));
        let tt = denote_value(&Value::tt(), 3).unwrap();
        assert_eq!(tt.codomain, BlockSpace::bit());
        let out = tt.apply(&BlockState::scalar(1.0));
        assert_eq!(out.masses(), vec![0.0, 1.0]);
    }

    #[test]
    fn swapped_pair_conjugates_by_swap() {
        let v = Value::pair(Value::Qubit(2), Value::Qubit(1));
        let s = denote_value(&v, 2).unwrap();
        let swap = gate("SWAP").unwrap().matrix;
        let a = CMatrix::from_fn(2, 2, |i, j| crate::qmath::c((i + 2 * j) as f64, i as f64 - j as f64));
        let b = CMatrix::from_fn(2, 2, |i, j| crate::qmath::c(1.0 + (i * j) as f64, 0.5));
        let rho = kron(&a, &b);
        let out = s.apply(&BlockState::single(&BlockSpace::new(vec![4]), 0, rho.clone()));
        let expect = &swap * rho * swap.adjoint();
        assert!(crate::qmath::max_abs_diff(&out.blocks[0], &expect) < 1e-15);
    }

    #[test]
    fn numerals_overflow_past_the_depth() {
        assert_eq!(value_block(&Value::nat(2), 3).unwrap().0, 2);
        assert!(matches!(value_block(&Value::nat(3), 3), Err(DenoteError::TruncationOverflow { .. })));
    }
}
