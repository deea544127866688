//! Finite-dimensional denotational semantics in the Schrödinger picture.
//!
//! Types become block spaces (`space`), terms become superoperators
//! (`superop`), evaluated through a sparse state evaluator (`eval`).  A
//! μ-type is truncated at depth `k`; folding past the depth drops mass,
//! which is reported as truncation loss.  Loops and recursive procedures
//! take a fixed number of Kleene iterations from the zero map.

pub mod eval;
pub mod space;
pub mod superop;
pub mod values;

use thiserror::Error;

use crate::qmath::QMathError;
use crate::typecheck::TypeError;

pub use eval::{
    copy_map, denote_config, denote_store, denote_term, fold_iso, CtxState, Denoter, ProcEnv, ProcValue,
    StateDenotation, Warning,
};
pub use space::{denote_type, mu_chain, BlockMap, BlockSpace};
pub use superop::{discard_map, validate, BlockState, Superoperator, Validation};
pub use values::{denote_value, value_block};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DenoteError {
    #[error("value {value} is deeper than truncation depth {depth}")]
    TruncationOverflow { value: String, depth: usize },
    #[error("type {0} is not classical")]
    NotClassical(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    QMath(#[from] QMathError),
    #[error("{0}")]
    IllFormed(String),
}
