//! Exact arithmetic, polynomial rings and simple Lie algebra data.

pub mod lie;
pub mod multipoly;
pub mod scalar;

pub use lie::{AlgebraError, BasisElt, LieAlgebraData, Root, TruncatedElement};
pub use multipoly::{MultiPoly, XMono, XVar};
pub use scalar::{EvalError, Param, ParamPoly, Scalar};
