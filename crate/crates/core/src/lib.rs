//! Free-field construction of confluent primary fields in WZNW conformal
//! field theory: truncated current algebras and their confluent Verma
//! modules, the differential realization on jet polynomials, exact Wick
//! calculus for the βγ–boson system, and correlators of screening currents
//! with confluent primary fields, both exact and as numeric confluent
//! hypergeometric integrals.
//!
//! All symbolic computations are exact over the rationals with the weight
//! components, the level and the boson normalization carried as formal
//! parameters. Values are immutable and every operation is a pure function,
//! so the types can be shared freely across threads.

pub mod algebra;
pub mod correlators;
pub mod diffreal;
pub mod ope;
pub mod verma;
