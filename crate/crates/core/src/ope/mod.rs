//! Free-field Wick calculus for the βγ system and Cartan bosons with vertex
//! operators: currents, screening currents, the energy-momentum tensor and
//! confluent primary fields.

pub mod currents;
pub mod field;
pub mod primary;
pub mod wick;

pub use field::{Field, Gen, Vertex};
pub use wick::{factorial_big, normal_product, ope, OpeError, OpeResult};
