//! Correlators of screening currents and confluent primary fields: the master
//! function Ψ, the βγ correlator ω by three independent routes, and numeric
//! quadrature of the resulting integral representations.

pub mod omega;
pub mod psi;
pub mod quad;
pub mod value;

pub use omega::{omega_sl2_closed, omega_ward, omega_wick};
pub use psi::{psi_eval, MasterFunctionValue, NumericWeights, PsiError};
pub use quad::{integrate, Cycle, IntegrateError, QuadResult};
pub use value::{CorrelatorValue, PointPair, PointVar, PtPoly};

use crate::algebra::lie::LieAlgebraData;
use crate::algebra::multipoly::MultiPoly;
use crate::diffreal::{compute_p, JetError, Realizer};
use crate::verma::WeightTuple;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorrError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("jet lift failed: {0}")]
    Jet(JetError),
}

/// Polynomial datum of a primary insertion: an f-word over (simple-root
/// index, mode) pairs, or an explicit polynomial.
#[derive(Clone, Debug, PartialEq)]
pub enum PrimaryDatum {
    Word(Vec<(usize, usize)>),
    Poly(MultiPoly),
}

#[derive(Clone, Debug)]
pub struct PrimaryInsertion {
    pub lambda: WeightTuple,
    pub datum: PrimaryDatum,
}

/// A correlator configuration: screenings labelled by simple roots at points
/// t_1..t_m, primaries at z_1..z_n. Point labels are positional.
#[derive(Clone, Debug)]
pub struct InsertionConfig {
    pub alg: LieAlgebraData,
    /// Simple-root index (1-based) of each screening insertion.
    pub screenings: Vec<usize>,
    pub primaries: Vec<PrimaryInsertion>,
}

impl InsertionConfig {
    pub fn validate(&self) -> Result<(), CorrError> {
        for &s in &self.screenings {
            if s == 0 || s > self.alg.rank {
                return Err(CorrError::Invalid(format!(
                    "screening root index {s} out of range 1..={}",
                    self.alg.rank
                )));
            }
        }
        for (a, p) in self.primaries.iter().enumerate() {
            if p.lambda.rank != self.alg.rank {
                return Err(CorrError::Invalid(format!(
                    "primary {} weight tuple rank {} does not match algebra rank {}",
                    a + 1,
                    p.lambda.rank,
                    self.alg.rank
                )));
            }
            if let PrimaryDatum::Word(w) = &p.datum {
                for &(simple, mode) in w {
                    if simple == 0 || simple > self.alg.rank {
                        return Err(CorrError::Invalid(format!(
                            "primary {} word root index {simple} out of range",
                            a + 1
                        )));
                    }
                    if mode > p.lambda.order {
                        return Err(CorrError::Invalid(format!(
                            "primary {} word mode {mode} exceeds its order {}",
                            a + 1,
                            p.lambda.order
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The polynomial P_a of every primary insertion: an explicit polynomial
    /// as given, or the f-word realized through the differential operators.
    pub fn primary_polys(&self) -> Result<Vec<MultiPoly>, CorrError> {
        let mut out = Vec::new();
        for p in &self.primaries {
            match &p.datum {
                PrimaryDatum::Poly(poly) => out.push(poly.clone()),
                PrimaryDatum::Word(w) => {
                    let rz = Realizer::new(&self.alg, p.lambda.order);
                    let word: Vec<(usize, usize)> = w
                        .iter()
                        .map(|&(simple, mode)| (self.alg.simple_root_index(simple), mode))
                        .collect();
                    out.push(compute_p(&rz, &word, &p.lambda));
                }
            }
        }
        Ok(out)
    }
}
