//! Normal-ordered free fields: products of jets of β_α, γ^α and the Cartan
//! bosons, optionally multiplied by a vertex exponential
//! exp(Σ_p (μ_p, ∂^p φ)/p!).
//!
//! Boson components are expanded over the fundamental-weight basis:
//! the generator `Phi { idx, der }` stands for (ω_idx, ∂^der φ).

use crate::algebra::lie::LieAlgebraData;
use crate::algebra::multipoly::{MultiPoly, XVar};
use crate::algebra::scalar::Scalar;
use crate::verma::WeightTuple;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Gen {
    /// ∂^der β_root (conformal weight 1).
    Beta { root: u8, der: u32 },
    /// ∂^der γ^root (conformal weight 0).
    Gamma { root: u8, der: u32 },
    /// (ω_idx, ∂^der φ), der >= 1; idx is 1-based.
    Phi { idx: u8, der: u32 },
}

/// Vertex factor exp(Σ_p (μ_p, ∂^p φ)/p!); weights[p][i-1] = μ_p^i.
/// Canonical form trims trailing zero rows; an all-zero vertex is `None`
/// at the `Field` level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Vertex {
    pub weights: Vec<Vec<Scalar>>,
}

impl Vertex {
    pub fn new(mut weights: Vec<Vec<Scalar>>) -> Option<Vertex> {
        while weights
            .last()
            .map(|row| row.iter().all(|c| c.is_zero()))
            .unwrap_or(false)
        {
            weights.pop();
        }
        if weights.is_empty() {
            None
        } else {
            Some(Vertex { weights })
        }
    }

    pub fn from_weight_tuple(lambda: &WeightTuple) -> Option<Vertex> {
        Vertex::new(lambda.comps.clone())
    }

    /// Vertex of a screening current: exp(-(α_i, φ)).
    pub fn screening(alg: &LieAlgebraData, simple: usize) -> Option<Vertex> {
        let comps: Vec<Scalar> = (1..=alg.rank)
            .map(|j| Scalar::from_int(-alg.cartan[j - 1][simple - 1]))
            .collect();
        Vertex::new(vec![comps])
    }

    pub fn rank(&self) -> usize {
        self.weights.first().map(|r| r.len()).unwrap_or(0)
    }

    /// μ_p^i with zero padding beyond the stored rows.
    pub fn comp(&self, p: usize, idx: usize) -> Scalar {
        self.weights
            .get(p)
            .map(|row| row[idx - 1].clone())
            .unwrap_or_else(Scalar::zero)
    }

    pub fn merge(a: Option<&Vertex>, b: Option<&Vertex>) -> Option<Vertex> {
        match (a, b) {
            (None, None) => None,
            (Some(v), None) | (None, Some(v)) => Some(v.clone()),
            (Some(x), Some(y)) => {
                let rank = x.rank().max(y.rank());
                let rows = x.weights.len().max(y.weights.len());
                let comp = |v: &Vertex, p: usize, i: usize| {
                    v.weights
                        .get(p)
                        .and_then(|row| row.get(i))
                        .cloned()
                        .unwrap_or_else(Scalar::zero)
                };
                let weights = (0..rows)
                    .map(|p| (0..rank).map(|i| &comp(x, p, i) + &comp(y, p, i)).collect())
                    .collect();
                Vertex::new(weights)
            }
        }
    }
}

pub type TermKey = (Vec<Gen>, Option<Vertex>);

/// Linear combination of normal-ordered terms, all at one insertion point.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Field {
    pub terms: BTreeMap<TermKey, Scalar>,
}

impl Field {
    pub fn zero() -> Field {
        Field::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn unit() -> Field {
        Field::term(Vec::new(), None, Scalar::one())
    }

    pub fn constant(c: Scalar) -> Field {
        Field::term(Vec::new(), None, c)
    }

    pub fn term(mut gens: Vec<Gen>, vertex: Option<Vertex>, coeff: Scalar) -> Field {
        if coeff.is_zero() {
            return Field::zero();
        }
        gens.sort();
        let mut terms = BTreeMap::new();
        terms.insert((gens, vertex), coeff);
        Field { terms }
    }

    pub fn gen(g: Gen) -> Field {
        Field::term(vec![g], None, Scalar::one())
    }

    pub fn insert(&mut self, key: TermKey, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(acc) => {
                *acc = &*acc + &coeff;
                if acc.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, coeff);
            }
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Field {
        if c.is_zero() {
            return Field::zero();
        }
        Field {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    /// Normal-ordered (same-point) product: merge generator multisets and
    /// vertex factors.
    pub fn mul(&self, other: &Field) -> Field {
        let mut out = Field::zero();
        for ((ga, va), ca) in &self.terms {
            for ((gb, vb), cb) in &other.terms {
                let mut gens = ga.clone();
                gens.extend_from_slice(gb);
                gens.sort();
                let vertex = Vertex::merge(va.as_ref(), vb.as_ref());
                out.insert((gens, vertex), ca * cb);
            }
        }
        out
    }

    /// d/dz of the field: Leibniz over the generators, plus the vertex
    /// insertion Σ_p (μ_p, ∂^{p+1}φ)/p!.
    pub fn derivative(&self) -> Field {
        let mut out = Field::zero();
        for ((gens, vertex), coeff) in &self.terms {
            for (i, g) in gens.iter().enumerate() {
                let mut gens2 = gens.clone();
                gens2[i] = match *g {
                    Gen::Beta { root, der } => Gen::Beta { root, der: der + 1 },
                    Gen::Gamma { root, der } => Gen::Gamma { root, der: der + 1 },
                    Gen::Phi { idx, der } => Gen::Phi { idx, der: der + 1 },
                };
                gens2.sort();
                out.insert((gens2, vertex.clone()), coeff.clone());
            }
            if let Some(v) = vertex {
                let mut fact = BigRational::from_integer(1.into());
                for (p, row) in v.weights.iter().enumerate() {
                    if p > 0 {
                        fact *= BigRational::from_integer((p as i64).into());
                    }
                    let inv = Scalar::from_rational(BigRational::from_integer(1.into()) / &fact);
                    for (i, c) in row.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut gens2 = gens.clone();
                        gens2.push(Gen::Phi {
                            idx: (i + 1) as u8,
                            der: (p + 1) as u32,
                        });
                        gens2.sort();
                        out.insert((gens2, vertex.clone()), &(coeff * c) * &inv);
                    }
                }
            }
        }
        out
    }

    pub fn nth_derivative(&self, n: usize) -> Field {
        let mut f = self.clone();
        for _ in 0..n {
            f = f.derivative();
        }
        f
    }

    /// Substitute γ jets for polynomial variables: x_q^α -> ∂^q γ^α / q!.
    pub fn from_gamma_polynomial(p: &MultiPoly) -> Field {
        let mut out = Field::zero();
        for (mono, coeff) in &p.terms {
            let mut c = coeff.clone();
            let mut gens = Vec::new();
            for XVar { root, mode } in mono.factors() {
                gens.push(Gen::Gamma {
                    root,
                    der: mode as u32,
                });
                c = &c
                    * &Scalar::from_rational(BigRational::new(
                        1.into(),
                        crate::ope::factorial_big(mode as u64),
                    ));
            }
            gens.sort();
            out.insert((gens, None), c);
        }
        out
    }

    /// Map every coefficient.
    pub fn map_coeffs<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> Field {
        let mut out = Field::zero();
        for (k, c) in &self.terms {
            out.insert(k.clone(), f(c));
        }
        out
    }

    pub fn display(&self, alg: &LieAlgebraData) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let names: Vec<String> = alg.positive_roots.iter().map(|r| r.name()).collect();
        let single = names.len() == 1;
        let gen_str = |g: &Gen| -> String {
            match g {
                Gen::Beta { root, der } => {
                    deriv_prefix(*der, &format!("β{}", tag(&names, *root, single)))
                }
                Gen::Gamma { root, der } => {
                    deriv_prefix(*der, &format!("γ{}", tag(&names, *root, single)))
                }
                Gen::Phi { idx, der } => {
                    let phi = if alg.rank == 1 {
                        "φ".to_string()
                    } else {
                        format!("φ[{idx}]")
                    };
                    deriv_prefix(*der, &phi)
                }
            }
        };
        let mut parts = Vec::new();
        for ((gens, vertex), coeff) in &self.terms {
            let mut s = String::new();
            let cs = coeff.to_string();
            let simple = coeff.numer().terms.len() <= 1 && coeff.denom().terms.len() <= 1;
            if !coeff.is_one() || (gens.is_empty() && vertex.is_none()) {
                if simple {
                    s.push_str(&cs);
                } else {
                    let _ = write!(s, "({cs})");
                }
            }
            if !gens.is_empty() || vertex.is_some() {
                if !s.is_empty() {
                    s.push('·');
                }
                s.push(':');
                let mut inner: Vec<String> = gens.iter().map(gen_str).collect();
                if let Some(v) = vertex {
                    let mut rows = Vec::new();
                    for (p, row) in v.weights.iter().enumerate() {
                        for (i, c) in row.iter().enumerate() {
                            if c.is_zero() {
                                continue;
                            }
                            let phi = if alg.rank == 1 {
                                "φ".to_string()
                            } else {
                                format!("φ[{}]", i + 1)
                            };
                            let dphi = match p {
                                0 => phi,
                                1 => format!("∂{phi}"),
                                d => format!("∂^{d}{phi}/{d}!"),
                            };
                            rows.push(format!("{c}·{dphi}"));
                        }
                    }
                    inner.push(format!("exp({})", rows.join(" + ")));
                }
                s.push_str(&inner.join("·"));
                s.push(':');
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

fn deriv_prefix(der: u32, base: &str) -> String {
    match der {
        0 => base.to_string(),
        1 => format!("∂{base}"),
        d => format!("∂^{d}{base}"),
    }
}

fn tag(names: &[String], root: u8, single: bool) -> String {
    if single {
        String::new()
    } else {
        format!("[{}]", names[root as usize])
    }
}
