//! Wick calculus: operator product expansions of normal-ordered free-field
//! monomials with vertex factors.
//!
//! Contractions (z first, w second, u = z - w):
//!
//! ```text
//! ∂^a β_α(z) ∂^b γ^β(w) = δ_{αβ} (-1)^a (a+b)! u^{-(a+b+1)}
//! ∂^a γ^α(z) ∂^b β_β(w) = -δ_{αβ} (-1)^a (a+b)! u^{-(a+b+1)}
//! (λ,∂^mφ(z))(μ,∂^nφ(w)) = (λ,μ)/κ (-1)^{m+1} (m+n-1)! u^{-(m+n)},  m+n ≥ 1
//! ```
//!
//! A vertex pair additionally produces the power factor u^{(μ_0,ν_0)/κ} and
//! an exponential of inverse powers; both are carried exactly as a global
//! prefactor of the expansion.

use super::field::{Field, Gen, Vertex};
use crate::algebra::lie::LieAlgebraData;
use crate::algebra::scalar::Scalar;
use num_rational::BigRational;
use std::collections::BTreeMap;

pub fn factorial_big(n: u64) -> num_bigint::BigInt {
    let mut f = num_bigint::BigInt::from(1);
    for k in 2..=n {
        f *= k;
    }
    f
}

fn fact_scalar(n: u64) -> Scalar {
    Scalar::from_rational(BigRational::from_integer(factorial_big(n)))
}

fn inv_fact(n: u64) -> Scalar {
    Scalar::from_rational(BigRational::new(1.into(), factorial_big(n)))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OpeError {
    #[error("operands mix different vertex pairings; the expansion has no single power offset")]
    MixedVertexPairings,
}

/// Result of an operator product expansion around w. The full expansion
/// reads `u^{power_offset} · exp(Σ_s irregular[s] u^{-s}) · Σ_n terms[n] u^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpeResult {
    pub power_offset: Scalar,
    pub irregular: BTreeMap<u32, Scalar>,
    pub terms: BTreeMap<i64, Field>,
    pub order: i64,
}

impl OpeResult {
    pub fn coefficient(&self, n: i64) -> Field {
        self.terms.get(&n).cloned().unwrap_or_else(Field::zero)
    }

    /// Singular part: all strictly negative exponents.
    pub fn singular(&self) -> BTreeMap<i64, Field> {
        self.terms
            .iter()
            .filter(|(&n, _)| n < 0)
            .map(|(&n, f)| (n, f.clone()))
            .collect()
    }

    pub fn is_regular(&self) -> bool {
        self.power_offset.is_zero()
            && self.irregular.is_empty()
            && self.terms.keys().all(|&n| n >= 0)
    }

    fn insert(&mut self, n: i64, field: Field) {
        if field.is_zero() || n > self.order {
            return;
        }
        match self.terms.get_mut(&n) {
            Some(acc) => {
                *acc = acc.add(&field);
                if acc.is_zero() {
                    self.terms.remove(&n);
                }
            }
            None => {
                self.terms.insert(n, field);
            }
        }
    }
}

/// Weight pairing (ω_i, μ) for a vertex row μ given by components.
fn omega_row_pairing(alg: &LieAlgebraData, idx: u8, row: &[Scalar]) -> Scalar {
    let mut out = Scalar::zero();
    for (j, c) in row.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let w = Scalar::from_rational(alg.weight_form[(idx - 1) as usize][j].clone());
        out = &out + &(c * &w);
    }
    out
}

/// Laurent factor of a single pair contraction, z side first.
fn contract_pair(alg: &LieAlgebraData, a: Gen, b: Gen) -> Option<(i64, Scalar)> {
    match (a, b) {
        (Gen::Beta { root: ra, der: da }, Gen::Gamma { root: rb, der: db }) => {
            if ra != rb {
                return None;
            }
            let sign = if da % 2 == 0 { 1 } else { -1 };
            let c = &Scalar::from_int(sign) * &fact_scalar((da + db) as u64);
            Some((-((da + db + 1) as i64), c))
        }
        (Gen::Gamma { root: ra, der: da }, Gen::Beta { root: rb, der: db }) => {
            if ra != rb {
                return None;
            }
            let sign = if da % 2 == 0 { -1 } else { 1 };
            let c = &Scalar::from_int(sign) * &fact_scalar((da + db) as u64);
            Some((-((da + db + 1) as i64), c))
        }
        (Gen::Phi { idx: i, der: m }, Gen::Phi { idx: j, der: n }) => {
            let w =
                Scalar::from_rational(alg.weight_form[(i - 1) as usize][(j - 1) as usize].clone());
            let sign = if m % 2 == 1 { 1 } else { -1 };
            let c = &(&w / &Scalar::kappa())
                * &(&Scalar::from_int(sign) * &fact_scalar((m + n - 1) as u64));
            Some((-((m + n) as i64), c))
        }
        _ => None,
    }
}

/// A-side φ generator against the B vertex: Σ_p K(m,p)/p! u^{-(m+p)}.
fn contract_gen_vertex(alg: &LieAlgebraData, g: Gen, v: &Vertex) -> BTreeMap<i64, Scalar> {
    let Gen::Phi { idx, der: m } = g else {
        return BTreeMap::new();
    };
    let mut out = BTreeMap::new();
    for (p, row) in v.weights.iter().enumerate() {
        let pairing = omega_row_pairing(alg, idx, row);
        if pairing.is_zero() {
            continue;
        }
        let sign = if m % 2 == 1 { 1 } else { -1 };
        let c = &(&pairing / &Scalar::kappa())
            * &(&(&Scalar::from_int(sign) * &fact_scalar((m as u64 + p as u64) - 1))
                * &inv_fact(p as u64));
        let e = -((m as i64) + (p as i64));
        add_coeff(&mut out, e, c);
    }
    out
}

/// A vertex against a B-side φ generator: Σ_p K(p,n)/p! u^{-(p+n)}.
fn contract_vertex_gen(alg: &LieAlgebraData, v: &Vertex, g: Gen) -> BTreeMap<i64, Scalar> {
    let Gen::Phi { idx, der: n } = g else {
        return BTreeMap::new();
    };
    let mut out = BTreeMap::new();
    for (p, row) in v.weights.iter().enumerate() {
        let pairing = omega_row_pairing(alg, idx, row);
        if pairing.is_zero() {
            continue;
        }
        let sign = if p % 2 == 1 { 1 } else { -1 };
        let c = &(&pairing / &Scalar::kappa())
            * &(&(&Scalar::from_int(sign) * &fact_scalar((p as u64 + n as u64) - 1))
                * &inv_fact(p as u64));
        let e = -((p as i64) + (n as i64));
        add_coeff(&mut out, e, c);
    }
    out
}

fn add_coeff(map: &mut BTreeMap<i64, Scalar>, e: i64, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&e) {
        Some(acc) => {
            *acc = &*acc + &c;
            if acc.is_zero() {
                map.remove(&e);
            }
        }
        None => {
            map.insert(e, c);
        }
    }
}

/// Laurent convolution of two finite factor maps.
fn convolve(a: &BTreeMap<i64, Scalar>, b: &BTreeMap<i64, Scalar>) -> BTreeMap<i64, Scalar> {
    let mut out = BTreeMap::new();
    for (&ea, ca) in a {
        for (&eb, cb) in b {
            add_coeff(&mut out, ea + eb, ca * cb);
        }
    }
    out
}

/// Vertex-vertex pairing: the power offset (μ_0, ν_0)/κ and the inverse-power
/// exponential coefficients for p+q > 0.
fn vertex_vertex(
    alg: &LieAlgebraData,
    va: &Vertex,
    vb: &Vertex,
) -> (Scalar, BTreeMap<u32, Scalar>) {
    let rank = va.rank().max(vb.rank());
    let pairing = |pa: usize, pb: usize| -> Scalar {
        let mut out = Scalar::zero();
        for i in 1..=rank {
            let ca = va.comp(pa, i);
            if ca.is_zero() {
                continue;
            }
            for j in 1..=rank {
                let cb = vb.comp(pb, j);
                if cb.is_zero() {
                    continue;
                }
                let w = Scalar::from_rational(alg.weight_form[i - 1][j - 1].clone());
                out = &out + &(&(&ca * &cb) * &w);
            }
        }
        out
    };
    let offset = &pairing(0, 0) / &Scalar::kappa();
    let mut irregular = BTreeMap::new();
    for p in 0..va.weights.len() {
        for q in 0..vb.weights.len() {
            if p + q == 0 {
                continue;
            }
            let pr = pairing(p, q);
            if pr.is_zero() {
                continue;
            }
            let sign = if p % 2 == 1 { 1 } else { -1 };
            // K(p,q)/(p! q!) = (μ_p,ν_q)/κ (-1)^{p+1} (p+q-1)!/(p! q!)
            let c = &(&pr / &Scalar::kappa())
                * &(&(&(&Scalar::from_int(sign) * &fact_scalar((p + q - 1) as u64))
                    * &inv_fact(p as u64))
                    * &inv_fact(q as u64));
            let e = (p + q) as u32;
            if !c.is_zero() {
                match irregular.get_mut(&e) {
                    Some(acc) => {
                        *acc = &*acc as &Scalar + &c;
                        if (acc as &Scalar).is_zero() {
                            irregular.remove(&e);
                        }
                    }
                    None => {
                        irregular.insert(e, c);
                    }
                }
            }
        }
    }
    (offset, irregular)
}

/// Operator product expansion A(z)B(w), regular terms kept up to u^order.
pub fn ope(alg: &LieAlgebraData, a: &Field, b: &Field, order: i64) -> Result<OpeResult, OpeError> {
    let mut result = OpeResult {
        power_offset: Scalar::zero(),
        irregular: BTreeMap::new(),
        terms: BTreeMap::new(),
        order,
    };
    let mut prefactor_set = false;

    for ((ga, va), ca) in &a.terms {
        for ((gb, vb), cb) in &b.terms {
            // Global vertex-vertex prefactor, identical across term pairs.
            let (offset, irregular) = match (va, vb) {
                (Some(x), Some(y)) => vertex_vertex(alg, x, y),
                _ => (Scalar::zero(), BTreeMap::new()),
            };
            if !prefactor_set {
                result.power_offset = offset.clone();
                result.irregular = irregular.clone();
                prefactor_set = true;
            } else if result.power_offset != offset || result.irregular != irregular {
                return Err(OpeError::MixedVertexPairings);
            }

            let coeff = ca * cb;
            contract_terms(alg, ga, va, gb, vb, &coeff, &mut result);
        }
    }
    Ok(result)
}

/// Enumerate all contraction schemes for one pair of normal-ordered terms.
#[allow(clippy::too_many_arguments)]
fn contract_terms(
    alg: &LieAlgebraData,
    ga: &[Gen],
    va: &Option<Vertex>,
    gb: &[Gen],
    vb: &Option<Vertex>,
    coeff: &Scalar,
    result: &mut OpeResult,
) {
    let mut used_b = vec![false; gb.len()];
    let mut factor: BTreeMap<i64, Scalar> = BTreeMap::new();
    factor.insert(0, Scalar::one());
    let mut stay_a: Vec<Gen> = Vec::new();
    rec_a(
        alg,
        ga,
        va,
        gb,
        vb,
        coeff,
        0,
        &mut used_b,
        factor,
        &mut stay_a,
        result,
    );
}

#[allow(clippy::too_many_arguments)]
fn rec_a(
    alg: &LieAlgebraData,
    ga: &[Gen],
    va: &Option<Vertex>,
    gb: &[Gen],
    vb: &Option<Vertex>,
    coeff: &Scalar,
    i: usize,
    used_b: &mut Vec<bool>,
    factor: BTreeMap<i64, Scalar>,
    stay_a: &mut Vec<Gen>,
    result: &mut OpeResult,
) {
    if i == ga.len() {
        // B-side φ generators may still hit the A vertex.
        let unmatched: Vec<usize> = (0..gb.len()).filter(|&j| !used_b[j]).collect();
        rec_b(
            alg,
            va,
            gb,
            vb,
            coeff,
            &unmatched,
            0,
            Vec::new(),
            factor,
            stay_a,
            result,
        );
        return;
    }
    let g = ga[i];
    // Choice 1: stays in the normal-ordered remainder.
    stay_a.push(g);
    rec_a(
        alg,
        ga,
        va,
        gb,
        vb,
        coeff,
        i + 1,
        used_b,
        factor.clone(),
        stay_a,
        result,
    );
    stay_a.pop();
    // Choice 2: contract with an unused B generator.
    for j in 0..gb.len() {
        if used_b[j] {
            continue;
        }
        if let Some((e, c)) = contract_pair(alg, g, gb[j]) {
            if c.is_zero() {
                continue;
            }
            let mut single = BTreeMap::new();
            single.insert(e, c);
            let f2 = convolve(&factor, &single);
            used_b[j] = true;
            rec_a(
                alg,
                ga,
                va,
                gb,
                vb,
                coeff,
                i + 1,
                used_b,
                f2,
                stay_a,
                result,
            );
            used_b[j] = false;
        }
    }
    // Choice 3: a φ generator contracts the B vertex.
    if let (Gen::Phi { .. }, Some(v)) = (g, vb) {
        let gv = contract_gen_vertex(alg, g, v);
        if !gv.is_empty() {
            let f2 = convolve(&factor, &gv);
            rec_a(
                alg,
                ga,
                va,
                gb,
                vb,
                coeff,
                i + 1,
                used_b,
                f2,
                stay_a,
                result,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn rec_b(
    alg: &LieAlgebraData,
    va: &Option<Vertex>,
    gb: &[Gen],
    vb: &Option<Vertex>,
    coeff: &Scalar,
    unmatched: &[usize],
    k: usize,
    stay_b: Vec<Gen>,
    factor: BTreeMap<i64, Scalar>,
    stay_a: &mut Vec<Gen>,
    result: &mut OpeResult,
) {
    if k == unmatched.len() {
        emit(alg, va, vb, coeff, stay_a, &stay_b, &factor, result);
        return;
    }
    let g = gb[unmatched[k]];
    // Stay.
    let mut sb = stay_b.clone();
    sb.push(g);
    rec_b(
        alg,
        va,
        gb,
        vb,
        coeff,
        unmatched,
        k + 1,
        sb,
        factor.clone(),
        stay_a,
        result,
    );
    // Contract the A vertex.
    if let (Some(v), Gen::Phi { .. }) = (va, g) {
        let gv = contract_vertex_gen(alg, v, g);
        if !gv.is_empty() {
            let f2 = convolve(&factor, &gv);
            rec_b(
                alg,
                va,
                gb,
                vb,
                coeff,
                unmatched,
                k + 1,
                stay_b,
                f2,
                stay_a,
                result,
            );
        }
    }
}

fn emit(
    alg: &LieAlgebraData,
    va: &Option<Vertex>,
    vb: &Option<Vertex>,
    coeff: &Scalar,
    stay_a: &[Gen],
    stay_b: &[Gen],
    factor: &BTreeMap<i64, Scalar>,
    result: &mut OpeResult,
) {
    let _ = alg;
    if factor.is_empty() {
        return;
    }
    let s_min = *factor.keys().next().unwrap();
    // Remainder of the A side, still at z: Taylor expand around w.
    let rem_a = Field::term(stay_a.to_vec(), va.clone(), Scalar::one());
    let rem_b = Field::term(stay_b.to_vec(), vb.clone(), coeff.clone());
    let t_max = result.order - s_min;
    if t_max < 0 {
        return;
    }
    let mut da = rem_a;
    for t in 0..=t_max {
        if !da.is_zero() {
            let taylor = da.scale(&inv_fact(t as u64));
            let merged = taylor.mul(&rem_b);
            for (&s, c) in factor {
                let n = s + t;
                if n > result.order {
                    continue;
                }
                result.insert(n, merged.scale(c));
            }
        }
        if t < t_max {
            da = da.derivative();
        }
    }
}

/// Point-split normal-ordered product: the u^0 coefficient of the full OPE.
pub fn normal_product(alg: &LieAlgebraData, a: &Field, b: &Field) -> Result<Field, OpeError> {
    let res = ope(alg, a, b, 0)?;
    debug_assert!(res.power_offset.is_zero() && res.irregular.is_empty());
    Ok(res.coefficient(0))
}
