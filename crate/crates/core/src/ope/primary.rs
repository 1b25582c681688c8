//! Confluent primary fields Φ(w) = P(γ-jets)·v_λ(w): current mode actions via
//! residue extraction, the T(z)Φ(w) expansion and its decomposition, and the
//! induced Virasoro commutators.

use super::currents::{CurrentSet, CurrentsError};
use super::field::{Field, Gen, Vertex};
use super::wick::{ope, OpeResult};
use crate::algebra::lie::LieAlgebraData;
use crate::algebra::multipoly::{MultiPoly, XVar};
use crate::algebra::scalar::Scalar;
use crate::verma::WeightTuple;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

/// The vertex operator v_λ(z) = :exp(Σ_p (λ_p, ∂^p φ)/p!):.
pub fn vertex_field(lambda: &WeightTuple) -> Field {
    Field::term(Vec::new(), Vertex::from_weight_tuple(lambda), Scalar::one())
}

/// Φ = P(γ(z)) v_λ(z) with x_q^α replaced by ∂^q γ^α / q!.
pub fn primary_field(p: &MultiPoly, lambda: &WeightTuple) -> Field {
    Field::from_gamma_polynomial(p).mul(&vertex_field(lambda))
}

/// X[n]Φ(w): the coefficient of (z-w)^{-n-1} in X(z)Φ(w).
pub fn mode_action(
    alg: &LieAlgebraData,
    current: &Field,
    n: i64,
    phi: &Field,
) -> Result<Field, CurrentsError> {
    let order = (-n - 1).max(0);
    let res = ope(alg, current, phi, order)?;
    Ok(res.coefficient(-n - 1))
}

/// The operator D̄_k on Φ = P(γ)v_λ: the mode-raising derivation on the Verma
/// side acts as the vector field Σ_{i≥1} i x_i^α ∂/∂x_{i+k}^α on P, and the
/// λ-side derivation D_k = Σ p λ_{p+k}^i ∂/∂λ_p^i inserts boson jets into the
/// vertex factor.
pub fn dbar(alg: &LieAlgebraData, k: usize, p: &MultiPoly, lambda: &WeightTuple) -> Field {
    let r = lambda.order;
    // Vector-field part on the polynomial datum.
    let mut wp = MultiPoly::zero();
    for root in 0..alg.num_positive_roots() {
        for i in 1..=r {
            if i + k > r {
                continue;
            }
            let d = p.derivative(XVar::new(root, i + k));
            if d.is_zero() {
                continue;
            }
            wp = wp.add(
                &MultiPoly::var(XVar::new(root, i))
                    .mul(&d)
                    .scale(&Scalar::from_int(i as i64)),
            );
        }
    }
    let mut out = primary_field(&wp, lambda);
    // λ-side: Σ_{p'=1}^{r-k} (λ_{p'+k}, ∂^{p'}φ)/(p'-1)! inserted into Φ.
    let base = primary_field(p, lambda);
    for pp in 1..=r.saturating_sub(k) {
        let inv = Scalar::from_rational(BigRational::new(
            1.into(),
            super::factorial_big((pp - 1) as u64),
        ));
        for idx in 1..=alg.rank {
            let comp = lambda.comps[pp + k][idx - 1].clone();
            if comp.is_zero() {
                continue;
            }
            let ins = Field::gen(Gen::Phi {
                idx: idx as u8,
                der: pp as u32,
            });
            out = out.add(&base.mul(&ins).scale(&(&comp * &inv)));
        }
    }
    out
}

/// The scalar coefficient multiplying Φ at order u^{-s} in T(z)Φ(w):
/// (1/2κ) Σ_{p+q=s-2} (λ_p, λ_q) + (1/κ)(s-1)(ρ, λ_{s-2}).
fn scalar_part(alg: &LieAlgebraData, lambda: &WeightTuple, s: i64) -> Scalar {
    let r = lambda.order as i64;
    let mut out = Scalar::zero();
    let kappa = Scalar::kappa();
    if s >= 2 {
        let target = s - 2;
        for p in 0..=r.min(target) {
            let q = target - p;
            if q > r {
                continue;
            }
            let pairing = alg.weight_pairing(lambda.weight(p as usize), lambda.weight(q as usize));
            out = &out + &(&pairing / &(&kappa * &Scalar::from_int(2)));
        }
        if target <= r {
            let rho = alg.rho_as_weight();
            let pairing = alg.weight_pairing(&rho, lambda.weight(target as usize));
            let c = &(&Scalar::from_int(s - 1) * &pairing) / &kappa;
            out = &out + &c;
        }
    }
    out
}

/// Full report of the T(z)Φ(w) expansion against its decomposition.
#[derive(Clone, Debug)]
pub struct TPhiReport {
    pub ope: OpeResult,
    /// D̄_k Φ for k = 0..r-1 built on the Verma/λ side.
    pub dbar: Vec<Field>,
    /// Expected singular terms assembled from the decomposition.
    pub expected: BTreeMap<i64, Field>,
    /// OPE minus decomposition at every singular order; empty means exact.
    pub residual: BTreeMap<i64, Field>,
}

impl TPhiReport {
    pub fn is_exact(&self) -> bool {
        self.residual.is_empty()
    }
}

/// Compute T(z)Φ(w) and decompose it as
///
/// ```text
/// Σ_{k=0}^{r-1} u^{-k-2} D̄_kΦ + u^{-1} ∂Φ
///   + (1/2κ)(Σ_p λ_p u^{-p-1})² Φ + (1/κ) Σ_p (p+1)(ρ,λ_p) u^{-p-2} Φ
/// ```
pub fn t_phi_ope(
    alg: &LieAlgebraData,
    cur: &CurrentSet,
    p: &MultiPoly,
    lambda: &WeightTuple,
) -> Result<TPhiReport, CurrentsError> {
    let phi = primary_field(p, lambda);
    let res = ope(alg, &cur.t_free, &phi, 0)?;
    let r = lambda.order;

    let mut expected: BTreeMap<i64, Field> = BTreeMap::new();
    let mut add = |n: i64, f: Field| {
        if f.is_zero() {
            return;
        }
        match expected.get_mut(&n) {
            Some(acc) => {
                *acc = acc.add(&f);
                if acc.is_zero() {
                    expected.remove(&n);
                }
            }
            None => {
                expected.insert(n, f);
            }
        }
    };

    let mut dbars = Vec::new();
    for k in 0..r {
        let d = dbar(alg, k, p, lambda);
        add(-(k as i64) - 2, d.clone());
        dbars.push(d);
    }
    add(-1, phi.derivative());
    let max_s = 2 * r as i64 + 2;
    for s in 2..=max_s {
        let c = scalar_part(alg, lambda, s);
        if !c.is_zero() {
            add(-s, phi.scale(&c));
        }
    }

    let mut residual = res.singular();
    for (n, f) in &expected {
        let cur_val = residual.remove(n).unwrap_or_else(Field::zero);
        let diff = cur_val.sub(f);
        if !diff.is_zero() {
            residual.insert(*n, diff);
        }
    }
    residual.retain(|_, f| !f.is_zero());

    Ok(TPhiReport {
        ope: res,
        dbar: dbars,
        expected,
        residual,
    })
}

/// [L_n, Φ(w)] as a Laurent polynomial in w with field coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VirasoroAction {
    pub terms: BTreeMap<i64, Field>,
}

impl VirasoroAction {
    fn insert(&mut self, n: i64, f: Field) {
        if f.is_zero() {
            return;
        }
        match self.terms.get_mut(&n) {
            Some(acc) => {
                *acc = acc.add(&f);
                if acc.is_zero() {
                    self.terms.remove(&n);
                }
            }
            None => {
                self.terms.insert(n, f);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sub(&self, other: &VirasoroAction) -> VirasoroAction {
        let mut out = self.clone();
        for (n, f) in &other.terms {
            out.insert(*n, f.scale(&Scalar::from_int(-1)));
        }
        out
    }
}

fn binomial(n: i64, k: i64) -> BigRational {
    if k < 0 || k > n {
        return BigRational::from_integer(0.into());
    }
    let mut num = BigInt::from(1);
    for j in 0..k {
        num *= n - j;
    }
    BigRational::new(num, super::factorial_big(k as u64))
}

/// Residue route: [L_n, Φ(w)] = Σ_{s≥1} C(n+1, s-1) w^{n+2-s} A_s with A_s
/// the u^{-s} coefficient of T(z)Φ(w). Exact for n ≥ -1.
pub fn virasoro_commutator(
    alg: &LieAlgebraData,
    cur: &CurrentSet,
    p: &MultiPoly,
    lambda: &WeightTuple,
    n: i64,
) -> Result<VirasoroAction, CurrentsError> {
    assert!(n >= -1, "mode expansion around w requires n >= -1");
    let phi = primary_field(p, lambda);
    let res = ope(alg, &cur.t_free, &phi, 0)?;
    let mut out = VirasoroAction::default();
    for (&e, f) in res.terms.iter() {
        if e >= 0 {
            continue;
        }
        let s = -e;
        let c = binomial(n + 1, s - 1);
        if c == BigRational::from_integer(0.into()) {
            continue;
        }
        out.insert(n + 2 - s, f.scale(&Scalar::from_rational(c)));
    }
    Ok(out)
}

/// Assembly route from the decomposition, with the residue-derived binomial
/// weights C(n+1, k+1) on D̄_k and on the scalar sums.
pub fn virasoro_from_decomposition(
    alg: &LieAlgebraData,
    report: &TPhiReport,
    phi_poly: &MultiPoly,
    lambda: &WeightTuple,
    n: i64,
) -> VirasoroAction {
    assert!(n >= -1);
    let phi = primary_field(phi_poly, lambda);
    let r = lambda.order as i64;
    let mut out = VirasoroAction::default();
    // w^{n+1} ∂Φ
    out.insert(n + 1, phi.derivative());
    // Σ_k C(n+1, k+1) w^{n-k} D̄_k Φ
    for (k, d) in report.dbar.iter().enumerate() {
        let c = binomial(n + 1, k as i64 + 1);
        if c != BigRational::from_integer(0.into()) {
            out.insert(n - k as i64, d.scale(&Scalar::from_rational(c)));
        }
    }
    // scalar sums at u^{-s}, s = 2..2r+2 → weight C(n+1, s-1) w^{n+2-s}
    for s in 2..=(2 * r + 2) {
        let sc = scalar_part(alg, lambda, s);
        if sc.is_zero() {
            continue;
        }
        let c = binomial(n + 1, s - 1);
        if c == BigRational::from_integer(0.into()) {
            continue;
        }
        out.insert(n + 2 - s, phi.scale(&(&sc * &Scalar::from_rational(c))));
    }
    out
}
