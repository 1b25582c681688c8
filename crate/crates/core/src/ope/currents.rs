//! Wakimoto currents from the r = 0 differential realization: E_i(z), H_i(z),
//! F_i(z), the screening currents s_i(z) and the energy-momentum tensor in
//! free-field and Sugawara form. The ∂γ coefficients r_i are solved from the
//! current OPE relations.

use super::field::{Field, Gen, Vertex};
use super::wick::{normal_product, ope, OpeError};
use crate::algebra::lie::{BasisElt, LieAlgebraData, TruncatedElement};
use crate::algebra::multipoly::MultiPoly;
use crate::algebra::scalar::{Param, Scalar};
use crate::diffreal::{DiffOp, Realizer};
use crate::verma::WeightTuple;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurrentsError {
    #[error("r coefficients missing or of wrong arity; run solve_r_coeffs first")]
    MissingRCoeffs,
    #[error("the linear system for the r coefficients is inconsistent: {0}")]
    InconsistentSystem(String),
    #[error("ope failure: {0}")]
    Ope(#[from] OpeError),
    #[error("sugawara form is only constructed for sl2")]
    SugawaraUnsupported,
}

/// The free-field currents of one algebra (simple-root currents only).
#[derive(Clone, Debug)]
pub struct CurrentSet {
    pub e: Vec<Field>,
    pub h: Vec<Field>,
    pub f: Vec<Field>,
    /// Screening currents s_i(z) including their vertex factor.
    pub s: Vec<Field>,
    pub t_free: Field,
    /// The ∂γ^{α_i} coefficients used in f (symbolic while solving).
    pub r_coeffs: Vec<Scalar>,
}

/// a_i(z) = κ ∂φ_i(z) = κ (ν_i, ∂φ) expanded over the ω basis.
fn a_current(alg: &LieAlgebraData, i: usize) -> Field {
    let mut out = Field::zero();
    for j in 1..=alg.rank {
        let c = alg.cartan[i - 1][j - 1];
        if c == 0 {
            continue;
        }
        out = out.add(
            &Field::gen(Gen::Phi {
                idx: j as u8,
                der: 1,
            })
            .scale(&(&Scalar::kappa() * &Scalar::from_int(c))),
        );
    }
    out
}

/// First-order part of a realization datum as Σ_α :X^α(γ) β_α:.
fn vector_part_to_field(op: &DiffOp) -> Field {
    let mut out = Field::zero();
    for (&(root, mode), poly) in &op.first {
        debug_assert_eq!(mode, 0, "currents come from the r = 0 realization");
        let coeff_field = Field::from_gamma_polynomial(poly);
        let beta = Field::gen(Gen::Beta { root, der: 0 });
        out = out.add(&coeff_field.mul(&beta));
    }
    out
}

/// Affine part c·λ_0^j·x-monomial turned into c·:x-mono(γ) a_j(z):.
fn affine_part_to_field(alg: &LieAlgebraData, op: &DiffOp) -> Field {
    let mut out = Field::zero();
    for (mono, coeff) in &op.affine.terms {
        debug_assert!(coeff.denom().is_one());
        for (pm, rat) in &coeff.numer().terms {
            assert_eq!(pm.0.len(), 1, "affine coefficient must be λ-linear");
            let (Param::Lambda { mode: 0, idx, .. }, 1) = pm.0[0] else {
                panic!("affine coefficient must be mode-0 λ-linear");
            };
            let gamma_mono = Field::from_gamma_polynomial(&MultiPoly::monomial(
                mono.clone(),
                Scalar::from_rational(rat.clone()),
            ));
            out = out.add(&gamma_mono.mul(&a_current(alg, idx as usize)));
        }
    }
    out
}

/// Build the currents with the given ∂γ coefficients (one per simple root).
pub fn build_currents(
    alg: &LieAlgebraData,
    r_coeffs: &[Scalar],
) -> Result<CurrentSet, CurrentsError> {
    if r_coeffs.len() != alg.rank {
        return Err(CurrentsError::MissingRCoeffs);
    }
    let realizer = Realizer::new(alg, 0);
    let lambda = WeightTuple::symbolic(0, alg.rank, 0);
    let mut e = Vec::new();
    let mut h = Vec::new();
    let mut f = Vec::new();
    let mut s = Vec::new();
    for i in 1..=alg.rank {
        let ri = alg.simple_root_index(i);
        let e_op = realizer.realize(TruncatedElement::new(BasisElt::E(ri as u8), 0), &lambda);
        let h_op = realizer.realize(TruncatedElement::new(BasisElt::H(i as u8), 0), &lambda);
        let f_op = realizer.realize(TruncatedElement::new(BasisElt::F(ri as u8), 0), &lambda);
        e.push(vector_part_to_field(&e_op));
        h.push(vector_part_to_field(&h_op).add(&affine_part_to_field(alg, &h_op)));
        let df = Field::gen(Gen::Gamma {
            root: ri as u8,
            der: 1,
        })
        .scale(&r_coeffs[i - 1]);
        f.push(
            vector_part_to_field(&f_op)
                .add(&affine_part_to_field(alg, &f_op))
                .add(&df),
        );
        // Screening current: S_i(z) :e^{-α_i φ(z)}:.
        let s_op = realizer.screening(ri, 0);
        let vertex = Field::term(Vec::new(), Vertex::screening(alg, i), Scalar::one());
        s.push(vector_part_to_field(&s_op).mul(&vertex));
    }

    // T = Σ_α :β_α ∂γ^α: + Σ_i :(κ/2)(ν_i,∂φ)(ω_i,∂φ): - Σ_i ρ_i ∂²φ^i.
    let mut t = Field::zero();
    for root in 0..alg.num_positive_roots() {
        t = t.add(&Field::term(
            vec![
                Gen::Beta {
                    root: root as u8,
                    der: 0,
                },
                Gen::Gamma {
                    root: root as u8,
                    der: 1,
                },
            ],
            None,
            Scalar::one(),
        ));
    }
    for i in 1..=alg.rank {
        for j in 1..=alg.rank {
            let c = alg.cartan[i - 1][j - 1];
            if c == 0 {
                continue;
            }
            t = t.add(&Field::term(
                vec![
                    Gen::Phi {
                        idx: j as u8,
                        der: 1,
                    },
                    Gen::Phi {
                        idx: i as u8,
                        der: 1,
                    },
                ],
                None,
                &(&Scalar::kappa() * &Scalar::from_ratio(1, 2)) * &Scalar::from_int(c),
            ));
        }
        // ρ_i = ρ(h_i) = 1 for every i.
        t = t.add(
            &Field::gen(Gen::Phi {
                idx: i as u8,
                der: 2,
            })
            .scale(&Scalar::from_int(-1)),
        );
    }

    Ok(CurrentSet {
        e,
        h,
        f,
        s,
        t_free: t,
        r_coeffs: r_coeffs.to_vec(),
    })
}

pub fn symbolic_r(alg: &LieAlgebraData) -> Vec<Scalar> {
    (1..=alg.rank)
        .map(|i| Scalar::param(Param::RCoeff(i as u8)))
        .collect()
}

/// The current OPE relations of the Wakimoto realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    HH(usize, usize),
    HE(usize, usize),
    HF(usize, usize),
    EF(usize, usize),
    EE(usize, usize),
    FF(usize, usize),
}

impl Relation {
    pub fn label(&self) -> String {
        match self {
            Relation::HH(i, j) => format!("H{i}(z)H{j}(w)"),
            Relation::HE(i, j) => format!("H{i}(z)E{j}(w)"),
            Relation::HF(i, j) => format!("H{i}(z)F{j}(w)"),
            Relation::EF(i, j) => format!("E{i}(z)F{j}(w)"),
            Relation::EE(i, j) => format!("E{i}(z)E{j}(w)"),
            Relation::FF(i, j) => format!("F{i}(z)F{j}(w)"),
        }
    }

    /// Relations checked per rank: the full set for sl2; for higher rank the
    /// H and E-F relations (E-E and F-F products close on currents of
    /// non-simple roots, which are not constructed).
    pub fn suite(alg: &LieAlgebraData) -> Vec<Relation> {
        let l = alg.rank;
        let mut out = Vec::new();
        for i in 1..=l {
            for j in 1..=l {
                out.push(Relation::HH(i, j));
                out.push(Relation::HE(i, j));
                out.push(Relation::HF(i, j));
                out.push(Relation::EF(i, j));
                if l == 1 {
                    out.push(Relation::EE(i, j));
                    out.push(Relation::FF(i, j));
                }
            }
        }
        out
    }
}

/// LHS - RHS of one relation at every singular order, with the level symbol
/// expanded as k = κ - h^∨.
pub fn relation_residual(
    alg: &LieAlgebraData,
    cur: &CurrentSet,
    rel: Relation,
) -> Result<BTreeMap<i64, Field>, CurrentsError> {
    let kappa_level = &Scalar::kappa() - &Scalar::from_int(alg.dual_coxeter());
    let (lhs_a, lhs_b, rhs): (&Field, &Field, BTreeMap<i64, Field>) = match rel {
        Relation::HH(i, j) => {
            let mut rhs = BTreeMap::new();
            let pairing = alg
                .weight_pairing(&alg.coroot_as_weight(i), &alg.coroot_as_weight(j))
                .as_rational()
                .expect("rational pairing");
            let c = &kappa_level * &Scalar::from_rational(pairing);
            if !c.is_zero() {
                rhs.insert(-2, Field::constant(c));
            }
            (&cur.h[i - 1], &cur.h[j - 1], rhs)
        }
        Relation::HE(i, j) => {
            let mut rhs = BTreeMap::new();
            let c = alg.cartan[i - 1][j - 1];
            if c != 0 {
                rhs.insert(-1, cur.e[j - 1].scale(&Scalar::from_int(c)));
            }
            (&cur.h[i - 1], &cur.e[j - 1], rhs)
        }
        Relation::HF(i, j) => {
            let mut rhs = BTreeMap::new();
            let c = alg.cartan[i - 1][j - 1];
            if c != 0 {
                rhs.insert(-1, cur.f[j - 1].scale(&Scalar::from_int(-c)));
            }
            (&cur.h[i - 1], &cur.f[j - 1], rhs)
        }
        Relation::EF(i, j) => {
            let mut rhs = BTreeMap::new();
            if i == j {
                rhs.insert(-2, Field::constant(kappa_level.clone()));
                rhs.insert(-1, cur.h[i - 1].clone());
            }
            (&cur.e[i - 1], &cur.f[j - 1], rhs)
        }
        Relation::EE(i, j) => (&cur.e[i - 1], &cur.e[j - 1], BTreeMap::new()),
        Relation::FF(i, j) => (&cur.f[i - 1], &cur.f[j - 1], BTreeMap::new()),
    };
    let res = ope(alg, lhs_a, lhs_b, 0)?;
    let mut out: BTreeMap<i64, Field> = res.singular();
    for (n, f) in rhs {
        subtract_at(&mut out, n, &f);
    }
    out.retain(|_, f| !f.is_zero());
    Ok(out)
}

/// Solve for the unique r_i making the relation suite hold. Returns the
/// coefficients as polynomials in κ (on sl2 this is κ - 2, i.e. the level).
pub fn solve_r_coeffs(alg: &LieAlgebraData) -> Result<Vec<Scalar>, CurrentsError> {
    let cur = build_currents(alg, &symbolic_r(alg))?;
    let mut rows: Vec<(Vec<Scalar>, Scalar)> = Vec::new();
    for rel in Relation::suite(alg) {
        let residual = relation_residual(alg, &cur, rel)?;
        for field in residual.values() {
            for coeff in field.terms.values() {
                // Each residual coefficient is affine-linear in the unknowns.
                let mut row = Vec::new();
                let mut rest = coeff.clone();
                for i in 1..=alg.rank {
                    let p = Param::RCoeff(i as u8);
                    let c = coeff.derivative(p);
                    row.push(c);
                    rest = rest.substitute(p, &Scalar::zero());
                }
                rows.push((row, rest));
            }
        }
    }
    let solution = solve_linear(alg.rank, rows).map_err(CurrentsError::InconsistentSystem)?;
    // The defining system must close exactly after substitution.
    let solved = build_currents(alg, &solution)?;
    for rel in Relation::suite(alg) {
        let residual = relation_residual(alg, &solved, rel)?;
        if !residual.is_empty() {
            return Err(CurrentsError::InconsistentSystem(format!(
                "relation {} has nonzero residual after solving",
                rel.label()
            )));
        }
    }
    Ok(solution)
}

/// Exact Gaussian elimination for a small overdetermined system
/// Σ_j a_ij x_j + b_i = 0.
fn solve_linear(
    unknowns: usize,
    mut rows: Vec<(Vec<Scalar>, Scalar)>,
) -> Result<Vec<Scalar>, String> {
    rows.retain(|(a, b)| !(a.iter().all(|c| c.is_zero()) && b.is_zero()));
    let mut pivots: Vec<(usize, Vec<Scalar>, Scalar)> = Vec::new();
    for col in 0..unknowns {
        let pos = rows.iter().position(|(a, _)| !a[col].is_zero());
        let Some(pos) = pos else {
            return Err(format!("unknown {col} is unconstrained"));
        };
        let (mut arow, mut b) = rows.swap_remove(pos);
        let inv = arow[col].inv();
        for c in arow.iter_mut() {
            *c = &*c * &inv;
        }
        b = &b * &inv;
        let mut remaining = Vec::new();
        for (mut ra, mut rb) in rows {
            let factor = ra[col].clone();
            if !factor.is_zero() {
                for (x, p) in ra.iter_mut().zip(arow.iter()) {
                    *x = &*x - &(&factor * p);
                }
                rb = &rb - &(&factor * &b);
            }
            if !(ra.iter().all(|c| c.is_zero()) && rb.is_zero()) {
                remaining.push((ra, rb));
            }
        }
        rows = remaining;
        pivots.push((col, arow, b));
    }
    let mut x = vec![Scalar::zero(); unknowns];
    for (col, arow, b) in pivots.iter().rev() {
        let mut v = -b;
        for j in col + 1..unknowns {
            if !arow[j].is_zero() {
                v = &v - &(&arow[j] * &x[j]);
            }
        }
        x[*col] = v;
    }
    for (ra, rb) in &rows {
        let mut v = rb.clone();
        for (c, xv) in ra.iter().zip(x.iter()) {
            v = &v + &(c * xv);
        }
        if !v.is_zero() {
            return Err(format!("inconsistent row with residual {v}"));
        }
    }
    Ok(x)
}

/// Sugawara form (sl2): (1/2κ)( no(H,H)/2 + no(E,F) + no(F,E) ).
pub fn t_sugawara(alg: &LieAlgebraData, cur: &CurrentSet) -> Result<Field, CurrentsError> {
    if alg.rank != 1 {
        return Err(CurrentsError::SugawaraUnsupported);
    }
    let hh = normal_product(alg, &cur.h[0], &cur.h[0])?;
    let ef = normal_product(alg, &cur.e[0], &cur.f[0])?;
    let fe = normal_product(alg, &cur.f[0], &cur.e[0])?;
    let half = Scalar::from_ratio(1, 2);
    let sum = hh.scale(&half).add(&ef).add(&fe);
    let inv2k = &half / &Scalar::kappa();
    Ok(sum.scale(&inv2k))
}

/// Residuals of the screening-current products: E_i(z)s_j(w) and H_i(z)s_j(w)
/// regular; F_i(z)s_j(w) and T(z)s_j(w) with their displayed singular parts.
pub fn screening_residuals(
    alg: &LieAlgebraData,
    cur: &CurrentSet,
) -> Result<Vec<(String, BTreeMap<i64, Field>)>, CurrentsError> {
    let mut out = Vec::new();
    for i in 1..=alg.rank {
        for j in 1..=alg.rank {
            let es = ope(alg, &cur.e[i - 1], &cur.s[j - 1], 0)?;
            out.push((format!("E{i}(z)s{j}(w)"), es.singular()));
            let hs = ope(alg, &cur.h[i - 1], &cur.s[j - 1], 0)?;
            out.push((format!("H{i}(z)s{j}(w)"), hs.singular()));

            let fs = ope(alg, &cur.f[i - 1], &cur.s[j - 1], 0)?;
            let mut residual = fs.singular();
            if i == j {
                // κ (2/α_i²) ∂_w( u^{-1} :e^{-α_i φ(w)}: )
                //   = κ (2/α_i²) ( u^{-2} V + u^{-1} ∂V )
                let v = Field::term(Vec::new(), Vertex::screening(alg, i), Scalar::one());
                let alpha_sq = alg.root_pairing(alg.simple_root_index(i), alg.simple_root_index(i));
                let c =
                    &(&Scalar::kappa() * &Scalar::from_int(2)) / &Scalar::from_rational(alpha_sq);
                subtract_at(&mut residual, -2, &v.scale(&c));
                subtract_at(&mut residual, -1, &v.derivative().scale(&c));
            }
            residual.retain(|_, f| !f.is_zero());
            out.push((format!("F{i}(z)s{j}(w)"), residual));
        }
    }
    for j in 1..=alg.rank {
        let ts = ope(alg, &cur.t_free, &cur.s[j - 1], 0)?;
        let mut residual = ts.singular();
        // ∂_w( u^{-1} s_j(w) ) = u^{-2} s_j + u^{-1} ∂s_j.
        subtract_at(&mut residual, -2, &cur.s[j - 1]);
        subtract_at(&mut residual, -1, &cur.s[j - 1].derivative());
        residual.retain(|_, f| !f.is_zero());
        out.push((format!("T(z)s{j}(w)"), residual));
    }
    Ok(out)
}

fn subtract_at(map: &mut BTreeMap<i64, Field>, n: i64, f: &Field) {
    if f.is_zero() {
        return;
    }
    let cur = map.remove(&n).unwrap_or_else(Field::zero);
    let diff = cur.sub(f);
    if !diff.is_zero() {
        map.insert(n, diff);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sl2() -> LieAlgebraData {
        LieAlgebraData::build('A', 1).unwrap()
    }

    #[test]
    fn sl2_current_shapes() {
        let g = sl2();
        let cur = build_currents(&g, &symbolic_r(&g)).unwrap();
        // E(z) = β(z)
        assert_eq!(cur.e[0], Field::gen(Gen::Beta { root: 0, der: 0 }));
        // H(z) = -2 :γβ: + a(z)
        let gb = Field::term(
            vec![
                Gen::Gamma { root: 0, der: 0 },
                Gen::Beta { root: 0, der: 0 },
            ],
            None,
            Scalar::from_int(-2),
        );
        let a = Field::gen(Gen::Phi { idx: 1, der: 1 })
            .scale(&(&Scalar::kappa() * &Scalar::from_int(2)));
        assert_eq!(cur.h[0], gb.add(&a));
        // screening s(z) = :β e^{-αφ}:
        let sv = Field::term(
            vec![Gen::Beta { root: 0, der: 0 }],
            Vertex::screening(&g, 1),
            Scalar::one(),
        );
        assert_eq!(cur.s[0], sv);
    }

    #[test]
    fn solve_r_sl2_is_level() {
        let g = sl2();
        let r = solve_r_coeffs(&g).unwrap();
        // r1 = κ - 2 = k (the level) for sl2.
        let expect = &Scalar::kappa() - &Scalar::from_int(2);
        assert_eq!(r, vec![expect]);
    }

    #[test]
    fn wakimoto_relations_sl2() {
        let g = sl2();
        let r = solve_r_coeffs(&g).unwrap();
        let cur = build_currents(&g, &r).unwrap();
        for rel in Relation::suite(&g) {
            let residual = relation_residual(&g, &cur, rel).unwrap();
            assert!(residual.is_empty(), "relation {} fails", rel.label());
        }
    }

    #[test]
    fn h_relations_independent_of_r() {
        // H-current relations and H(z)s(w) regularity hold with r_i formal.
        let g = sl2();
        let cur = build_currents(&g, &symbolic_r(&g)).unwrap();
        let res = relation_residual(&g, &cur, Relation::HH(1, 1)).unwrap();
        assert!(res.is_empty());
        let hs = ope(&g, &cur.h[0], &cur.s[0], 0).unwrap();
        assert!(hs.singular().is_empty());
    }

    #[test]
    fn solve_r_sl3_consistent() {
        let g = LieAlgebraData::build('A', 2).unwrap();
        let r = solve_r_coeffs(&g).unwrap();
        assert_eq!(r.len(), 2);
        // Diagram symmetry forces r1 = r2.
        assert_eq!(r[0], r[1]);
    }

    #[test]
    fn sugawara_matches_free_field_sl2() {
        let g = sl2();
        let r = solve_r_coeffs(&g).unwrap();
        let cur = build_currents(&g, &r).unwrap();
        let tsug = t_sugawara(&g, &cur).unwrap();
        let diff = tsug.sub(&cur.t_free);
        assert!(diff.is_zero(), "T_sugawara - T_free = {}", diff.display(&g));
    }

    #[test]
    fn screening_suite_sl2() {
        let g = sl2();
        let r = solve_r_coeffs(&g).unwrap();
        let cur = build_currents(&g, &r).unwrap();
        for (label, residual) in screening_residuals(&g, &cur).unwrap() {
            assert!(residual.is_empty(), "{label} residual nonzero");
        }
    }

    #[test]
    fn missing_r_coeffs_error() {
        let g = sl2();
        assert!(matches!(
            build_currents(&g, &[]),
            Err(CurrentsError::MissingRCoeffs)
        ));
    }
}
