//! Differential realization of the truncated current algebra on C[x_q^α]:
//! the operators E_i[p], H_i[p], F_i[p] and the screening operators S_α[p],
//! together with the polynomials P_λ^I.
//!
//! The realization is defined by J(∂/∂x, x, λ)⟨λ|Z = ⟨λ|Z J with
//! Z = exp(Σ x_i^α e_α[i]). The concrete algorithm:
//! 1. Ad(Z)J = e^{ad_x}J — a finite sum, since the positive part of g_(r)
//!    is nilpotent;
//! 2. the h-part hits ⟨λ| with its λ-eigenvalues (affine part), the f-part
//!    dies on ⟨λ|;
//! 3. the e-part is pushed back through Z with e^{-ad_x} and expressed in
//!    x-derivatives by inverting the unipotent right-trivialization matrix
//!    T(e_b) = ((1 - e^{-ad_x})/ad_x)(e_b) over the polynomial ring.

use crate::algebra::lie::{BasisElt, LieAlgebraData, TruncatedElement};
use crate::algebra::multipoly::{MultiPoly, XMono, XVar};
use crate::algebra::scalar::{Param, Scalar};
use crate::verma::{matrix_element, WeightTuple};
use num_rational::BigRational;
use std::collections::BTreeMap;

/// First-order differential operator with polynomial coefficients plus an
/// affine (multiplication) part.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DiffOp {
    /// Coefficient of ∂/∂x_mode^root.
    pub first: BTreeMap<(u8, u8), MultiPoly>,
    pub affine: MultiPoly,
}

impl DiffOp {
    pub fn zero() -> Self {
        DiffOp::default()
    }

    pub fn is_zero(&self) -> bool {
        self.affine.is_zero() && self.first.values().all(|p| p.is_zero())
    }

    fn insert(&mut self, key: (u8, u8), poly: MultiPoly) {
        if poly.is_zero() {
            return;
        }
        match self.first.get_mut(&key) {
            Some(acc) => {
                *acc = acc.add(&poly);
                if acc.is_zero() {
                    self.first.remove(&key);
                }
            }
            None => {
                self.first.insert(key, poly);
            }
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (k, p) in &other.first {
            out.insert(*k, p.clone());
        }
        out.affine = out.affine.add(&other.affine);
        out
    }

    pub fn scale(&self, c: &Scalar) -> DiffOp {
        DiffOp {
            first: self
                .first
                .iter()
                .map(|(k, p)| (*k, p.scale(c)))
                .filter(|(_, p)| !p.is_zero())
                .collect(),
            affine: self.affine.scale(c),
        }
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    /// Apply only the vector-field part to a polynomial.
    pub fn vector_apply(&self, p: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (&(root, mode), coeff) in &self.first {
            let d = p.derivative(XVar { root, mode });
            if !d.is_zero() {
                out = out.add(&coeff.mul(&d));
            }
        }
        out
    }

    /// Apply the full operator: vector field plus multiplication by the
    /// affine part.
    pub fn apply(&self, p: &MultiPoly) -> MultiPoly {
        self.vector_apply(p).add(&self.affine.mul(p))
    }

    /// Commutator of two first-order operators, again first-order:
    /// [A, B] = Σ_d (A(b_d) - B(a_d)) ∂_d + A(b0) - B(a0)
    /// with A, B acting through their vector-field parts on coefficients.
    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero();
        for (k, bd) in &other.first {
            out.insert(*k, self.vector_apply(bd));
        }
        for (k, ad) in &self.first {
            out.insert(*k, other.vector_apply(ad).neg());
        }
        out.affine = self
            .vector_apply(&other.affine)
            .sub(&other.vector_apply(&self.affine));
        out
    }

    /// Canonical text form: Σ coeff·d/dx[q, root] + affine.
    pub fn display(&self, alg: &LieAlgebraData) -> String {
        let names: Vec<String> = alg.positive_roots.iter().map(|r| r.name()).collect();
        let single = names.len() == 1;
        let mut parts: Vec<String> = Vec::new();
        for (&(root, mode), poly) in &self.first {
            let ps = poly.display(&names);
            let coeff = if poly.terms.len() == 1 && !ps.contains('·') && !ps.starts_with('-') {
                ps
            } else {
                format!("({ps})")
            };
            let dvar = if single {
                format!("d/dx{mode}")
            } else {
                format!("d/dx{mode}[{}]", names[root as usize])
            };
            parts.push(format!("{coeff}·{dvar}"));
        }
        if !self.affine.is_zero() {
            parts.push(self.affine.display(&names));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Algebra-valued polynomial: Σ coeff(x) · (basis mode).
type GPoly = BTreeMap<TruncatedElement, MultiPoly>;

fn gp_insert(gp: &mut GPoly, k: TruncatedElement, p: MultiPoly) {
    if p.is_zero() {
        return;
    }
    match gp.get_mut(&k) {
        Some(acc) => {
            *acc = acc.add(&p);
            if acc.is_zero() {
                gp.remove(&k);
            }
        }
        None => {
            gp.insert(k, p);
        }
    }
}

/// Holds the trivialization data of Z = exp(Σ x_i^α e_α[i]) for one
/// (algebra, truncation) pair, i.e. the inverse of the unipotent matrix
/// expressing ∂/∂x_q^β ⟨λ|Z in terms of ⟨λ|Z e_δ[s].
pub struct Realizer<'a> {
    pub alg: &'a LieAlgebraData,
    pub r: usize,
    /// e-basis in height order: (root index, mode).
    ebasis: Vec<(u8, u8)>,
    epos: BTreeMap<(u8, u8), usize>,
    /// minv[b][c]: coefficient of ∂_b in the operator realizing ⟨λ|Z e_c.
    minv: Vec<Vec<MultiPoly>>,
    /// Read-only memo of basis realizations, filled by `warm_up`.
    memo: BTreeMap<(TruncatedElement, u16), DiffOp>,
}

impl<'a> Realizer<'a> {
    pub fn new(alg: &'a LieAlgebraData, r: usize) -> Self {
        let mut ebasis: Vec<(u8, u8)> = Vec::new();
        for (ri, _) in alg.positive_roots.iter().enumerate() {
            for mode in 0..=r {
                ebasis.push((ri as u8, mode as u8));
            }
        }
        ebasis.sort_by_key(|&(ri, mode)| (alg.positive_roots[ri as usize].height(), ri, mode));
        let epos: BTreeMap<(u8, u8), usize> =
            ebasis.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        // M[c][b] = coefficient of e_c in T(e_b), T = Σ_m (-ad_x)^m/(m+1)!.
        let n = ebasis.len();
        let mut m = vec![vec![MultiPoly::zero(); n]; n];
        for (b, &(ri, mode)) in ebasis.iter().enumerate() {
            let mut gp: GPoly = BTreeMap::new();
            gp_insert(
                &mut gp,
                TruncatedElement::new(BasisElt::E(ri), mode as usize),
                MultiPoly::one(),
            );
            let mut term = gp.clone();
            let mut fact = 1u64; // (m+1)! at step m
            let mut step = 1u64;
            loop {
                for (k, p) in &term {
                    let c = match k.base {
                        BasisElt::E(rr) => (rr, k.mode),
                        _ => unreachable!("T stays in the positive part"),
                    };
                    let scaled = p.scale(&Scalar::from_rational(BigRational::new(
                        1.into(),
                        fact.into(),
                    )));
                    let row = epos[&c];
                    m[row][b] = m[row][b].add(&scaled);
                }
                term = ad_x(alg, r, &term, true);
                if term.is_empty() {
                    break;
                }
                step += 1;
                fact *= step;
            }
        }

        // Invert the unipotent matrix: with the height ordering M = I + N and
        // N strictly triangular, M^{-1} = Σ_j (-N)^j is a finite sum.
        let neg_n: Vec<Vec<MultiPoly>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, p)| {
                        if i == j {
                            p.sub(&MultiPoly::one()).neg()
                        } else {
                            p.neg()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut minv = identity(n);
        let mut term = identity(n);
        loop {
            term = mat_mul(&term, &neg_n);
            if mat_is_zero(&term) {
                break;
            }
            minv = mat_add(&minv, &term);
        }

        Realizer {
            alg,
            r,
            ebasis,
            epos,
            minv,
            memo: BTreeMap::new(),
        }
    }

    /// Precompute every basis-mode realization for one weight tuple; realize
    /// then serves cached clones, which keeps exhaustive sweeps cheap.
    pub fn warm_up(&mut self, lambda: &WeightTuple) {
        for b in self.alg.basis() {
            for p in 0..=self.r {
                let t = TruncatedElement::new(b, p);
                let op = self.realize_uncached(t, lambda);
                self.memo.insert((t, lambda.tuple_id), op);
            }
        }
    }

    /// The operator realizing ⟨λ|Z e_c for the c-th e-basis element:
    /// Σ_b (M^{-1})_{b,c} ∂_b, as (coefficient of ∂_b) pairs.
    fn e_functional(&self, c: usize) -> DiffOp {
        let mut out = DiffOp::zero();
        for (b, &key) in self.ebasis.iter().enumerate() {
            out.insert(key, self.minv[b][c].clone());
        }
        out
    }

    /// Realize a basis mode J as a first-order differential operator.
    pub fn realize(&self, j: TruncatedElement, lambda: &WeightTuple) -> DiffOp {
        if let Some(op) = self.memo.get(&(j, lambda.tuple_id)) {
            return op.clone();
        }
        self.realize_uncached(j, lambda)
    }

    fn realize_uncached(&self, j: TruncatedElement, lambda: &WeightTuple) -> DiffOp {
        assert_eq!(lambda.order, self.r, "weight tuple order must match r");
        let mut gp: GPoly = BTreeMap::new();
        gp_insert(&mut gp, j, MultiPoly::one());
        let adz = exp_ad(self.alg, self.r, &gp, false);

        let mut affine = MultiPoly::zero();
        let mut eplus: GPoly = BTreeMap::new();
        for (k, p) in adz {
            match k.base {
                BasisElt::H(i) => {
                    let ev = lambda.comps[k.mode as usize][(i - 1) as usize].clone();
                    affine = affine.add(&p.scale(&ev));
                }
                BasisElt::F(_) => {} // ⟨λ| f = 0
                BasisElt::E(_) => {
                    gp_insert(&mut eplus, k, p);
                }
            }
        }

        // Push the e-part back through Z.
        let back = exp_ad(self.alg, self.r, &eplus, true);
        let mut out = DiffOp {
            first: BTreeMap::new(),
            affine,
        };
        for (k, p) in back {
            let c = match k.base {
                BasisElt::E(rr) => self.epos[&(rr, k.mode)],
                _ => unreachable!("conjugation keeps the positive part"),
            };
            let func = self.e_functional(c);
            for (key, coeff) in func.first {
                out.insert(key, coeff.mul(&p));
            }
        }
        out
    }

    /// Realize a linear combination of basis modes.
    pub fn realize_lincomb(
        &self,
        terms: &[(Scalar, TruncatedElement)],
        lambda: &WeightTuple,
    ) -> DiffOp {
        let mut out = DiffOp::zero();
        for (c, t) in terms {
            out = out.add(&self.realize(*t, lambda).scale(c));
        }
        out
    }

    /// Screening operator S_α[p]: ⟨λ|e_α[p]Z = S_α[p]⟨λ|Z. Zero affine part
    /// by construction.
    pub fn screening(&self, root_idx: usize, p: usize) -> DiffOp {
        let mut gp: GPoly = BTreeMap::new();
        gp_insert(
            &mut gp,
            TruncatedElement::new(BasisElt::E(root_idx as u8), p),
            MultiPoly::one(),
        );
        let back = exp_ad(self.alg, self.r, &gp, true);
        let mut out = DiffOp::zero();
        for (k, poly) in back {
            let c = match k.base {
                BasisElt::E(rr) => self.epos[&(rr, k.mode)],
                _ => unreachable!(),
            };
            let func = self.e_functional(c);
            for (key, coeff) in func.first {
                out.insert(key, coeff.mul(&poly));
            }
        }
        out
    }
}

/// ad_x(v) = [Σ x_i^α e_α[i], v], or the negative when `negate` is set.
fn ad_x(alg: &LieAlgebraData, r: usize, v: &GPoly, negate: bool) -> GPoly {
    let mut out: GPoly = BTreeMap::new();
    for (k, p) in v {
        for ri in 0..alg.num_positive_roots() {
            for mode in 0..=r {
                let x = TruncatedElement::new(BasisElt::E(ri as u8), mode);
                for (c, t) in alg.truncated_bracket(r, x, *k) {
                    let c = if negate { -c } else { c };
                    let xm = MultiPoly::var(XVar::new(ri, mode));
                    gp_insert(&mut out, t, p.mul(&xm).scale(&Scalar::from_rational(c)));
                }
            }
        }
    }
    out
}

/// e^{±ad_x} applied to an algebra-valued polynomial.
fn exp_ad(alg: &LieAlgebraData, r: usize, v: &GPoly, negate: bool) -> GPoly {
    let mut out = v.clone();
    let mut term = v.clone();
    let mut m = 1u64;
    loop {
        term = ad_x(alg, r, &term, negate);
        if term.is_empty() {
            break;
        }
        for (k, p) in &term {
            gp_insert(
                &mut out,
                *k,
                p.scale(&Scalar::from_rational(BigRational::new(
                    1.into(),
                    factorial(m),
                ))),
            );
        }
        m += 1;
        assert!(m < 64, "ad_x failed to nilpotize");
        // term holds ad^m without the 1/m! factor; rescaling happens on add.
    }
    out
}

fn factorial(n: u64) -> num_bigint::BigInt {
    let mut f = num_bigint::BigInt::from(1);
    for k in 2..=n {
        f *= k;
    }
    f
}

fn identity(n: usize) -> Vec<Vec<MultiPoly>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        MultiPoly::one()
                    } else {
                        MultiPoly::zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn mat_mul(a: &[Vec<MultiPoly>], b: &[Vec<MultiPoly>]) -> Vec<Vec<MultiPoly>> {
    let n = a.len();
    let mut out = vec![vec![MultiPoly::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j]));
            }
        }
    }
    out
}

fn mat_add(a: &[Vec<MultiPoly>], b: &[Vec<MultiPoly>]) -> Vec<Vec<MultiPoly>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y)).collect())
        .collect()
}

fn mat_is_zero(a: &[Vec<MultiPoly>]) -> bool {
    a.iter().all(|row| row.iter().all(|p| p.is_zero()))
}

/// The jet substitution: a monomial x^{β_1}···x^{β_m} over mode-0 variables
/// becomes Σ_{j_1+...+j_m = q-p} x_{j_1}^{β_1}···x_{j_m}^{β_m}.
pub fn jet_of_monomial(mono: &XMono, p: usize, q: usize) -> MultiPoly {
    let factors = mono.factors();
    if q < p {
        return MultiPoly::zero();
    }
    let budget = q - p;
    let mut out = MultiPoly::zero();
    let mut assign = vec![0usize; factors.len()];
    fn rec(
        factors: &[XVar],
        assign: &mut Vec<usize>,
        idx: usize,
        left: usize,
        out: &mut MultiPoly,
    ) {
        if idx == factors.len() {
            if left == 0 {
                let mut m = XMono::unit();
                for (f, &j) in factors.iter().zip(assign.iter()) {
                    m = m.mul(&XMono::var(XVar {
                        root: f.root,
                        mode: j as u8,
                    }));
                }
                *out = out.add(&MultiPoly::monomial(m, Scalar::one()));
            }
            return;
        }
        if idx == factors.len() - 1 {
            assign[idx] = left;
            rec(factors, assign, idx + 1, 0, out);
            return;
        }
        for j in 0..=left {
            assign[idx] = j;
            rec(factors, assign, idx + 1, left - j, out);
        }
    }
    if factors.is_empty() {
        return if budget == 0 {
            MultiPoly::one()
        } else {
            MultiPoly::zero()
        };
    }
    rec(&factors, &mut assign, 0, budget, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("mode {mode} exceeds truncation order {order}")]
    ModeOutOfRange { mode: usize, order: usize },
    #[error("affine coefficient is not linear in mode-0 λ parameters")]
    NonLinearAffine,
}

/// Lift a mode-0 realization datum to mode p over the jet variables of
/// truncation order r. The coefficient of ∂/∂x_q^α is the jet of the mode-0
/// coefficient with budget q-p; an affine term c·λ_0^i·x-monomial carries its
/// λ index along: the λ mode is p plus the total jet budget of the monomial.
pub fn jet_lift(op: &DiffOp, p: usize, r: usize) -> Result<DiffOp, JetError> {
    if p > r {
        return Err(JetError::ModeOutOfRange { mode: p, order: r });
    }
    let mut out = DiffOp::zero();
    for (&(root, _mode0), poly) in &op.first {
        for q in p..=r {
            let mut lifted = MultiPoly::zero();
            for (mono, c) in &poly.terms {
                lifted = lifted.add(&jet_of_monomial(mono, p, q).scale(c));
            }
            out.insert((root, q as u8), lifted);
        }
    }
    // Affine: each coefficient must be linear in the mode-0 λ parameters;
    // a λ_0^i factor turns into λ_q^i where q is p plus the jet budget of
    // the accompanying x-monomial.
    for (mono, coeff) in &op.affine.terms {
        for (rat, tuple, idx) in split_linear_lambda(coeff)? {
            for q in p..=r {
                let jets = jet_of_monomial(mono, p, q);
                if jets.is_zero() {
                    continue;
                }
                let lam = Scalar::param(Param::Lambda {
                    tuple,
                    mode: q as u8,
                    idx,
                });
                out.affine = out.affine.add(&jets.scale(&(&rat * &lam)));
            }
        }
    }
    Ok(out)
}

/// Decompose a scalar as Σ rational · λ_0^i pieces.
fn split_linear_lambda(c: &Scalar) -> Result<Vec<(Scalar, u16, u8)>, JetError> {
    if !c.denom().is_one() {
        return Err(JetError::NonLinearAffine);
    }
    let mut out = Vec::new();
    for (mono, rat) in &c.numer().terms {
        if mono.0.len() != 1 {
            return Err(JetError::NonLinearAffine);
        }
        match mono.0[0] {
            (
                Param::Lambda {
                    tuple,
                    mode: 0,
                    idx,
                },
                1,
            ) => {
                out.push((Scalar::from_rational(rat.clone()), tuple, idx));
            }
            _ => return Err(JetError::NonLinearAffine),
        }
    }
    Ok(out)
}

/// P_λ^I as the iterated action of the realized f operators on 1, applying
/// the rightmost entry of I first.
pub fn compute_p(
    realizer: &Realizer,
    word: &[(usize, usize)], // (positive-root index, mode)
    lambda: &WeightTuple,
) -> MultiPoly {
    let mut p = MultiPoly::one();
    for &(root_idx, mode) in word.iter().rev() {
        let f = realizer.realize(
            TruncatedElement::new(BasisElt::F(root_idx as u8), mode),
            lambda,
        );
        p = f.apply(&p);
    }
    p
}

/// The same polynomial through the Verma pairing: expand Z degree by degree,
/// ⟨λ|Z f-word|λ⟩ = Σ_m (1/m!) Σ_{e-words} x^{word} ⟨λ|e-word f-word|λ⟩.
pub fn pair_via_verma(
    alg: &LieAlgebraData,
    r: usize,
    word: &[(usize, usize)],
    lambda: &WeightTuple,
) -> MultiPoly {
    let fword: Vec<TruncatedElement> = word
        .iter()
        .map(|&(ri, mode)| TruncatedElement::new(BasisElt::F(ri as u8), mode))
        .collect();
    let max_deg: u32 = word
        .iter()
        .map(|&(ri, _)| alg.positive_roots[ri].height())
        .sum();
    let vars: Vec<(usize, usize)> = (0..alg.num_positive_roots())
        .flat_map(|ri| (0..=r).map(move |mode| (ri, mode)))
        .collect();
    let mut out = MultiPoly::zero();
    let mut fact = BigRational::from_integer(1.into());
    for m in 0..=max_deg as usize {
        if m > 0 {
            fact *= BigRational::from_integer(m.into());
        }
        let inv = Scalar::from_rational(BigRational::from_integer(1.into()) / &fact);
        for eword_vars in words_over(&vars, m) {
            let eword: Vec<TruncatedElement> = eword_vars
                .iter()
                .map(|&(ri, mode)| TruncatedElement::new(BasisElt::E(ri as u8), mode))
                .collect();
            let me = matrix_element(alg, r, &eword, &fword, lambda);
            if me.is_zero() {
                continue;
            }
            let mut mono = XMono::unit();
            for &(ri, mode) in &eword_vars {
                mono = mono.mul(&XMono::var(XVar::new(ri, mode)));
            }
            out = out.add(&MultiPoly::monomial(mono, &me * &inv));
        }
    }
    out
}

fn words_over(vars: &[(usize, usize)], len: usize) -> Vec<Vec<(usize, usize)>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for w in words_over(vars, len - 1) {
        for &v in vars {
            let mut w2 = w.clone();
            w2.push(v);
            out.push(w2);
        }
    }
    out
}

/// Validate realize as a Lie algebra homomorphism on a pair of basis modes:
/// realize([J1, J2]) - [realize(J1), realize(J2)] must vanish identically.
pub fn rep_check(
    realizer: &Realizer,
    j1: TruncatedElement,
    j2: TruncatedElement,
    lambda: &WeightTuple,
) -> (bool, DiffOp) {
    let d1 = realizer.realize(j1, lambda);
    let d2 = realizer.realize(j2, lambda);
    let lhs = d1.commutator(&d2);
    let bracket = realizer.alg.truncated_bracket(realizer.r, j1, j2);
    let terms: Vec<(Scalar, TruncatedElement)> = bracket
        .into_iter()
        .map(|(c, t)| (Scalar::from_rational(c), t))
        .collect();
    let rhs = realizer.realize_lincomb(&terms, lambda);
    let diff = lhs.sub(&rhs);
    (diff.is_zero(), diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::lie::LieAlgebraData;

    fn sl2() -> LieAlgebraData {
        LieAlgebraData::build('A', 1).unwrap()
    }

    fn lam(mode: u8) -> Scalar {
        Scalar::lambda(0, mode, 1)
    }

    #[test]
    fn sl2_r0_classical_operators() {
        let g = sl2();
        let rz = Realizer::new(&g, 0);
        let lt = WeightTuple::symbolic(0, 1, 0);
        let x = MultiPoly::var(XVar::new(0, 0));

        // E = d/dx
        let e = rz.realize(TruncatedElement::new(BasisElt::E(0), 0), &lt);
        assert!(e.affine.is_zero());
        assert_eq!(e.first[&(0, 0)], MultiPoly::one());

        // H = -2x d/dx + λ0
        let h = rz.realize(TruncatedElement::new(BasisElt::H(1), 0), &lt);
        assert_eq!(h.affine, MultiPoly::constant(lam(0)));
        assert_eq!(h.first[&(0, 0)], x.scale(&Scalar::from_int(-2)));

        // F = -x^2 d/dx + λ0·x
        let f = rz.realize(TruncatedElement::new(BasisElt::F(0), 0), &lt);
        assert_eq!(f.affine, x.scale(&lam(0)));
        assert_eq!(f.first[&(0, 0)], x.mul(&x).scale(&Scalar::from_int(-1)));
        assert_eq!(f.display(&g), "(-1·x0^2)·d/dx0 + λ0·x0");
    }

    #[test]
    fn affine_part_of_f_modes() {
        // affine of realize(f[p]) = Σ_{q=p}^r λ_q x_{q-p}, any r, any p.
        let g = sl2();
        for r in 0..=3usize {
            let rz = Realizer::new(&g, r);
            let lt = WeightTuple::symbolic(0, 1, r);
            for p in 0..=r {
                let f = rz.realize(TruncatedElement::new(BasisElt::F(0), p), &lt);
                let mut expect = MultiPoly::zero();
                for q in p..=r {
                    expect = expect.add(&MultiPoly::var(XVar::new(0, q - p)).scale(&lam(q as u8)));
                }
                assert_eq!(f.affine, expect, "r={r} p={p}");
                // e modes carry no affine part
                let e = rz.realize(TruncatedElement::new(BasisElt::E(0), p), &lt);
                assert!(e.affine.is_zero());
                // h affine is exactly λ_p
                let h = rz.realize(TruncatedElement::new(BasisElt::H(1), p), &lt);
                assert_eq!(h.affine, MultiPoly::constant(lam(p as u8)));
            }
        }
    }

    #[test]
    fn triangularity() {
        // realize(x[p]) only involves d/dx_q with q >= p.
        for rank in [1usize, 2] {
            let g = LieAlgebraData::build('A', rank).unwrap();
            let r = 2;
            let rz = Realizer::new(&g, r);
            let lt = WeightTuple::symbolic(0, rank, r);
            for b in g.basis() {
                for p in 0..=r {
                    let d = rz.realize(TruncatedElement::new(b, p), &lt);
                    for (&(_, q), poly) in &d.first {
                        if !poly.is_zero() {
                            assert!(q as usize >= p, "{b:?}[{p}] hits d/dx_{q}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rep_check_sl2_r2() {
        let g = sl2();
        let r = 2;
        let rz = Realizer::new(&g, r);
        let lt = WeightTuple::symbolic(0, 1, r);
        let elts: Vec<TruncatedElement> = g
            .basis()
            .into_iter()
            .flat_map(|b| (0..=r).map(move |p| TruncatedElement::new(b, p)))
            .collect();
        for &a in &elts {
            for &b in &elts {
                let (ok, diff) = rep_check(&rz, a, b, &lt);
                assert!(ok, "rep_check failed for {a:?},{b:?}: {}", diff.display(&g));
            }
        }
    }

    #[test]
    fn jet_rule_examples() {
        // x^β x^δ with p=0, q=1 → x0^β x1^δ + x1^β x0^δ
        let mono = XMono::var(XVar::new(0, 0)).mul(&XMono::var(XVar::new(1, 0)));
        let j = jet_of_monomial(&mono, 0, 1);
        let expect = MultiPoly::monomial(
            XMono::var(XVar::new(0, 0)).mul(&XMono::var(XVar::new(1, 1))),
            Scalar::one(),
        )
        .add(&MultiPoly::monomial(
            XMono::var(XVar::new(0, 1)).mul(&XMono::var(XVar::new(1, 0))),
            Scalar::one(),
        ));
        assert_eq!(j, expect);
        // constant 1 → 1 at budget 0, else 0
        assert_eq!(jet_of_monomial(&XMono::unit(), 0, 0), MultiPoly::one());
        assert!(jet_of_monomial(&XMono::unit(), 0, 2).is_zero());
        // single variable x^β, mode p, target q → x_{q-p}^β
        let j = jet_of_monomial(&XMono::var(XVar::new(0, 0)), 1, 2);
        assert_eq!(j, MultiPoly::var(XVar::new(0, 1)));
    }

    #[test]
    fn jet_lift_matches_trivialization() {
        // The confluent operators are the jet lifts of the r=0 data.
        for rank in [1usize, 2] {
            let g = LieAlgebraData::build('A', rank).unwrap();
            let r = 2;
            let rz0 = Realizer::new(&g, 0);
            let rz = Realizer::new(&g, r);
            let lt0 = WeightTuple::symbolic(0, rank, 0);
            let lt = WeightTuple::symbolic(0, rank, r);
            for b in g.basis() {
                let base = rz0.realize(TruncatedElement::new(b, 0), &lt0);
                for p in 0..=r {
                    let lifted = jet_lift(&base, p, r).unwrap();
                    let direct = rz.realize(TruncatedElement::new(b, p), &lt);
                    assert!(
                        lifted.sub(&direct).is_zero(),
                        "jet lift mismatch for {b:?}[{p}] rank {rank}"
                    );
                }
            }
        }
    }

    #[test]
    fn jet_lift_rejects_large_mode() {
        let g = sl2();
        let rz0 = Realizer::new(&g, 0);
        let lt0 = WeightTuple::symbolic(0, 1, 0);
        let f = rz0.realize(TruncatedElement::new(BasisElt::F(0), 0), &lt0);
        assert!(matches!(
            jet_lift(&f, 3, 2),
            Err(JetError::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn compute_p_examples() {
        let g = sl2();
        let rz0 = Realizer::new(&g, 0);
        let lt0 = WeightTuple::symbolic(0, 1, 0);
        // I = ∅ → 1
        assert_eq!(compute_p(&rz0, &[], &lt0), MultiPoly::one());
        // sl2, r=0, I = {(α,0),(α,0)} → λ0(λ0-1) x^2
        let p = compute_p(&rz0, &[(0, 0), (0, 0)], &lt0);
        let x = MultiPoly::var(XVar::new(0, 0));
        let expect = x.mul(&x).scale(&(&lam(0) * &(&lam(0) - &Scalar::one())));
        assert_eq!(p, expect);
        // sl2, I={(α,p)} at r: Σ_{i=p}^r λ_i x_{i-p}
        for r in 0..=2usize {
            let rz = Realizer::new(&g, r);
            let lt = WeightTuple::symbolic(0, 1, r);
            for p in 0..=r {
                let got = compute_p(&rz, &[(0, p)], &lt);
                let mut expect = MultiPoly::zero();
                for i in p..=r {
                    expect = expect.add(&MultiPoly::var(XVar::new(0, i - p)).scale(&lam(i as u8)));
                }
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn compute_p_agrees_with_verma_pairing() {
        // Mandatory dual-route check: operator iteration vs Z-expansion.
        let g = sl2();
        for r in 0..=2usize {
            let rz = Realizer::new(&g, r);
            let lt = WeightTuple::symbolic(0, 1, r);
            let mut words: Vec<Vec<(usize, usize)>> = vec![vec![]];
            for len in 1..=2usize {
                words.extend(mode_words(r, len));
            }
            for w in &words {
                let a = compute_p(&rz, w, &lt);
                let b = pair_via_verma(&g, r, w, &lt);
                assert_eq!(a, b, "word {w:?} at r={r}");
            }
        }
        // and an sl3 sample including the non-simple root
        let g = LieAlgebraData::build('A', 2).unwrap();
        let rz = Realizer::new(&g, 1);
        let lt = WeightTuple::symbolic(0, 2, 1);
        for w in [
            vec![(0usize, 0usize)],
            vec![(1, 1)],
            vec![(2, 0)],
            vec![(0, 0), (1, 0)],
            vec![(1, 0), (0, 1)],
        ] {
            let a = compute_p(&rz, &w, &lt);
            let b = pair_via_verma(&g, 1, &w, &lt);
            assert_eq!(a, b, "sl3 word {w:?}");
        }
    }

    fn mode_words(r: usize, len: usize) -> Vec<Vec<(usize, usize)>> {
        if len == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for w in mode_words(r, len - 1) {
            for p in 0..=r {
                let mut w2 = w.clone();
                w2.push((0, p));
                out.push(w2);
            }
        }
        out
    }

    #[test]
    fn screening_operator_matches_expanded_z() {
        // ⟨λ|e_α[p] Z f-word|λ⟩ equals S_α[p] applied to ⟨λ|Z f-word|λ⟩,
        // exhaustively for short words and spot-checked up to degree 4.
        let g = sl2();
        for r in 0..=2usize {
            let rz = Realizer::new(&g, r);
            let lt = WeightTuple::symbolic(0, 1, r);
            for p in 0..=r {
                let s = rz.screening(0, p);
                assert!(s.affine.is_zero(), "screening has affine part");
                for w in mode_words(r, 2).into_iter().chain(mode_words(r, 1)) {
                    let pw = pair_via_verma(&g, r, &w, &lt);
                    let lhs = s.apply(&pw);
                    // Direct expansion of ⟨λ|e[p] Z f-word|λ⟩: prepend e[p]
                    // to every expanded e-word.
                    let rhs = pair_with_left_e(&g, r, 0, p, &w, &lt);
                    assert_eq!(lhs, rhs, "r={r} p={p} w={w:?}");
                }
            }
        }
        // words of length 3 and 4 at r = 1: x-degree up to 4
        let r = 1usize;
        let rz = Realizer::new(&g, r);
        let lt = WeightTuple::symbolic(0, 1, r);
        let s = rz.screening(0, 1);
        for w in [
            vec![(0usize, 0usize), (0, 1), (0, 1)],
            vec![(0, 0), (0, 0), (0, 1), (0, 1)],
        ] {
            let pw = pair_via_verma(&g, r, &w, &lt);
            assert_eq!(
                pw,
                compute_p(&rz, &w, &lt),
                "route agreement len {}",
                w.len()
            );
            let lhs = s.apply(&pw);
            let rhs = pair_with_left_e(&g, r, 0, 1, &w, &lt);
            assert_eq!(lhs, rhs, "degree-4 check w={w:?}");
        }
    }

    fn pair_with_left_e(
        alg: &LieAlgebraData,
        r: usize,
        root_idx: usize,
        p: usize,
        word: &[(usize, usize)],
        lambda: &WeightTuple,
    ) -> MultiPoly {
        use crate::algebra::lie::TruncatedElement as TE;
        let fword: Vec<TE> = word
            .iter()
            .map(|&(ri, mode)| TE::new(BasisElt::F(ri as u8), mode))
            .collect();
        let max_deg: u32 = word
            .iter()
            .map(|&(ri, _)| alg.positive_roots[ri].height())
            .sum();
        let vars: Vec<(usize, usize)> = (0..alg.num_positive_roots())
            .flat_map(|ri| (0..=r).map(move |mode| (ri, mode)))
            .collect();
        let mut out = MultiPoly::zero();
        let mut fact = BigRational::from_integer(1.into());
        for m in 0..=max_deg as usize {
            if m > 0 {
                fact *= BigRational::from_integer(m.into());
            }
            let inv = Scalar::from_rational(BigRational::from_integer(1.into()) / &fact);
            for eword_vars in words_over(&vars, m) {
                let mut eword: Vec<TE> = vec![TE::new(BasisElt::E(root_idx as u8), p)];
                eword.extend(
                    eword_vars
                        .iter()
                        .map(|&(ri, mode)| TE::new(BasisElt::E(ri as u8), mode)),
                );
                let me = matrix_element(alg, r, &eword, &fword, lambda);
                if me.is_zero() {
                    continue;
                }
                let mut mono = XMono::unit();
                for &(ri, mode) in &eword_vars {
                    mono = mono.mul(&XMono::var(XVar::new(ri, mode)));
                }
                out = out.add(&MultiPoly::monomial(mono, &me * &inv));
            }
        }
        out
    }

    #[test]
    fn truncation_kills_commutator() {
        // [realize(e[1]), realize(f[1])] at r=1: bracket lands past the
        // truncation, so the operator commutator must vanish too.
        let g = sl2();
        let rz = Realizer::new(&g, 1);
        let lt = WeightTuple::symbolic(0, 1, 1);
        let e1 = rz.realize(TruncatedElement::new(BasisElt::E(0), 1), &lt);
        let f1 = rz.realize(TruncatedElement::new(BasisElt::F(0), 1), &lt);
        assert!(e1.commutator(&f1).is_zero());
    }
}
