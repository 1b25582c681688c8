//! Confluent Verma modules M(λ) of the truncated current algebra: PBW normal
//! ordering of enveloping-algebra words and exact matrix elements
//! ⟨λ| e-word · f-word |λ⟩.

use crate::algebra::lie::{BasisElt, LieAlgebraData, TruncatedElement};
use crate::algebra::scalar::{Param, Scalar};
use num_rational::BigRational;
use std::collections::BTreeMap;

/// The (r+1)-tuple of weights λ = (λ_0, ..., λ_r); each weight is stored by
/// its values on the Cartan generators, λ_p^i = λ_p(h_i).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTuple {
    pub tuple_id: u16,
    pub rank: usize,
    pub order: usize,
    /// comps[p][i-1] = λ_p^i.
    pub comps: Vec<Vec<Scalar>>,
}

impl WeightTuple {
    /// Fully symbolic tuple: component (p, i) is the formal parameter λ_p^i.
    pub fn symbolic(tuple_id: u16, rank: usize, order: usize) -> Self {
        let comps = (0..=order)
            .map(|p| {
                (1..=rank)
                    .map(|i| {
                        Scalar::param(Param::Lambda {
                            tuple: tuple_id,
                            mode: p as u8,
                            idx: i as u8,
                        })
                    })
                    .collect()
            })
            .collect();
        WeightTuple {
            tuple_id,
            rank,
            order,
            comps,
        }
    }

    pub fn numeric(tuple_id: u16, rank: usize, order: usize, comps: Vec<Vec<Scalar>>) -> Self {
        assert_eq!(comps.len(), order + 1, "need r+1 weights");
        assert!(comps.iter().all(|w| w.len() == rank));
        WeightTuple {
            tuple_id,
            rank,
            order,
            comps,
        }
    }

    /// λ_p as a weight-component vector.
    pub fn weight(&self, p: usize) -> &[Scalar] {
        &self.comps[p]
    }

    /// λ_p(h) for a general Cartan element h = Σ c_i h_i.
    pub fn eval(&self, p: usize, cartan_elt: &[(BigRational, u8)]) -> Scalar {
        let mut out = Scalar::zero();
        for (c, i) in cartan_elt {
            let t = &Scalar::from_rational(c.clone()) * &self.comps[p][(*i - 1) as usize];
            out = &out + &t;
        }
        out
    }

    /// Whether λ_r is regular: (λ_r, α) ≠ 0 for every positive root. Only
    /// decidable for numeric components; symbolic tuples are generically
    /// regular and return true.
    pub fn is_regular(&self, alg: &LieAlgebraData) -> bool {
        let top = &self.comps[self.order];
        (0..alg.num_positive_roots()).all(|ri| {
            let v = alg.root_weight_pairing(ri, top);
            v.as_rational()
                .map(|q| q != BigRational::from_integer(0.into()))
                .unwrap_or(true)
        })
    }
}

/// Monomial in the f_α[q], in the fixed PBW order.
pub type FMono = Vec<TruncatedElement>;

/// Element of M(λ) expanded over the PBW basis applied to v_λ.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PBWVector {
    pub terms: BTreeMap<FMono, Scalar>,
}

impl PBWVector {
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Scalar::one());
        PBWVector { terms }
    }

    pub fn zero() -> Self {
        PBWVector::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, mono: FMono, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(acc) => {
                *acc = &*acc + &coeff;
                if acc.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, coeff);
            }
        }
    }

    /// Coefficient of the highest-weight vector v_λ itself.
    pub fn vacuum_coefficient(&self) -> Scalar {
        self.terms
            .get(&Vec::new())
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }
}

/// PBW ordering of f-letters: by root height, then root index, then mode.
fn f_order_key(alg: &LieAlgebraData, t: &TruncatedElement) -> (u32, u8, u8) {
    match t.base {
        BasisElt::F(r) => (alg.positive_roots[r as usize].height(), r, t.mode),
        _ => unreachable!("f letters only"),
    }
}

/// Rewrite word · v_λ into PBW form. Letters act left to right: the last
/// letter of `word` hits v_λ first.
pub fn normal_order(
    alg: &LieAlgebraData,
    r: usize,
    word: &[TruncatedElement],
    lambda: &WeightTuple,
) -> PBWVector {
    assert_eq!(lambda.order, r, "weight tuple order must match truncation");
    let mut out = PBWVector::zero();
    // Work items: (coefficient, remaining word).
    let mut stack: Vec<(Scalar, Vec<TruncatedElement>)> = vec![(Scalar::one(), word.to_vec())];
    'items: while let Some((coeff, mut w)) = stack.pop() {
        // Reduce the rightmost non-f letter.
        loop {
            let pos = w.iter().rposition(|t| !matches!(t.base, BasisElt::F(_)));
            let Some(j) = pos else { break };
            if j == w.len() - 1 {
                match w[j].base {
                    BasisElt::E(_) => continue 'items, // e_α[p] v_λ = 0
                    BasisElt::H(i) => {
                        let ev = lambda.comps[w[j].mode as usize][(i - 1) as usize].clone();
                        if ev.is_zero() {
                            continue 'items;
                        }
                        let c = &coeff * &ev;
                        w.pop();
                        stack.push((c, w));
                        continue 'items;
                    }
                    BasisElt::F(_) => unreachable!(),
                }
            } else {
                // Swap X f -> f X + [X, f].
                let x = w[j];
                let y = w[j + 1];
                for (bc, t) in alg.truncated_bracket(r, x, y) {
                    let mut w2 = w.clone();
                    w2.remove(j + 1);
                    w2[j] = t;
                    stack.push((&coeff * &Scalar::from_rational(bc), w2));
                }
                w.swap(j, j + 1);
            }
        }
        // All-f word: sort into the PBW order with bracket corrections.
        let mut i = 1;
        while i < w.len() {
            if f_order_key(alg, &w[i - 1]) > f_order_key(alg, &w[i]) {
                for (bc, t) in alg.truncated_bracket(r, w[i - 1], w[i]) {
                    debug_assert!(matches!(t.base, BasisElt::F(_)));
                    let mut w2 = w.clone();
                    w2.remove(i);
                    w2[i - 1] = t;
                    stack.push((&coeff * &Scalar::from_rational(bc), w2));
                }
                w.swap(i - 1, i);
                if i > 1 {
                    i -= 1;
                }
            } else {
                i += 1;
            }
        }
        out.insert(w, coeff);
    }
    out
}

/// ⟨λ| e[p_1]...e[p_k] f[q_1]...f[q_s] |λ⟩: the words are concatenated in the
/// given order and the coefficient of v_λ extracted. Dual highest-weight
/// relations kill every PBW monomial with leftover f letters.
pub fn matrix_element(
    alg: &LieAlgebraData,
    r: usize,
    eword: &[TruncatedElement],
    fword: &[TruncatedElement],
    lambda: &WeightTuple,
) -> Scalar {
    let mut word: Vec<TruncatedElement> = Vec::with_capacity(eword.len() + fword.len());
    word.extend_from_slice(eword);
    word.extend_from_slice(fword);
    normal_order(alg, r, &word, lambda).vacuum_coefficient()
}

/// Convenience constructors for rank-wise simple-root letters.
pub fn e_letter(alg: &LieAlgebraData, simple: usize, mode: usize) -> TruncatedElement {
    TruncatedElement::new(BasisElt::E(alg.simple_root_index(simple) as u8), mode)
}

pub fn f_letter(alg: &LieAlgebraData, simple: usize, mode: usize) -> TruncatedElement {
    TruncatedElement::new(BasisElt::F(alg.simple_root_index(simple) as u8), mode)
}

pub fn h_letter(_alg: &LieAlgebraData, i: usize, mode: usize) -> TruncatedElement {
    TruncatedElement::new(BasisElt::H(i as u8), mode)
}
