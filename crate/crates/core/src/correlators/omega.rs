//! The βγ correlator ω = ⟨ Π S_ī(t_i) Π P_a(γ(z_a)) ⟩ by three routes:
//! the screening-currents Ward recursion, a direct Wick-contraction oracle,
//! and the sl2 closed form over ordered index partitions.

use super::value::{CorrelatorValue, PointVar};
use super::{CorrError, InsertionConfig, PrimaryDatum};
use crate::algebra::lie::{BasisElt, LieAlgebraData, TruncatedElement};
use crate::algebra::multipoly::MultiPoly;
use crate::algebra::scalar::Scalar;
use crate::diffreal::{jet_lift, DiffOp, Realizer};
use crate::verma::{matrix_element, WeightTuple};
use num_rational::BigRational;

/// ω through the Ward identity: remove the first screening into bracket
/// insertions on later screenings and mode insertions on the primaries.
pub fn omega_ward(cfg: &InsertionConfig) -> Result<CorrelatorValue, CorrError> {
    cfg.validate()?;
    let realizer = Realizer::new(&cfg.alg, 0);
    let screens: Vec<(DiffOp, u8)> = cfg
        .screenings
        .iter()
        .enumerate()
        .map(|(i, &simple)| {
            (
                realizer.screening(cfg.alg.simple_root_index(simple), 0),
                i as u8,
            )
        })
        .collect();
    let prims: Vec<(MultiPoly, usize, u8)> = cfg
        .primary_polys()?
        .into_iter()
        .enumerate()
        .map(|(a, p)| (p, cfg.primaries[a].lambda.order, a as u8))
        .collect();
    ward_rec(&cfg.alg, &screens, &prims)
}

fn ward_rec(
    alg: &LieAlgebraData,
    screens: &[(DiffOp, u8)],
    prims: &[(MultiPoly, usize, u8)],
) -> Result<CorrelatorValue, CorrError> {
    let Some((head, rest)) = screens.split_first() else {
        let mut c = Scalar::one();
        for (p, _, _) in prims {
            let ct = p.constant_term();
            if ct.is_zero() {
                return Ok(CorrelatorValue::zero());
            }
            c = &c * &ct;
        }
        return Ok(CorrelatorValue::constant(c));
    };
    let one = Scalar::one();
    let mut out = CorrelatorValue::zero();
    // Bracket insertions [S_head, S_i](t_i).
    for i in 0..rest.len() {
        let bracket = head.0.commutator(&rest[i].0);
        if bracket.is_zero() {
            continue;
        }
        let mut s2 = rest.to_vec();
        s2[i].0 = bracket;
        let sub = ward_rec(alg, &s2, prims)?;
        out = out.add(&sub.mul_inverse_power(PointVar::T(head.1), PointVar::T(rest[i].1), 1, &one));
    }
    // Mode insertions (S_head[p] P_a)(z_a).
    for a in 0..prims.len() {
        let (pa, ra, zi) = &prims[a];
        for p in 0..=*ra {
            let lifted = jet_lift(&head.0, p, *ra).map_err(CorrError::Jet)?;
            let applied = lifted.vector_apply(pa);
            if applied.is_zero() {
                continue;
            }
            let mut pr2 = prims.to_vec();
            pr2[a].0 = applied;
            let sub = ward_rec(alg, rest, &pr2)?;
            out = out.add(&sub.mul_inverse_power(
                PointVar::T(head.1),
                PointVar::Z(*zi),
                (p + 1) as u32,
                &one,
            ));
        }
    }
    Ok(out)
}

/// Independent oracle: the free-field expectation as a sum over complete
/// β–γ contraction patterns. ⟨1⟩ = 1 and any nonconstant normal-ordered
/// monomial has vanishing expectation, so every β and γ must pair up.
pub fn omega_wick(cfg: &InsertionConfig) -> Result<CorrelatorValue, CorrError> {
    cfg.validate()?;
    let realizer = Realizer::new(&cfg.alg, 0);

    // Choices per insertion: a screening contributes one β and a γ-monomial
    // of its coefficient polynomial; a primary contributes a γ-jet monomial.
    struct Choice {
        coeff: Scalar,
        betas: Vec<(PointVar, u8)>,
        gammas: Vec<(PointVar, u8, u8)>, // (point, root, jet)
    }
    let mut insertion_choices: Vec<Vec<Choice>> = Vec::new();
    for (i, &simple) in cfg.screenings.iter().enumerate() {
        let op = realizer.screening(cfg.alg.simple_root_index(simple), 0);
        let mut choices = Vec::new();
        for (&(root, mode0), poly) in &op.first {
            debug_assert_eq!(mode0, 0);
            for (mono, c) in &poly.terms {
                let gammas = mono
                    .factors()
                    .into_iter()
                    .map(|v| (PointVar::T(i as u8), v.root, v.mode))
                    .collect();
                choices.push(Choice {
                    coeff: c.clone(),
                    betas: vec![(PointVar::T(i as u8), root)],
                    gammas,
                });
            }
        }
        insertion_choices.push(choices);
    }
    let polys = cfg.primary_polys()?;
    for (a, poly) in polys.iter().enumerate() {
        let mut choices = Vec::new();
        for (mono, c) in &poly.terms {
            let mut coeff = c.clone();
            let mut gammas = Vec::new();
            for v in mono.factors() {
                gammas.push((PointVar::Z(a as u8), v.root, v.mode));
                coeff = &coeff
                    * &Scalar::from_rational(BigRational::new(
                        1.into(),
                        crate::ope::factorial_big(v.mode as u64),
                    ));
            }
            choices.push(Choice {
                coeff,
                betas: Vec::new(),
                gammas,
            });
        }
        insertion_choices.push(choices);
    }

    // Cartesian product over insertion choices, then perfect matchings.
    fn product_rec(
        all: &[Vec<Choice>],
        idx: usize,
        acc_coeff: Scalar,
        betas: &mut Vec<(PointVar, u8)>,
        gammas: &mut Vec<(PointVar, u8, u8)>,
        out: &mut CorrelatorValue,
    ) {
        if idx == all.len() {
            if betas.len() != gammas.len() {
                return;
            }
            let mut used = vec![false; gammas.len()];
            match_rec(
                betas,
                gammas,
                &mut used,
                0,
                acc_coeff,
                CorrelatorValue::constant(Scalar::one()),
                out,
            );
            return;
        }
        for ch in &all[idx] {
            if ch.coeff.is_zero() {
                continue;
            }
            let nb = betas.len();
            let ng = gammas.len();
            betas.extend_from_slice(&ch.betas);
            gammas.extend_from_slice(&ch.gammas);
            product_rec(all, idx + 1, &acc_coeff * &ch.coeff, betas, gammas, out);
            betas.truncate(nb);
            gammas.truncate(ng);
        }
    }

    fn match_rec(
        betas: &[(PointVar, u8)],
        gammas: &[(PointVar, u8, u8)],
        used: &mut Vec<bool>,
        b: usize,
        coeff: Scalar,
        factor: CorrelatorValue,
        out: &mut CorrelatorValue,
    ) {
        if b == betas.len() {
            *out = out.add(&factor.scale(&coeff));
            return;
        }
        let (bp, broot) = betas[b];
        for (g, &(gp, groot, jet)) in gammas.iter().enumerate() {
            if used[g] || groot != broot || gp == bp {
                continue;
            }
            // β(u) ∂^b γ(v) = b!/(u - v)^{b+1}
            let c = Scalar::from_rational(BigRational::from_integer(crate::ope::factorial_big(
                jet as u64,
            )));
            let f2 = factor.mul_inverse_power(bp, gp, (jet + 1) as u32, &c);
            used[g] = true;
            match_rec(betas, gammas, used, b + 1, coeff.clone(), f2, out);
            used[g] = false;
        }
    }

    let mut out = CorrelatorValue::zero();
    let mut betas = Vec::new();
    let mut gammas = Vec::new();
    product_rec(
        &insertion_choices,
        0,
        Scalar::one(),
        &mut betas,
        &mut gammas,
        &mut out,
    );
    Ok(out)
}

/// sl2 closed form: ω = Σ over ordered partitions (I_1,...,I_n) of the
/// screening set, Π_a P(a, I_a), with
/// P(a, I) = Σ_{p_1..p_k} [S[p_1]⋯S[p_k]P_a] / Π_j (t_{i_j} - z_a)^{p_j+1}
/// and the constant terms given by Verma matrix elements.
pub fn omega_sl2_closed(cfg: &InsertionConfig) -> Result<CorrelatorValue, CorrError> {
    cfg.validate()?;
    if cfg.alg.rank != 1 {
        return Err(CorrError::Unsupported(
            "the closed form is only implemented for sl2".into(),
        ));
    }
    let m = cfg.screenings.len();
    let n = cfg.primaries.len();
    if n == 0 {
        // No primaries: a screening β has nothing to pair with.
        return Ok(if m == 0 {
            CorrelatorValue::constant(Scalar::one())
        } else {
            CorrelatorValue::zero()
        });
    }
    let words: Vec<Vec<usize>> = cfg
        .primaries
        .iter()
        .map(|p| match &p.datum {
            PrimaryDatum::Word(w) => Ok(w.iter().map(|&(_, mode)| mode).collect()),
            PrimaryDatum::Poly(_) => Err(CorrError::Unsupported(
                "the closed form needs primary data given as f-words".into(),
            )),
        })
        .collect::<Result<_, _>>()?;

    let mut out = CorrelatorValue::zero();
    let mut assign = vec![0usize; m];
    loop {
        // fibers of the current assignment
        let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &a) in assign.iter().enumerate() {
            fibers[a].push(i);
        }
        let mut term = CorrelatorValue::constant(Scalar::one());
        let mut dead = false;
        for a in 0..n {
            let pa = p_block(cfg, a, &words[a], &fibers[a])?;
            if pa.is_zero_trivially() {
                dead = true;
                break;
            }
            term = term.mul(&pa);
        }
        if !dead {
            out = out.add(&term);
        }
        // next assignment (odometer over {0..n-1}^m)
        if m == 0 {
            break;
        }
        let mut k = 0;
        loop {
            assign[k] += 1;
            if assign[k] < n {
                break;
            }
            assign[k] = 0;
            k += 1;
            if k == m {
                break;
            }
        }
        if k == m {
            break;
        }
    }
    Ok(out)
}

/// P(a, I): sum over mode vectors of matrix elements with the displayed
/// denominators.
fn p_block(
    cfg: &InsertionConfig,
    a: usize,
    word_modes: &[usize],
    fiber: &[usize],
) -> Result<CorrelatorValue, CorrError> {
    let ra = cfg.primaries[a].lambda.order;
    let one = Scalar::one();
    let mut out = CorrelatorValue::zero();
    let k = fiber.len();
    let mut pvec = vec![0usize; k];
    loop {
        let me = closed_constant_term(cfg, a, word_modes, &pvec)?;
        if !me.is_zero() {
            let mut term = CorrelatorValue::constant(me);
            for (j, &i) in fiber.iter().enumerate() {
                term = term.mul_inverse_power(
                    PointVar::T(i as u8),
                    PointVar::Z(a as u8),
                    (pvec[j] + 1) as u32,
                    &one,
                );
            }
            out = out.add(&term);
        }
        if k == 0 {
            break;
        }
        let mut c = 0;
        loop {
            pvec[c] += 1;
            if pvec[c] <= ra {
                break;
            }
            pvec[c] = 0;
            c += 1;
            if c == k {
                break;
            }
        }
        if c == k {
            break;
        }
    }
    Ok(out)
}

/// [S[p_1]⋯S[p_k] P_a] = ⟨λ| e[p_k]⋯e[p_1] f[q_1]⋯f[q_s] |λ⟩.
fn closed_constant_term(
    cfg: &InsertionConfig,
    a: usize,
    word_modes: &[usize],
    pvec: &[usize],
) -> Result<Scalar, CorrError> {
    let lambda: &WeightTuple = &cfg.primaries[a].lambda;
    let ra = lambda.order;
    let root = cfg.alg.simple_root_index(1) as u8;
    let eword: Vec<TruncatedElement> = pvec
        .iter()
        .rev()
        .map(|&p| TruncatedElement::new(BasisElt::E(root), p))
        .collect();
    let fword: Vec<TruncatedElement> = word_modes
        .iter()
        .map(|&q| TruncatedElement::new(BasisElt::F(root), q))
        .collect();
    Ok(matrix_element(&cfg.alg, ra, &eword, &fword, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::lie::LieAlgebraData;
    use crate::algebra::scalar::Scalar;
    use crate::correlators::{InsertionConfig, PrimaryDatum, PrimaryInsertion};

    fn config(
        rank: usize,
        screenings: Vec<usize>,
        prims: Vec<(usize, Vec<(usize, usize)>)>, // (r_a, word)
    ) -> InsertionConfig {
        let alg = LieAlgebraData::build('A', rank).unwrap();
        let primaries = prims
            .into_iter()
            .enumerate()
            .map(|(a, (r, word))| PrimaryInsertion {
                lambda: crate::verma::WeightTuple::symbolic(a as u16, rank, r),
                datum: PrimaryDatum::Word(word),
            })
            .collect();
        InsertionConfig {
            alg,
            screenings,
            primaries,
        }
    }

    fn lam(a: u16, p: u8) -> Scalar {
        Scalar::lambda(a, p, 1)
    }

    #[test]
    fn single_step_formula() {
        // m=1, n=1, r=0, P = f: ω = λ_0/(t1 - z1)
        let cfg = config(1, vec![1], vec![(0, vec![(1, 0)])]);
        let w = omega_ward(&cfg).unwrap();
        let expect = CorrelatorValue::constant(lam(0, 0)).mul_inverse_power(
            PointVar::T(0),
            PointVar::Z(0),
            1,
            &Scalar::one(),
        );
        assert!(w.equals(&expect), "got {}", w.canonical_string());
        // the wick oracle and the closed form agree
        assert!(omega_wick(&cfg).unwrap().equals(&expect));
        assert!(omega_sl2_closed(&cfg).unwrap().equals(&expect));
    }

    #[test]
    fn two_screenings_squared_word() {
        // m=2, n=1, r=0, P = f²: ω = 2λ(λ-1)/((t1-z)(t2-z))
        let cfg = config(1, vec![1, 1], vec![(0, vec![(1, 0), (1, 0)])]);
        let w = omega_ward(&cfg).unwrap();
        let c = &(&Scalar::from_int(2) * &lam(0, 0)) * &(&lam(0, 0) - &Scalar::one());
        let expect = CorrelatorValue::constant(c)
            .mul_inverse_power(PointVar::T(0), PointVar::Z(0), 1, &Scalar::one())
            .mul_inverse_power(PointVar::T(1), PointVar::Z(0), 1, &Scalar::one());
        assert!(w.equals(&expect), "ward: {}", w.canonical_string());
        assert!(omega_wick(&cfg).unwrap().equals(&expect));
        assert!(omega_sl2_closed(&cfg).unwrap().equals(&expect));
    }

    #[test]
    fn base_case_and_mismatches() {
        // m=0: product of constant terms; nonempty word has zero constant term
        let cfg = config(1, vec![], vec![(1, vec![(1, 1)])]);
        assert!(omega_ward(&cfg).unwrap().is_zero());
        assert!(omega_wick(&cfg).unwrap().is_zero());
        assert!(omega_sl2_closed(&cfg).unwrap().is_zero());
        let cfg = config(1, vec![], vec![(1, vec![])]);
        let one = CorrelatorValue::constant(Scalar::one());
        assert!(omega_ward(&cfg).unwrap().equals(&one));
        // degree mismatch: more screenings than γ budget → 0
        let cfg = config(1, vec![1, 1], vec![(0, vec![(1, 0)])]);
        assert!(omega_ward(&cfg).unwrap().is_zero());
        assert!(omega_wick(&cfg).unwrap().is_zero());
        assert!(omega_sl2_closed(&cfg).unwrap().is_zero());
    }

    #[test]
    fn sl2_grid_triple_agreement() {
        // words of length <= 2 with modes <= r <= 1, m <= 2, n <= 2: a quick
        // version of the acceptance grid.
        for r1 in 0..=1usize {
            let mut words1: Vec<Vec<(usize, usize)>> = vec![vec![]];
            for p in 0..=r1 {
                words1.push(vec![(1, p)]);
                for q in 0..=r1 {
                    words1.push(vec![(1, p), (1, q)]);
                }
            }
            for w1 in &words1 {
                for m in 0..=2usize {
                    let cfg = config(1, vec![1; m], vec![(r1, w1.clone())]);
                    let ward = omega_ward(&cfg).unwrap();
                    let wick = omega_wick(&cfg).unwrap();
                    let closed = omega_sl2_closed(&cfg).unwrap();
                    assert!(
                        ward.equals(&wick),
                        "ward≠wick m={m} r={r1} w={w1:?}: {} vs {}",
                        ward.canonical_string(),
                        wick.canonical_string()
                    );
                    assert!(ward.equals(&closed), "ward≠closed m={m} r={r1} w={w1:?}");
                }
            }
        }
        // two primaries
        let cfg = config(1, vec![1, 1], vec![(1, vec![(1, 1)]), (0, vec![(1, 0)])]);
        let ward = omega_ward(&cfg).unwrap();
        let wick = omega_wick(&cfg).unwrap();
        let closed = omega_sl2_closed(&cfg).unwrap();
        assert!(ward.equals(&wick));
        assert!(ward.equals(&closed));
        assert!(!ward.is_zero());
    }

    #[test]
    fn sl3_mixed_roots_bracket_insertion() {
        // Different screening roots exercise the [S_1, S_2] bracket route.
        let cfg = config(2, vec![1, 2], vec![(0, vec![(1, 0), (2, 0)])]);
        let ward = omega_ward(&cfg).unwrap();
        let wick = omega_wick(&cfg).unwrap();
        assert!(
            ward.equals(&wick),
            "sl3 ward: {}\nwick: {}",
            ward.canonical_string(),
            wick.canonical_string()
        );
        assert!(!ward.is_zero());
        // non-simple-root word against two screenings
        let cfg = config(2, vec![1, 2], vec![(1, vec![(1, 1), (2, 0)])]);
        let ward = omega_ward(&cfg).unwrap();
        let wick = omega_wick(&cfg).unwrap();
        assert!(ward.equals(&wick), "sl3 r=1 mixed");
    }

    #[test]
    fn permutation_symmetry_same_root() {
        // ω invariant under permuting same-root screening points.
        let cfg = config(
            1,
            vec![1, 1, 1],
            vec![(1, vec![(1, 0), (1, 1)]), (1, vec![(1, 1)])],
        );
        let ward = omega_ward(&cfg).unwrap();
        assert!(!ward.is_zero());
        let swapped = ward.relabel(&|p| match p {
            PointVar::T(0) => PointVar::T(2),
            PointVar::T(2) => PointVar::T(0),
            other => other,
        });
        assert!(ward.equals(&swapped), "not symmetric under t1<->t3");
    }
}
