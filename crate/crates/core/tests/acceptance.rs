//! Acceptance suite: every check prints one PASS/FAIL line and asserts
//! exactness or the stated numeric tolerance.

use confluent_cft::algebra::lie::{BasisElt, LieAlgebraData, TruncatedElement};
use confluent_cft::algebra::multipoly::MultiPoly;
use confluent_cft::algebra::scalar::Scalar;
use confluent_cft::correlators::{
    integrate, omega_sl2_closed, omega_ward, omega_wick, psi_eval, Cycle, InsertionConfig,
    NumericWeights, PointVar, PrimaryDatum, PrimaryInsertion,
};
use confluent_cft::diffreal::{compute_p, jet_lift, rep_check, Realizer};
use confluent_cft::ope::currents::{
    build_currents, relation_residual, screening_residuals, solve_r_coeffs, CurrentSet, Relation,
};
use confluent_cft::ope::primary::{
    dbar, mode_action, primary_field, t_phi_ope, vertex_field, virasoro_commutator,
};
use confluent_cft::ope::Field;
use confluent_cft::verma::{matrix_element, WeightTuple};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn report(criterion: u32, name: &str, ok: bool, detail: &str) {
    if ok {
        println!("PASS criterion {criterion}: {name}");
    } else {
        println!("FAIL criterion {criterion}: {name} — {detail}");
    }
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn solved(alg: &LieAlgebraData) -> CurrentSet {
    build_currents(alg, &solve_r_coeffs(alg).unwrap()).unwrap()
}

// 1. Representation property: rep_check exact for every pair of Chevalley
// mode generators, sl2 and sl3, r <= 3.
#[test]
fn criterion_1_representation_property() {
    let mut failures = Vec::new();
    for rank in [1usize, 2] {
        let alg = LieAlgebraData::build('A', rank).unwrap();
        for r in 0..=3usize {
            let mut rz = Realizer::new(&alg, r);
            let lambda = WeightTuple::symbolic(0, rank, r);
            rz.warm_up(&lambda);
            let elts: Vec<TruncatedElement> = alg
                .basis()
                .into_iter()
                .flat_map(|b| (0..=r).map(move |p| TruncatedElement::new(b, p)))
                .collect();
            for &a in &elts {
                for &b in &elts {
                    let (ok, _) = rep_check(&rz, a, b, &lambda);
                    if !ok {
                        failures.push(format!("A{rank} r={r} [{a:?},{b:?}]"));
                    }
                }
            }
        }
    }
    report(
        1,
        "representation property (sl2, sl3; r <= 3; all basis pairs)",
        failures.is_empty(),
        &failures.join(", "),
    );
}

// 2. Wakimoto OPE suite with solved r_i: all six relations for sl2; the
// H-H and H-E/F relations for sl3. Exact identities in κ with k = κ - h^∨.
#[test]
fn criterion_2_wakimoto_ope_suite() {
    let mut failures = Vec::new();
    for rank in [1usize, 2] {
        let alg = LieAlgebraData::build('A', rank).unwrap();
        let cur = solved(&alg);
        for rel in Relation::suite(&alg) {
            let residual = relation_residual(&alg, &cur, rel).unwrap();
            if !residual.is_empty() {
                failures.push(format!("A{rank} {}", rel.label()));
            }
        }
    }
    report(
        2,
        "Wakimoto current OPE relations (sl2 full set; sl3 H relations)",
        failures.is_empty(),
        &failures.join(", "),
    );
}

// 3. Screening-current products: E s and H s regular; F s and T s with their
// exact displayed singular parts (sl2).
#[test]
fn criterion_3_screening_suite() {
    let alg = LieAlgebraData::build('A', 1).unwrap();
    let cur = solved(&alg);
    let mut failures = Vec::new();
    for (label, residual) in screening_residuals(&alg, &cur).unwrap() {
        if !residual.is_empty() {
            failures.push(label);
        }
    }
    report(
        3,
        "screening current products (regularity and displayed singular parts)",
        failures.is_empty(),
        &failures.join(", "),
    );
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

// 4. Confluent primary module structure: iterated f-mode actions reproduce
// the P polynomials for all words of length <= 3 with modes <= r <= 2;
// e-annihilation and h-eigenvalues; X[n]Φ = 0 for r < n <= r+3.
#[test]
fn criterion_4_primary_module_structure() {
    let alg = LieAlgebraData::build('A', 1).unwrap();
    let cur = solved(&alg);
    let mut failures = Vec::new();
    for r in 0..=2usize {
        let lambda = WeightTuple::symbolic(0, 1, r);
        let rz = Realizer::new(&alg, r);
        let mut words: Vec<Vec<(usize, usize)>> = vec![vec![]];
        for len in 1..=3usize {
            words.extend(mode_words(r, len));
        }
        for word in &words {
            let mut phi = vertex_field(&lambda);
            for &(_, mode) in word.iter().rev() {
                phi = mode_action(&alg, &cur.f[0], mode as i64, &phi).unwrap();
            }
            let p = compute_p(&rz, word, &lambda);
            if !phi.sub(&primary_field(&p, &lambda)).is_zero() {
                failures.push(format!("r={r} word={word:?}"));
            }
        }
        // annihilation and eigenvalues, including above the truncation
        let v = vertex_field(&lambda);
        for p in 0..=r + 3 {
            let e = mode_action(&alg, &cur.e[0], p as i64, &v).unwrap();
            if !e.is_zero() {
                failures.push(format!("r={r} e[{p}]v != 0"));
            }
            let h = mode_action(&alg, &cur.h[0], p as i64, &v).unwrap();
            let expect = if p <= r {
                v.scale(&Scalar::lambda(0, p as u8, 1))
            } else {
                Field::zero()
            };
            if !h.sub(&expect).is_zero() {
                failures.push(format!("r={r} h[{p}]v mismatch"));
            }
        }
        // mode vanishing above the truncation on a nontrivial Φ
        let p = compute_p(&rz, &mode_words(r, 2)[0], &lambda);
        let phi = primary_field(&p, &lambda);
        for n in (r as i64 + 1)..=(r as i64 + 3) {
            for c in [&cur.e[0], &cur.h[0], &cur.f[0]] {
                if !mode_action(&alg, c, n, &phi).unwrap().is_zero() {
                    failures.push(format!("r={r} X[{n}]Φ != 0"));
                }
            }
        }
    }
    report(
        4,
        "confluent primary module structure (words <= 3, modes <= r <= 2, sl2)",
        failures.is_empty(),
        &failures.join(", "),
    );
}

// 5. T(z)Φ(w) decomposition exact (sl2, r <= 2, P of degree <= 2);
// [L_-1, Φ] = ∂Φ; the n = 0 commutator matches the falling-factorial
// formula.
#[test]
fn criterion_5_energy_momentum_expansion() {
    let alg = LieAlgebraData::build('A', 1).unwrap();
    let cur = solved(&alg);
    let mut failures = Vec::new();
    for r in 0..=2usize {
        let lambda = WeightTuple::symbolic(0, 1, r);
        let rz = Realizer::new(&alg, r);
        let mut polys: Vec<MultiPoly> = vec![MultiPoly::one()];
        for w in mode_words(r, 1).iter().chain(mode_words(r, 2).iter()) {
            polys.push(compute_p(&rz, w, &lambda));
        }
        for p in &polys {
            let rep = t_phi_ope(&alg, &cur, p, &lambda).unwrap();
            if !rep.is_exact() {
                failures.push(format!("r={r} decomposition residual"));
                continue;
            }
            // [L_{-1}, Φ] = ∂Φ exactly
            let lm1 = virasoro_commutator(&alg, &cur, p, &lambda, -1).unwrap();
            let dphi = primary_field(p, &lambda).derivative();
            let got = lm1.terms.get(&0).cloned().unwrap_or_else(Field::zero);
            if lm1.terms.len() > 1 || !got.sub(&dphi).is_zero() {
                failures.push(format!("r={r} [L_-1, Φ] != ∂Φ"));
            }
            // n = 0: falling factorials (n+1)!/(n-k)! keep only k = 0:
            // [L_0, Φ] = w ∂Φ + D̄_0 Φ + ((λ0,λ0)/2κ + (ρ,λ0)/κ) Φ
            let l0 = virasoro_commutator(&alg, &cur, p, &lambda, 0).unwrap();
            let phi = primary_field(p, &lambda);
            let lam0 = Scalar::lambda(0, 0, 1);
            let two_k = &Scalar::kappa() * &Scalar::from_int(2);
            let weight = &(&(&lam0 * &lam0) * &Scalar::from_ratio(1, 2)) / &two_k;
            let rho_term = &(&lam0 * &Scalar::from_ratio(1, 2)) / &Scalar::kappa();
            let mut expect_w0 = phi.scale(&(&weight + &rho_term));
            if r >= 1 {
                expect_w0 = expect_w0.add(&dbar(&alg, 0, p, &lambda));
            }
            let got_w1 = l0.terms.get(&1).cloned().unwrap_or_else(Field::zero);
            let got_w0 = l0.terms.get(&0).cloned().unwrap_or_else(Field::zero);
            if !got_w1.sub(&phi.derivative()).is_zero() || !got_w0.sub(&expect_w0).is_zero() {
                failures.push(format!("r={r} [L_0, Φ] corollary mismatch"));
            }
        }
    }
    report(
        5,
        "energy-momentum expansion and Virasoro commutators (sl2, r <= 2)",
        failures.is_empty(),
        &failures.join(", "),
    );
}

fn sl2_config(m: usize, prims: Vec<(usize, Vec<(usize, usize)>)>) -> InsertionConfig {
    let alg = LieAlgebraData::build('A', 1).unwrap();
    let primaries = prims
        .into_iter()
        .enumerate()
        .map(|(a, (r, word))| PrimaryInsertion {
            lambda: WeightTuple::symbolic(a as u16, 1, r),
            datum: PrimaryDatum::Word(word),
        })
        .collect();
    InsertionConfig {
        alg,
        screenings: vec![1; m],
        primaries,
    }
}

fn words_up_to(r: usize, max_len: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for len in 1..=max_len {
        out.extend(mode_words(r, len));
    }
    out
}

// 6. Correlator triple agreement on the exhaustive sl2 grid and randomized
// sl3 spot checks.
#[test]
fn criterion_6_correlator_triple_agreement() {
    let mut failures = Vec::new();
    // sl2 exhaustive: m <= 3, n <= 2, r_a <= 2, words of length <= 2
    // (words as 1-based simple-root indices with modes).
    let singles: Vec<(usize, Vec<(usize, usize)>)> = (0..=2usize)
        .flat_map(|r| {
            words_up_to(r, 2).into_iter().map(move |w| {
                (
                    r,
                    w.into_iter().map(|(_, p)| (1usize, p)).collect::<Vec<_>>(),
                )
            })
        })
        .collect();
    for m in 0..=3usize {
        for p1 in &singles {
            // n = 1
            let cfg = sl2_config(m, vec![p1.clone()]);
            let ward = omega_ward(&cfg).unwrap();
            let wick = omega_wick(&cfg).unwrap();
            let closed = omega_sl2_closed(&cfg).unwrap();
            if !ward.equals(&wick) || !ward.equals(&closed) {
                failures.push(format!("n=1 m={m} p={p1:?}"));
            }
        }
    }
    // n = 2 with the full word grid at m <= 3
    for m in 0..=3usize {
        for p1 in &singles {
            for p2 in &singles {
                let cfg = sl2_config(m, vec![p1.clone(), p2.clone()]);
                let ward = omega_ward(&cfg).unwrap();
                let wick = omega_wick(&cfg).unwrap();
                let closed = omega_sl2_closed(&cfg).unwrap();
                if !ward.equals(&wick) || !ward.equals(&closed) {
                    failures.push(format!("n=2 m={m} p1={p1:?} p2={p2:?}"));
                    if failures.len() > 5 {
                        report(
                            6,
                            "correlator triple agreement",
                            false,
                            &failures.join(", "),
                        );
                    }
                }
            }
        }
    }
    // sl3 randomized spot checks, m <= 2: ward vs wick.
    let alg3 = LieAlgebraData::build('A', 2).unwrap();
    let mut rng = StdRng::seed_from_u64(20260808);
    for _ in 0..12 {
        let m = rng.gen_range(0..=2usize);
        let n = rng.gen_range(1..=2usize);
        let screenings: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=2usize)).collect();
        let primaries: Vec<PrimaryInsertion> = (0..n)
            .map(|a| {
                let r = rng.gen_range(0..=1usize);
                let len = rng.gen_range(0..=2usize);
                let word: Vec<(usize, usize)> = (0..len)
                    .map(|_| (rng.gen_range(1..=2usize), rng.gen_range(0..=r)))
                    .collect();
                PrimaryInsertion {
                    lambda: WeightTuple::symbolic(a as u16, 2, r),
                    datum: PrimaryDatum::Word(word),
                }
            })
            .collect();
        let cfg = InsertionConfig {
            alg: alg3.clone(),
            screenings: screenings.clone(),
            primaries,
        };
        let ward = omega_ward(&cfg).unwrap();
        let wick = omega_wick(&cfg).unwrap();
        if !ward.equals(&wick) {
            failures.push(format!("sl3 m={m} n={n} s={screenings:?}"));
        }
    }
    report(
        6,
        "correlator triple agreement (sl2 grid; sl3 random ward = wick)",
        failures.is_empty(),
        &failures.join(", "),
    );
}

// 7. Constant-term identity: screening-operator constant terms equal Verma
// matrix elements for all e-words k <= 3 against f-words <= 3, r <= 2.
#[test]
fn criterion_7_constant_term_identity() {
    let alg = LieAlgebraData::build('A', 1).unwrap();
    let mut failures = Vec::new();
    for r in 0..=2usize {
        let rz = Realizer::new(&alg, r);
        let lambda = WeightTuple::symbolic(0, 1, r);
        // jet-lifted screening operators S[p]
        let s0 = rz.screening(0, 0);
        let s_ops: Vec<_> = (0..=r).map(|p| jet_lift(&s0, p, r).unwrap()).collect();
        let fwords = words_up_to(r, 3);
        let ewords = words_up_to(r, 3);
        for fw in &fwords {
            let p = compute_p(&rz, fw, &lambda);
            let fletters: Vec<TruncatedElement> = fw
                .iter()
                .map(|&(_, q)| TruncatedElement::new(BasisElt::F(0), q))
                .collect();
            for ew in &ewords {
                // diffreal route: S[p_1] applied first
                let mut poly = p.clone();
                for &(_, pk) in ew {
                    poly = s_ops[pk].vector_apply(&poly);
                }
                let ct = poly.constant_term();
                // verma route: ⟨λ| e[p_k]...e[p_1] f-word |λ⟩
                let eletters: Vec<TruncatedElement> = ew
                    .iter()
                    .rev()
                    .map(|&(_, pk)| TruncatedElement::new(BasisElt::E(0), pk))
                    .collect();
                let me = matrix_element(&alg, r, &eletters, &fletters, &lambda);
                if !(&ct - &me).is_zero() {
                    failures.push(format!("r={r} e={ew:?} f={fw:?}"));
                }
            }
        }
    }
    report(
        7,
        "constant-term identity (screening ops vs Verma matrix elements)",
        failures.is_empty(),
        &failures.join(", "),
    );
}

// 8. Master-function log-gradient vs central finite differences at 100
// random regular configurations, relative error < 1e-8.
#[test]
fn criterion_8_master_function_gradient() {
    let mut rng = StdRng::seed_from_u64(42_2026);
    let alg1 = LieAlgebraData::build('A', 1).unwrap();
    let alg2 = LieAlgebraData::build('A', 2).unwrap();
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let rank = if case % 3 == 0 { 2 } else { 1 };
        let alg = if rank == 1 { &alg1 } else { &alg2 };
        let m = rng.gen_range(0..=2usize);
        let n = rng.gen_range(1..=2usize);
        let screenings: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=rank)).collect();
        let lambda: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|_| {
                let r = rng.gen_range(0..=2usize);
                (0..=r)
                    .map(|_| (0..rank).map(|_| rng.gen_range(-2.0..2.0)).collect())
                    .collect()
            })
            .collect();
        let weights = NumericWeights {
            kappa: rng.gen_range(1.5..4.0),
            lambda,
        };
        // well-separated points on a jittered line
        let mut pts: Vec<Complex64> = Vec::new();
        for k in 0..(m + n) {
            pts.push(Complex64::new(
                k as f64 * 1.5 + rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.2..0.2),
            ));
        }
        let (t, z) = pts.split_at(m);
        let v = psi_eval(alg, &screenings, &weights, t, z).unwrap();
        let h = 1e-6;
        let mut check = |which: usize, is_t: bool, grad: Complex64| {
            let mut tp = t.to_vec();
            let mut zp = z.to_vec();
            let mut tm = t.to_vec();
            let mut zm = z.to_vec();
            if is_t {
                tp[which] += h;
                tm[which] -= h;
            } else {
                zp[which] += h;
                zm[which] -= h;
            }
            let fp = psi_eval(alg, &screenings, &weights, &tp, &zp)
                .unwrap()
                .log_value;
            let fm = psi_eval(alg, &screenings, &weights, &tm, &zm)
                .unwrap()
                .log_value;
            let fd = (fp - fm) / (2.0 * h);
            let rel = (fd - grad).norm() / (1.0 + grad.norm());
            if rel > worst {
                worst = rel;
            }
        };
        for i in 0..m {
            check(i, true, v.grad_t[i]);
        }
        for a in 0..n {
            check(a, false, v.grad_z[a]);
        }
    }
    report(
        8,
        &format!("master-function log-gradient vs finite differences (worst rel err {worst:.2e})"),
        worst < 1e-8,
        &format!("worst relative error {worst:.2e} >= 1e-8"),
    );
}

// 9. Hypergeometric reduction: the r = 0, n = 2, m = 1 quadrature satisfies
// the Gauss hypergeometric ODE (residual < 1e-6 via numeric
// differentiation); the r = 1 confluent integral is stable under cycle
// re-parameterization to < 1e-5 relative.
#[test]
fn criterion_9_hypergeometric_reduction() {
    // --- part (a): Gauss ODE residual ---
    let alg = LieAlgebraData::build('A', 1).unwrap();
    let (l1, l2, kappa) = (-1.3f64, -0.7f64, 2.1f64);
    let cfg = InsertionConfig {
        alg: alg.clone(),
        screenings: vec![1],
        primaries: vec![
            PrimaryInsertion {
                lambda: WeightTuple::symbolic(0, 1, 0),
                datum: PrimaryDatum::Word(vec![(1, 0)]),
            },
            PrimaryInsertion {
                lambda: WeightTuple::symbolic(1, 1, 0),
                datum: PrimaryDatum::Word(vec![]),
            },
        ],
    };
    let weights = NumericWeights {
        kappa,
        lambda: vec![vec![vec![l1]], vec![vec![l2]]],
    };
    let f = |x: f64| -> Complex64 {
        let z = [Complex64::new(0.0, 0.0), Complex64::new(x, 0.0)];
        let cycles = [Cycle::Segment {
            from: z[0],
            to: z[1],
        }];
        integrate(&cfg, &weights, &z, &cycles, 1e-12).unwrap().value
    };
    let x0 = 1.7f64;
    let h = 0.05f64;
    let fm2 = f(x0 - 2.0 * h);
    let fm1 = f(x0 - h);
    let f0 = f(x0);
    let fp1 = f(x0 + h);
    let fp2 = f(x0 + 2.0 * h);
    let d1 = (-fp2 + fp1 * 8.0 - fm1 * 8.0 + fm2) / (12.0 * h);
    let d2 = (-fp2 + fp1 * 16.0 - f0 * 30.0 + fm1 * 16.0 - fm2) / (12.0 * h * h);
    // Derived Gauss parameters: the integral is C·x^ρ with
    // ρ = l1 l2 /(2κ) - (l1+l2)/κ, a solution of the hypergeometric equation
    // with (a, b, c) = (0, -ρ, 1-ρ).
    let rho = l1 * l2 / (2.0 * kappa) - (l1 + l2) / kappa;
    let (a, b, c) = (0.0, -rho, 1.0 - rho);
    let residual = Complex64::new(x0 * (1.0 - x0), 0.0) * d2
        + Complex64::new(c - (a + b + 1.0) * x0, 0.0) * d1
        - Complex64::new(a * b, 0.0) * f0;
    let scale = (x0 * (1.0 - x0)).abs() * d2.norm()
        + (c - (a + b + 1.0) * x0).abs() * d1.norm()
        + f0.norm();
    let rel_a = residual.norm() / scale.max(1e-300);
    let ok_a = rel_a < 1e-6;

    // --- part (b): r = 1 confluent ray, re-parameterization stability ---
    let (l0, l1c, kappa_c) = (1.8f64, -1.1f64, 2.3f64);
    let cfg_c = InsertionConfig {
        alg: alg.clone(),
        screenings: vec![1],
        primaries: vec![PrimaryInsertion {
            lambda: WeightTuple::symbolic(0, 1, 1),
            datum: PrimaryDatum::Word(vec![(1, 1)]),
        }],
    };
    let weights_c = NumericWeights {
        kappa: kappa_c,
        lambda: vec![vec![vec![l0], vec![l1c]]],
    };
    let z = [Complex64::new(0.0, 0.0)];
    let i1 = integrate(
        &cfg_c,
        &weights_c,
        &z,
        &[Cycle::Ray {
            from: z[0],
            angle: 0.0,
        }],
        1e-11,
    )
    .unwrap()
    .value;
    // independent parameterization: t = v/(1-v), v ∈ (0,1), via tanh-sinh
    let omega = omega_ward(&cfg_c).unwrap();
    let assign = |p: confluent_cft::algebra::scalar::Param| -> Option<f64> {
        use confluent_cft::algebra::scalar::Param;
        match p {
            Param::Kappa => Some(kappa_c),
            Param::Lambda { mode: 0, .. } => Some(l0),
            Param::Lambda { mode: 1, .. } => Some(l1c),
            _ => None,
        }
    };
    let integrand = |t: Complex64| -> Complex64 {
        let psi = psi_eval(&alg, &[1], &weights_c, &[t], &z).unwrap().value;
        let om = omega.eval(
            &|p| match p {
                PointVar::T(_) => t,
                PointVar::Z(_) => z[0],
            },
            &|s| Complex64::new(s.eval(&assign).unwrap(), 0.0),
        );
        psi * om
    };
    let i2 = confluent_cft::correlators::quad::tanh_sinh(
        |v: Complex64| {
            let one = Complex64::new(1.0, 0.0);
            let t = v / (one - v);
            let jac = (one - v).powi(-2);
            integrand(t) * jac
        },
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        1e-11,
    )
    .value;
    let rel_b = (i1 - i2).norm() / i1.norm().max(1e-300);
    let ok_b = rel_b < 1e-5;

    report(
        9,
        &format!(
            "hypergeometric reduction (Gauss ODE rel residual {rel_a:.2e}; \
             ray re-parameterization rel diff {rel_b:.2e})"
        ),
        ok_a && ok_b,
        &format!("ODE residual {rel_a:.2e} (tol 1e-6), reparam diff {rel_b:.2e} (tol 1e-5)"),
    );
}
