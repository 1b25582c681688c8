//! Numeric quadrature of the confluent integral representations
//! ∫ Ψ(t, z, λ) ω(t, z) dt over concrete cycles: bounded segments between
//! singular points (regular case) and exponentially damped rays (irregular
//! case). Endpoint power singularities are absorbed by the tanh-sinh
//! substitution.

use super::psi::{psi_eval, NumericWeights, PsiError};
use super::value::{CorrelatorValue, PointVar};
use super::{CorrError, InsertionConfig};
use crate::algebra::scalar::Param;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("psi evaluation failed: {0}")]
    Psi(#[from] PsiError),
    #[error("correlator construction failed: {0}")]
    Corr(#[from] CorrError),
    #[error(
        "non-convergent cycle at {endpoint}: local exponent {exponent:.4} requires > -1 \
         (power) or negative damping (ray)"
    )]
    NonConvergent { endpoint: String, exponent: f64 },
    #[error("cycle count {given} does not match screening count {needed}")]
    CycleArity { given: usize, needed: usize },
}

/// Integration cycle for one screening variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cycle {
    /// Straight segment between two (possibly singular) endpoints.
    Segment { from: Complex64, to: Complex64 },
    /// Ray from a singular point in direction angle, damped by the irregular
    /// factor at the base point.
    Ray { from: Complex64, angle: f64 },
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Tanh-sinh quadrature on a straight segment, tolerant of integrable
/// endpoint singularities.
pub fn tanh_sinh<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    a: Complex64,
    b: Complex64,
    tol: f64,
) -> QuadResult {
    let span = b - a;
    let half_norm = span.norm() * 0.5;
    let mut evals = 0usize;
    let mut h = 1.0f64;
    // For node parameter s: u = (π/2) sinh s; the distance of the node from
    // the nearer endpoint is σ(-|u|) = 1/(1 + e^{2|u|}), computed without
    // cancellation so endpoint singularities are resolved to full precision.
    let node = |s: f64| -> (f64, f64) {
        let u = std::f64::consts::FRAC_PI_2 * s.sinh();
        let sigma_far = 1.0 / (1.0 + (2.0 * u.abs()).exp());
        // sech²(u) without overflow: (2 e^{-|u|} / (1 + e^{-2|u|}))².
        let sech = 2.0 * (-u.abs()).exp() / (1.0 + (-2.0 * u.abs()).exp());
        let w = std::f64::consts::FRAC_PI_2 * s.cosh() * sech * sech;
        (sigma_far, w)
    };
    // Evaluate the symmetric node pair at distance sigma from each endpoint.
    // Non-finite values only occur when sigma underflows onto a singular
    // endpoint; their true weighted contribution is zero.
    let s_max = 6.5;
    let midpoint = {
        evals += 1;
        f(a + span * 0.5) * std::f64::consts::FRAC_PI_2
    };
    let mut pair_eval = |sigma: f64| -> Complex64 {
        if sigma <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        evals += 2;
        let mut v = f(a + span * sigma);
        if !v.is_finite() {
            v = Complex64::new(0.0, 0.0);
        }
        let mut u = f(b - span * sigma);
        if !u.is_finite() {
            u = Complex64::new(0.0, 0.0);
        }
        v + u
    };
    let mut sum = {
        let mut s = midpoint;
        let mut k = 1;
        while (k as f64) * h <= s_max {
            let (sigma, w) = node(k as f64 * h);
            s += pair_eval(sigma) * w;
            k += 1;
        }
        s * h
    };
    let mut prev;
    let mut err = f64::INFINITY;
    for level in 0..12 {
        prev = sum;
        h *= 0.5;
        let mut add = Complex64::new(0.0, 0.0);
        let mut k = 1;
        while (k as f64) * h <= s_max {
            if k % 2 == 1 {
                let (sigma, w) = node(k as f64 * h);
                add += pair_eval(sigma) * w;
            }
            k += 1;
        }
        sum = prev * 0.5 + add * h;
        err = (sum - prev).norm();
        let scale = sum.norm().max(1e-300);
        if err <= tol * scale.max(1.0) && level >= 2 {
            break;
        }
    }
    QuadResult {
        value: sum * (span * 0.5),
        error_estimate: err * half_norm,
        evaluations: evals,
    }
}

/// Integral over a damped ray t = base + e^{iθ} s, s ∈ (0, ∞), via the
/// substitution s = e^u and trapezoidal refinement on u.
pub fn ray_quadrature<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    base: Complex64,
    angle: f64,
    tol: f64,
) -> QuadResult {
    let dir = Complex64::new(angle.cos(), angle.sin());
    let mut evals = 0usize;
    let mut g = |u: f64| -> Complex64 {
        evals += 1;
        let s = u.exp();
        f(base + dir * s) * dir * s
    };
    // Expand the truncation window until the integrand is negligible.
    let mut lo = -3.0f64;
    let mut hi = 3.0f64;
    let probe = |g: &mut dyn FnMut(f64) -> Complex64, u: f64| g(u).norm();
    for _ in 0..40 {
        if probe(&mut g, lo) > tol * 1e-3 {
            lo -= 1.5;
        } else {
            break;
        }
    }
    for _ in 0..40 {
        if probe(&mut g, hi) > tol * 1e-3 {
            hi += 1.5;
        } else {
            break;
        }
    }
    // Trapezoid with halving.
    let mut nsteps = 64usize;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut value = Complex64::new(0.0, 0.0);
    let mut err = f64::INFINITY;
    for level in 0..14 {
        let h = (hi - lo) / nsteps as f64;
        let mut s = (g(lo) + g(hi)) * 0.5;
        for k in 1..nsteps {
            s += g(lo + k as f64 * h);
        }
        value = s * h;
        if level > 0 {
            err = (value - prev).norm();
            let scale = value.norm().max(1.0);
            if err <= tol * scale {
                break;
            }
        }
        prev = value;
        nsteps *= 2;
    }
    QuadResult {
        value,
        error_estimate: err,
        evaluations: evals,
    }
}

/// Numerically integrate Ψ·ω over the given cycles (one per screening).
pub fn integrate(
    cfg: &InsertionConfig,
    weights: &NumericWeights,
    z: &[Complex64],
    cycles: &[Cycle],
    tol: f64,
) -> Result<QuadResult, IntegrateError> {
    cfg.validate()?;
    let m = cfg.screenings.len();
    if z.len() != cfg.primaries.len() {
        return Err(IntegrateError::Config(format!(
            "{} primary points expected, {} given",
            cfg.primaries.len(),
            z.len()
        )));
    }
    if cycles.len() != m {
        return Err(IntegrateError::CycleArity {
            given: cycles.len(),
            needed: m,
        });
    }
    if m > 2 {
        return Err(IntegrateError::Config(
            "quadrature supports at most two screening integrals".into(),
        ));
    }

    // m = 0: the integral degenerates to Ψ at the configuration.
    if m == 0 {
        let psi = psi_eval(&cfg.alg, &[], weights, &[], z)?;
        return Ok(QuadResult {
            value: psi.value,
            error_estimate: 0.0,
            evaluations: 1,
        });
    }

    let omega = super::omega::omega_ward(cfg)?;
    let assign = scalar_assignment(weights);

    for (i, cycle) in cycles.iter().enumerate() {
        check_cycle_with(cfg, weights, &omega, i, cycle, z)?;
    }

    let zs = z.to_vec();
    let eval_point = move |t: &[Complex64]| -> Complex64 {
        let psi = match psi_eval(&cfg.alg, &cfg.screenings, weights, t, &zs) {
            Ok(v) => v.value,
            Err(_) => return Complex64::new(0.0, 0.0), // singular node
        };
        let om = omega.eval(
            &|p| match p {
                PointVar::T(i) => t[i as usize],
                PointVar::Z(a) => zs[a as usize],
            },
            &|s| Complex64::new(s.eval(&assign).expect("numeric scalar"), 0.0),
        );
        psi * om
    };

    match m {
        1 => Ok(run_cycle(&cycles[0], tol, |t1| eval_point(&[t1]))),
        2 => {
            // Iterated integral: inner over t1, outer over t2.
            let inner_tol = tol * 0.1;
            let outer = run_cycle(&cycles[1], tol, |t2| {
                run_cycle(&cycles[0], inner_tol, |t1| eval_point(&[t1, t2])).value
            });
            Ok(outer)
        }
        _ => unreachable!(),
    }
}

fn run_cycle<F: FnMut(Complex64) -> Complex64>(cycle: &Cycle, tol: f64, f: F) -> QuadResult {
    match cycle {
        Cycle::Segment { from, to } => tanh_sinh(f, *from, *to, tol),
        Cycle::Ray { from, angle } => ray_quadrature(f, *from, *angle, tol),
    }
}

fn scalar_assignment(weights: &NumericWeights) -> impl Fn(Param) -> Option<f64> + '_ {
    move |p: Param| match p {
        Param::Kappa => Some(weights.kappa),
        Param::Level => None,
        Param::RCoeff(_) => None,
        Param::Lambda { tuple, mode, idx } => weights
            .lambda
            .get(tuple as usize)
            .and_then(|rows| rows.get(mode as usize))
            .and_then(|row| row.get((idx - 1) as usize))
            .copied(),
    }
}

fn involves_t(p: &super::value::PointPair, i: u8) -> bool {
    p.hi == PointVar::T(i) || p.lo == PointVar::T(i)
}

/// Cycle convergence diagnostics with the numeric weight table.
fn check_cycle_with(
    cfg: &InsertionConfig,
    weights: &NumericWeights,
    omega: &CorrelatorValue,
    i: usize,
    cycle: &Cycle,
    z: &[Complex64],
) -> Result<(), IntegrateError> {
    let root_idx = cfg.alg.simple_root_index(cfg.screenings[i]);
    let root = &cfg.alg.positive_roots[root_idx];
    let pair = |a: usize, p: usize| -> f64 {
        (0..cfg.alg.rank)
            .map(|k| root.0[k] as f64 * weights.lambda[a][p][k])
            .sum()
    };
    let local_exponent = |a: usize| -> f64 {
        let e_psi = -pair(a, 0) / weights.kappa;
        let pole = omega.max_power(PointVar::T(i as u8), PointVar::Z(a as u8)) as f64;
        e_psi - pole
    };
    match cycle {
        Cycle::Segment { from, to } => {
            for (a, &za) in z.iter().enumerate() {
                for (tag, pt) in [("from", *from), ("to", *to)] {
                    if (pt - za).norm() < 1e-14 {
                        if (1..=weights.order(a)).any(|p| pair(a, p) != 0.0) {
                            return Err(IntegrateError::NonConvergent {
                                endpoint: format!(
                                    "segment endpoint '{tag}' at z{} carries an essential \
                                     singularity; use a ray cycle",
                                    a + 1
                                ),
                                exponent: f64::NEG_INFINITY,
                            });
                        }
                        let e = local_exponent(a);
                        if e <= -1.0 {
                            return Err(IntegrateError::NonConvergent {
                                endpoint: format!("segment endpoint '{tag}' at z{}", a + 1),
                                exponent: e,
                            });
                        }
                    }
                }
            }
            Ok(())
        }
        Cycle::Ray { from, angle } => {
            let a = z
                .iter()
                .position(|&za| (from - za).norm() < 1e-14)
                .ok_or_else(|| {
                    IntegrateError::Config("ray base must coincide with a primary point".into())
                })?;
            let ra = weights.order(a);
            let p = (1..=ra).rev().find(|&p| pair(a, p) != 0.0).ok_or_else(|| {
                IntegrateError::Config(
                    "ray cycles need a nonzero irregular weight at the base point".into(),
                )
            })?;
            let c = pair(a, p) / weights.kappa / p as f64;
            let damping =
                (Complex64::new(c, 0.0) * Complex64::new(0.0, -(p as f64) * angle).exp()).re;
            if damping >= 0.0 {
                return Err(IntegrateError::NonConvergent {
                    endpoint: format!("ray base z{} (no damping along the ray)", a + 1),
                    exponent: damping,
                });
            }
            let mut e_inf = 0.0;
            for a2 in 0..z.len() {
                e_inf += -pair(a2, 0) / weights.kappa;
            }
            let min_pole = omega
                .terms
                .keys()
                .map(|k| {
                    k.iter()
                        .filter(|(pp, _)| involves_t(pp, i as u8))
                        .map(|(_, e)| *e)
                        .sum::<u32>()
                })
                .min()
                .unwrap_or(0) as f64;
            let e = e_inf - min_pole;
            if e >= -1.0 {
                return Err(IntegrateError::NonConvergent {
                    endpoint: "ray tail at infinity".into(),
                    exponent: e,
                });
            }
            Ok(())
        }
    }
}


#[cfg(test)]
mod integrate_tests {
    use super::*;
    use crate::algebra::lie::LieAlgebraData;
    use crate::correlators::{InsertionConfig, PrimaryDatum, PrimaryInsertion};
    use crate::verma::WeightTuple;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sl2_cfg(m: usize, prims: Vec<(usize, Vec<(usize, usize)>)>) -> InsertionConfig {
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

    #[test]
    fn no_screenings_returns_psi_value() {
        // m = 0: the "integral" is Ψ at the configuration.
        let cfg = sl2_cfg(0, vec![(0, vec![]), (0, vec![])]);
        let weights = NumericWeights {
            kappa: 2.0,
            lambda: vec![vec![vec![1.0]], vec![vec![3.0]]],
        };
        let z = [c(0.7), c(-0.4)];
        let out = integrate(&cfg, &weights, &z, &[], 1e-10).unwrap();
        let expect = (z[0] - z[1]).powf(3.0 / 4.0);
        assert!((out.value - expect).norm() < 1e-12);
    }

    #[test]
    fn two_screenings_match_manual_nesting() {
        // m = 2 iterated quadrature agrees with manually nested tanh-sinh.
        let cfg = sl2_cfg(2, vec![(0, vec![(1, 0), (1, 0)])]);
        let weights = NumericWeights {
            kappa: 2.6,
            lambda: vec![vec![vec![-1.1]]],
        };
        let z = [c(0.0)];
        // disjoint segments, both away from the singular point
        let cy1 = Cycle::Segment {
            from: c(1.0),
            to: c(2.0),
        };
        let cy2 = Cycle::Segment {
            from: c(3.0),
            to: c(4.0),
        };
        let got = integrate(&cfg, &weights, &z, &[cy1, cy2], 1e-10)
            .unwrap()
            .value;

        let omega = super::super::omega::omega_ward(&cfg).unwrap();
        let assign = scalar_assignment(&weights);
        let f = |t1: Complex64, t2: Complex64| -> Complex64 {
            let psi = psi_eval(&cfg.alg, &cfg.screenings, &weights, &[t1, t2], &z)
                .unwrap()
                .value;
            let om = omega.eval(
                &|p| match p {
                    PointVar::T(0) => t1,
                    PointVar::T(1) => t2,
                    PointVar::Z(_) => z[0],
                    _ => unreachable!(),
                },
                &|s| Complex64::new(s.eval(&assign).unwrap(), 0.0),
            );
            psi * om
        };
        let manual = tanh_sinh(
            |t2| tanh_sinh(|t1| f(t1, t2), c(1.0), c(2.0), 1e-11).value,
            c(3.0),
            c(4.0),
            1e-10,
        )
        .value;
        assert!(
            (got - manual).norm() < 1e-8 * manual.norm().max(1.0),
            "got {got}, manual {manual}"
        );
        assert!(got.norm() > 1e-6, "integral should be nonzero");
    }

    #[test]
    fn ray_without_damping_is_diagnosed() {
        let cfg = sl2_cfg(1, vec![(1, vec![(1, 1)])]);
        // positive irregular weight: ray along angle 0 grows
        let weights = NumericWeights {
            kappa: 2.3,
            lambda: vec![vec![vec![1.8], vec![0.9]]],
        };
        let z = [c(0.0)];
        let err = integrate(
            &cfg,
            &weights,
            &z,
            &[Cycle::Ray {
                from: z[0],
                angle: 0.0,
            }],
            1e-9,
        )
        .unwrap_err();
        assert!(matches!(err, IntegrateError::NonConvergent { .. }));
    }
}
