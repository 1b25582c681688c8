//! Numeric evaluation of the φ-sector master function Ψ(t, z, λ) and its
//! exact log-gradient. Power factors use principal branches; the value is
//! complex in general.
//!
//! ```text
//! log Ψ = Σ_{a<b} (λ_0^a, λ_0^b)/κ · ln(z_a - z_b)
//!       + Σ_{a<b} Σ_{p+q>0} (λ_p^a, λ_q^b)/κ C(p+q,p) (-1)^{p+1}/(p+q) (z_a-z_b)^{-(p+q)}
//!       + Σ_{i<j} (α_ī, α_j̄)/κ · ln(t_i - t_j)
//!       + Σ_{i,a} [ -(α_ī, λ_0^a)/κ · ln(t_i - z_a)
//!                  + Σ_{p=1}^{r_a} (α_ī, λ_p^a)/κ · (t_i - z_a)^{-p}/p ]
//! ```

use crate::algebra::lie::LieAlgebraData;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PsiError {
    #[error("singular configuration: points {0} and {1} coincide")]
    CoincidentPoints(String, String),
    #[error("weights for {needed} primaries required, {given} given")]
    WrongArity { needed: usize, given: usize },
}

/// Numeric weight data: lambda[a][p][i-1] = (λ^{(a)})_p(h_i), plus κ.
#[derive(Clone, Debug)]
pub struct NumericWeights {
    pub kappa: f64,
    pub lambda: Vec<Vec<Vec<f64>>>,
}

impl NumericWeights {
    pub fn order(&self, a: usize) -> usize {
        self.lambda[a].len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct MasterFunctionValue {
    pub log_value: Complex64,
    pub value: Complex64,
    pub grad_t: Vec<Complex64>,
    pub grad_z: Vec<Complex64>,
}

fn weight_pairing_f64(alg: &LieAlgebraData, a: &[f64], b: &[f64]) -> f64 {
    let mut out = 0.0;
    for i in 0..alg.rank {
        for j in 0..alg.rank {
            let w = rational_f64(&alg.weight_form[i][j]);
            out += a[i] * b[j] * w;
        }
    }
    out
}

fn root_weight_pairing_f64(alg: &LieAlgebraData, root_idx: usize, w: &[f64]) -> f64 {
    let root = &alg.positive_roots[root_idx];
    (0..alg.rank).map(|k| root.0[k] as f64 * w[k]).sum()
}

fn root_pairing_f64(alg: &LieAlgebraData, a: usize, b: usize) -> f64 {
    rational_f64(&alg.root_pairing(a, b))
}

fn rational_f64(r: &num_rational::BigRational) -> f64 {
    let n: f64 = r.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = r.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

fn binom_f64(n: usize, k: usize) -> f64 {
    let mut out = 1.0;
    for j in 0..k {
        out *= (n - j) as f64 / (k - j) as f64;
    }
    out
}

/// Evaluate Ψ and its exact log-gradient at a numeric configuration.
/// `screenings` lists the simple-root index (1-based) of each t insertion.
pub fn psi_eval(
    alg: &LieAlgebraData,
    screenings: &[usize],
    weights: &NumericWeights,
    t: &[Complex64],
    z: &[Complex64],
) -> Result<MasterFunctionValue, PsiError> {
    let m = t.len();
    let n = z.len();
    if weights.lambda.len() != n {
        return Err(PsiError::WrongArity {
            needed: n,
            given: weights.lambda.len(),
        });
    }
    assert_eq!(screenings.len(), m, "one simple root per screening point");
    // distinct points
    for i in 0..m {
        for j in i + 1..m {
            if t[i] == t[j] {
                return Err(PsiError::CoincidentPoints(
                    format!("t{}", i + 1),
                    format!("t{}", j + 1),
                ));
            }
        }
        for a in 0..n {
            if t[i] == z[a] {
                return Err(PsiError::CoincidentPoints(
                    format!("t{}", i + 1),
                    format!("z{}", a + 1),
                ));
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if z[a] == z[b] {
                return Err(PsiError::CoincidentPoints(
                    format!("z{}", a + 1),
                    format!("z{}", b + 1),
                ));
            }
        }
    }

    let kappa = weights.kappa;
    let mut log = Complex64::new(0.0, 0.0);
    let mut grad_t = vec![Complex64::new(0.0, 0.0); m];
    let mut grad_z = vec![Complex64::new(0.0, 0.0); n];

    // z-z power and irregular factors.
    for a in 0..n {
        for b in a + 1..n {
            let d = z[a] - z[b];
            let e0 = weight_pairing_f64(alg, &weights.lambda[a][0], &weights.lambda[b][0]) / kappa;
            log += e0 * d.ln();
            grad_z[a] += e0 / d;
            grad_z[b] -= e0 / d;
            for p in 0..=weights.order(a) {
                for q in 0..=weights.order(b) {
                    if p + q == 0 {
                        continue;
                    }
                    let pairing =
                        weight_pairing_f64(alg, &weights.lambda[a][p], &weights.lambda[b][q]);
                    let sign = if p % 2 == 0 { -1.0 } else { 1.0 };
                    let c = pairing / kappa * binom_f64(p + q, p) * sign / (p + q) as f64;
                    if c == 0.0 {
                        continue;
                    }
                    let s = (p + q) as f64;
                    let inv = d.powf(-s);
                    log += c * inv;
                    let dterm = -s * c * d.powf(-s - 1.0);
                    grad_z[a] += dterm;
                    grad_z[b] -= dterm;
                }
            }
        }
    }

    // t-t power factors.
    for i in 0..m {
        for j in i + 1..m {
            let e = root_pairing_f64(
                alg,
                alg.simple_root_index(screenings[i]),
                alg.simple_root_index(screenings[j]),
            ) / kappa;
            let d = t[i] - t[j];
            log += e * d.ln();
            grad_t[i] += e / d;
            grad_t[j] -= e / d;
        }
    }

    // t-z power and irregular factors.
    for i in 0..m {
        let root = alg.simple_root_index(screenings[i]);
        for a in 0..n {
            let d = t[i] - z[a];
            let e0 = -root_weight_pairing_f64(alg, root, &weights.lambda[a][0]) / kappa;
            log += e0 * d.ln();
            grad_t[i] += e0 / d;
            grad_z[a] -= e0 / d;
            for p in 1..=weights.order(a) {
                let c = root_weight_pairing_f64(alg, root, &weights.lambda[a][p]) / kappa;
                if c == 0.0 {
                    continue;
                }
                let s = p as f64;
                log += c / s * d.powf(-s);
                let dterm = -c * d.powf(-s - 1.0);
                grad_t[i] += dterm;
                grad_z[a] -= dterm;
            }
        }
    }

    Ok(MasterFunctionValue {
        log_value: log,
        value: log.exp(),
        grad_t,
        grad_z,
    })
}
