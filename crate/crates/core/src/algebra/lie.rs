//! Simple Lie algebra data: root system, Cartan matrix, bilinear form and
//! Chevalley structure constants, plus the truncated current algebra g_(r).
//!
//! Series A is constructed from the matrix-unit realization of sl_{l+1},
//! which fixes every structure-constant sign once and for all.

use super::scalar::Scalar;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgebraError {
    #[error("unsupported algebra: series {series} rank {rank} (series A is supported)")]
    Unsupported { series: char, rank: usize },
}

/// A positive root as coefficients over the simple roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root(pub Vec<u8>);

impl Root {
    pub fn height(&self) -> u32 {
        self.0.iter().map(|&c| c as u32).sum()
    }

    pub fn name(&self) -> String {
        let mut parts = Vec::new();
        for (i, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                parts.push(format!("a{}", i + 1));
            }
        }
        parts.join("+")
    }
}

/// Chevalley basis element of g.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisElt {
    /// e_α for the positive root with this index.
    E(u8),
    /// f_α for the positive root with this index.
    F(u8),
    /// h_i, 1-based Cartan index.
    H(u8),
}

/// A mode x[p] = x ⊗ t^p of the truncated current algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncatedElement {
    pub base: BasisElt,
    pub mode: u8,
}

impl TruncatedElement {
    pub fn new(base: BasisElt, mode: usize) -> Self {
        TruncatedElement {
            base,
            mode: mode as u8,
        }
    }
}

/// Linear combination of basis elements with rational coefficients.
pub type LinComb = Vec<(BigRational, BasisElt)>;

/// Root data and structure constants of a simple Lie algebra.
#[derive(Clone, Debug)]
pub struct LieAlgebraData {
    pub series: char,
    pub rank: usize,
    pub positive_roots: Vec<Root>,
    pub cartan: Vec<Vec<i64>>,
    /// Gram matrix (α_i, α_j) of the simple roots, long roots normalized to 2.
    pub gram: Vec<Vec<BigRational>>,
    /// (ω_i, ω_j) for the fundamental weights; inverse of the Gram matrix.
    pub weight_form: Vec<Vec<BigRational>>,
    brackets: HashMap<(BasisElt, BasisElt), LinComb>,
    /// Invariant bilinear form on the Chevalley basis, normalized so long
    /// roots have square length 2 (trace form of the defining representation
    /// for series A).
    form: HashMap<(BasisElt, BasisElt), BigRational>,
}

impl LieAlgebraData {
    /// Chevalley data for the requested series and rank.
    pub fn build(series: char, rank: usize) -> Result<Self, AlgebraError> {
        if series != 'A' || rank == 0 {
            return Err(AlgebraError::Unsupported { series, rank });
        }
        Ok(Self::build_a(rank))
    }

    /// sl_{l+1} from matrix units.
    fn build_a(l: usize) -> Self {
        let n = l + 1;
        // Positive roots α_i + ... + α_{j-1} for 1 <= i < j <= n, i.e. E_ij.
        let mut positive_roots = Vec::new();
        let mut root_pos = HashMap::new();
        for h in 1..=l {
            for i in 0..l + 1 - h {
                let mut c = vec![0u8; l];
                for k in i..i + h {
                    c[k] = 1;
                }
                root_pos.insert((i, i + h), positive_roots.len());
                positive_roots.push(Root(c));
            }
        }
        // Sort by height then lexicographically, rebuild the position map.
        let mut order: Vec<usize> = (0..positive_roots.len()).collect();
        order.sort_by_key(|&k| {
            (
                positive_roots[k].height(),
                std::cmp::Reverse(positive_roots[k].0.clone()),
            )
        });
        let sorted: Vec<Root> = order.iter().map(|&k| positive_roots[k].clone()).collect();
        let mut pos_of_pair = HashMap::new();
        for (&(i, j), &old) in &root_pos {
            let new = order.iter().position(|&k| k == old).unwrap();
            pos_of_pair.insert((i, j), new);
        }
        let positive_roots = sorted;

        // Matrix-unit representation: map basis elements to n×n matrices.
        let pair_of_pos: HashMap<usize, (usize, usize)> =
            pos_of_pair.iter().map(|(&p, &k)| (k, p)).collect();
        let to_matrix = |b: BasisElt| -> Vec<Vec<BigRational>> {
            let mut m = vec![vec![BigRational::zero(); n]; n];
            match b {
                BasisElt::E(r) => {
                    let (i, j) = pair_of_pos[&(r as usize)];
                    m[i][j] = BigRational::one();
                }
                BasisElt::F(r) => {
                    let (i, j) = pair_of_pos[&(r as usize)];
                    m[j][i] = BigRational::one();
                }
                BasisElt::H(i) => {
                    let i = (i - 1) as usize;
                    m[i][i] = BigRational::one();
                    m[i + 1][i + 1] = -BigRational::one();
                }
            }
            m
        };

        let basis: Vec<BasisElt> = (0..positive_roots.len() as u8)
            .map(BasisElt::E)
            .chain((0..positive_roots.len() as u8).map(BasisElt::F))
            .chain((1..=l as u8).map(BasisElt::H))
            .collect();

        // Decompose a matrix in the basis. Off-diagonal entries map to E/F,
        // the trace-free diagonal to the h_i.
        let decompose = |m: &[Vec<BigRational>]| -> LinComb {
            let mut out = LinComb::new();
            for i in 0..n {
                for j in 0..n {
                    if i != j && !m[i][j].is_zero() {
                        let b = if i < j {
                            BasisElt::E(pos_of_pair[&(i, j)] as u8)
                        } else {
                            BasisElt::F(pos_of_pair[&(j, i)] as u8)
                        };
                        out.push((m[i][j].clone(), b));
                    }
                }
            }
            // diag = Σ c_i (e_ii - e_{i+1,i+1}) with c_i = Σ_{k<=i} d_k.
            let mut acc = BigRational::zero();
            for i in 0..l {
                acc += &m[i][i];
                if !acc.is_zero() {
                    out.push((acc.clone(), BasisElt::H((i + 1) as u8)));
                }
            }
            out
        };

        let mut brackets = HashMap::new();
        let mut form = HashMap::new();
        for &a in &basis {
            for &b in &basis {
                let ma = to_matrix(a);
                let mb = to_matrix(b);
                let mut tr = BigRational::zero();
                for i in 0..n {
                    for k in 0..n {
                        tr += &ma[i][k] * &mb[k][i];
                    }
                }
                if !tr.is_zero() {
                    form.insert((a, b), tr);
                }
                let mut comm = vec![vec![BigRational::zero(); n]; n];
                for i in 0..n {
                    for j in 0..n {
                        let mut s = BigRational::zero();
                        for k in 0..n {
                            s += &ma[i][k] * &mb[k][j];
                            s -= &mb[i][k] * &ma[k][j];
                        }
                        comm[i][j] = s;
                    }
                }
                let dec = decompose(&comm);
                if !dec.is_empty() {
                    brackets.insert((a, b), dec);
                }
            }
        }

        // Gram matrix of simple roots (normalization (α,α) = 2) and its inverse.
        let cartan: Vec<Vec<i64>> = (0..l)
            .map(|i| {
                (0..l)
                    .map(|j| {
                        if i == j {
                            2
                        } else if i.abs_diff(j) == 1 {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let gram: Vec<Vec<BigRational>> = cartan
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| BigRational::from(BigInt::from(v)))
                    .collect()
            })
            .collect();
        let weight_form = invert_matrix(&gram);

        LieAlgebraData {
            series: 'A',
            rank: l,
            positive_roots,
            cartan,
            gram,
            weight_form,
            brackets,
            form,
        }
    }

    /// Invariant bilinear form (x, y) on basis elements.
    pub fn form(&self, a: BasisElt, b: BasisElt) -> BigRational {
        self.form
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn root_index(&self, root: &Root) -> Option<usize> {
        self.positive_roots.iter().position(|r| r == root)
    }

    pub fn simple_root_index(&self, i: usize) -> usize {
        let mut c = vec![0u8; self.rank];
        c[i - 1] = 1;
        self.root_index(&Root(c)).expect("simple root present")
    }

    /// Dual Coxeter number (A_l: l + 1).
    pub fn dual_coxeter(&self) -> i64 {
        self.rank as i64 + 1
    }

    pub fn basis(&self) -> Vec<BasisElt> {
        (0..self.positive_roots.len() as u8)
            .map(BasisElt::E)
            .chain((0..self.positive_roots.len() as u8).map(BasisElt::F))
            .chain((1..=self.rank as u8).map(BasisElt::H))
            .collect()
    }

    /// [a, b] as a linear combination of basis elements.
    pub fn bracket(&self, a: BasisElt, b: BasisElt) -> LinComb {
        self.brackets.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Bracket in g_(r): [x[p], y[q]] = [x, y][p+q], zero past the truncation.
    pub fn truncated_bracket(
        &self,
        r: usize,
        a: TruncatedElement,
        b: TruncatedElement,
    ) -> Vec<(BigRational, TruncatedElement)> {
        let mode = a.mode as usize + b.mode as usize;
        if mode > r {
            return Vec::new();
        }
        self.bracket(a.base, b.base)
            .into_iter()
            .map(|(c, base)| (c, TruncatedElement::new(base, mode)))
            .collect()
    }

    /// α(h_i) for a positive root: the i-th Cartan value (i 1-based).
    pub fn root_on_h(&self, root_idx: usize, i: usize) -> i64 {
        let root = &self.positive_roots[root_idx];
        (0..self.rank)
            .map(|k| root.0[k] as i64 * self.cartan[i - 1][k])
            .sum()
    }

    /// Value of a general Cartan element Σ c_i h_i on a weight given by its
    /// components μ^i = μ(h_i): Σ c_i μ^i.
    pub fn eval_weight(&self, cartan_elt: &[(BigRational, u8)], weight: &[Scalar]) -> Scalar {
        let mut out = Scalar::zero();
        for (c, i) in cartan_elt {
            let term = &Scalar::from_rational(c.clone()) * &weight[(*i - 1) as usize];
            out = &out + &term;
        }
        out
    }

    /// Bilinear form of two weights from their h-value components.
    pub fn weight_pairing(&self, a: &[Scalar], b: &[Scalar]) -> Scalar {
        let mut out = Scalar::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                if a[i].is_zero() || b[j].is_zero() {
                    continue;
                }
                let w = Scalar::from_rational(self.weight_form[i][j].clone());
                out = &out + &(&(&a[i] * &b[j]) * &w);
            }
        }
        out
    }

    /// (α, μ) for a positive root α and weight μ with components μ^i.
    /// With the normalization (α_i, α_i) = 2 this is Σ_k c_k d_k μ^k; for
    /// series A all d_k = 1.
    pub fn root_weight_pairing(&self, root_idx: usize, weight: &[Scalar]) -> Scalar {
        let root = &self.positive_roots[root_idx];
        let mut out = Scalar::zero();
        for k in 0..self.rank {
            if root.0[k] == 0 {
                continue;
            }
            let c = Scalar::from_int(root.0[k] as i64);
            out = &out + &(&c * &weight[k]);
        }
        out
    }

    /// (α, β) for two positive roots.
    pub fn root_pairing(&self, a: usize, b: usize) -> BigRational {
        let ra = &self.positive_roots[a];
        let rb = &self.positive_roots[b];
        let mut out = BigRational::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                let c = ra.0[i] as i64 * rb.0[j] as i64;
                if c != 0 {
                    out += &self.gram[i][j] * BigRational::from(BigInt::from(c));
                }
            }
        }
        out
    }

    /// Components of a positive root as a weight: α(h_j).
    pub fn root_as_weight(&self, root_idx: usize) -> Vec<Scalar> {
        (1..=self.rank)
            .map(|j| Scalar::from_int(self.root_on_h(root_idx, j)))
            .collect()
    }

    /// Components of the Weyl vector ρ: ρ(h_i) = 1.
    pub fn rho_as_weight(&self) -> Vec<Scalar> {
        vec![Scalar::one(); self.rank]
    }

    /// Components of the coroot ν_i as a weight: ν_i(h_j) = (ν_i, ν_j).
    /// For series A this is the Cartan matrix row.
    pub fn coroot_as_weight(&self, i: usize) -> Vec<Scalar> {
        (0..self.rank)
            .map(|j| Scalar::from_int(self.cartan[i - 1][j]))
            .collect()
    }
}

impl fmt::Display for LieAlgebraData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "algebra {}{}", self.series, self.rank)?;
        writeln!(
            f,
            "positive roots: {}",
            self.positive_roots
                .iter()
                .map(|r| r.name())
                .collect::<Vec<_>>()
                .join(", ")
        )?;
        write!(f, "cartan matrix: {:?}", self.cartan)
    }
}

fn invert_matrix(m: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("invertible matrix");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                let t = &a[col][j] * &factor;
                a[r][j] -= t;
                let t = &inv[col][j] * &factor;
                inv[r][j] -= t;
            }
        }
    }
    inv
}
