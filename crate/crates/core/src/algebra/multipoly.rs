//! Sparse multivariate polynomials in the variables x_q^α (α a positive
//! root, q a mode index) with exact `Scalar` coefficients.

use super::scalar::Scalar;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// A polynomial variable: positive root index and mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XVar {
    pub root: u8,
    pub mode: u8,
}

impl XVar {
    pub fn new(root: usize, mode: usize) -> Self {
        XVar {
            root: root as u8,
            mode: mode as u8,
        }
    }
}

/// Monomial: sorted list of (variable, exponent), exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct XMono(pub Vec<(XVar, u8)>);

impl XMono {
    pub fn unit() -> Self {
        XMono(Vec::new())
    }

    pub fn var(v: XVar) -> Self {
        XMono(vec![(v, 1)])
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e as u32).sum()
    }

    pub fn mul(&self, other: &XMono) -> XMono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0, self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        XMono(out)
    }

    pub fn exponent_of(&self, v: XVar) -> u8 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    /// The list of variables with multiplicity, e.g. x·y^2 → [x, y, y].
    pub fn factors(&self) -> Vec<XVar> {
        let mut out = Vec::new();
        for &(v, e) in &self.0 {
            for _ in 0..e {
                out.push(v);
            }
        }
        out
    }
}

fn cmp_xmono(a: &XMono, b: &XMono) -> Ordering {
    match a.degree().cmp(&b.degree()) {
        Ordering::Equal => {}
        o => return o,
    }
    let (mut i, mut j) = (0, 0);
    while i < a.0.len() && j < b.0.len() {
        match a.0[i].0.cmp(&b.0[j].0) {
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
            Ordering::Equal => match a.0[i].1.cmp(&b.0[j].1) {
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                o => return o,
            },
        }
    }
    match (i < a.0.len(), j < b.0.len()) {
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => Ordering::Equal,
    }
}

impl PartialOrd for XMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for XMono {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_xmono(self, other)
    }
}

/// Sparse multivariate polynomial over `Scalar`, canonical sparse form:
/// terms sorted ascending, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultiPoly {
    pub terms: Vec<(XMono, Scalar)>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        MultiPoly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        if c.is_zero() {
            MultiPoly::zero()
        } else {
            MultiPoly {
                terms: vec![(XMono::unit(), c)],
            }
        }
    }

    pub fn var(v: XVar) -> Self {
        MultiPoly {
            terms: vec![(XMono::var(v), Scalar::one())],
        }
    }

    pub fn monomial(m: XMono, c: Scalar) -> Self {
        if c.is_zero() {
            MultiPoly::zero()
        } else {
            MultiPoly {
                terms: vec![(m, c)],
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_map(map: BTreeMap<XMono, Scalar>) -> Self {
        MultiPoly {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match cmp_xmono(&self.terms[i].0, &other.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        MultiPoly { terms: out }
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        if self.is_zero() || other.is_zero() {
            return MultiPoly::zero();
        }
        let mut map: BTreeMap<XMono, Scalar> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match map.get_mut(&m) {
                    Some(acc) => *acc = &*acc + &c,
                    None => {
                        map.insert(m, c);
                    }
                }
            }
        }
        MultiPoly::from_map(map)
    }

    pub fn scale(&self, c: &Scalar) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Partial derivative ∂/∂x_v.
    pub fn derivative(&self, v: XVar) -> MultiPoly {
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent_of(v);
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            for pair in m2.0.iter_mut() {
                if pair.0 == v {
                    pair.1 -= 1;
                }
            }
            m2.0.retain(|&(_, e)| e > 0);
            let c2 = c * &Scalar::from_int(e as i64);
            match map.get_mut(&m2) {
                Some(acc) => *acc = &*acc + &c2,
                None => {
                    map.insert(m2, c2);
                }
            }
        }
        MultiPoly::from_map(map)
    }

    /// Value at x = 0: the coefficient of the empty monomial.
    pub fn constant_term(&self) -> Scalar {
        self.terms
            .iter()
            .find(|(m, _)| m.is_unit())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Scalar::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn map_coeffs<F: Fn(&Scalar) -> Scalar>(&self, f: F) -> MultiPoly {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Display with explicit root names; `single_root` suppresses the root tag.
    pub fn display(&self, root_names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let single = root_names.len() == 1;
        let mut out = String::new();
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                out.push_str(" + ");
            }
            let coeff = c.to_string();
            let coeff_simple = c.numer().terms.len() <= 1 && c.denom().terms.len() <= 1;
            if m.is_unit() {
                if coeff_simple {
                    out.push_str(&coeff);
                } else {
                    out.push_str(&format!("({coeff})"));
                }
                continue;
            }
            let mut factors: Vec<String> = Vec::new();
            if !c.is_one() {
                if coeff_simple {
                    factors.push(coeff);
                } else {
                    factors.push(format!("({coeff})"));
                }
            }
            for &(v, e) in &m.0 {
                let base = if single {
                    format!("x{}", v.mode)
                } else {
                    format!("x{}[{}]", v.mode, root_names[v.root as usize])
                };
                if e > 1 {
                    factors.push(format!("{base}^{e}"));
                } else {
                    factors.push(base);
                }
            }
            out.push_str(&factors.join("·"));
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Fallback without root names: x{mode}[r{root}].
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<String> = (0..=self
            .terms
            .iter()
            .flat_map(|(m, _)| m.0.iter().map(|&(v, _)| v.root))
            .max()
            .unwrap_or(0))
            .map(|r| format!("r{r}"))
            .collect();
        write!(f, "{}", self.display(&names))
    }
}
