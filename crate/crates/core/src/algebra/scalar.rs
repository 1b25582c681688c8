//! Exact scalars: rational functions in the formal parameters λ, k, κ, r_i
//! with rational coefficients.
//!
//! All arithmetic is exact. Equality is decided by cross-multiplication, so
//! it does not depend on fractions being fully reduced. The reduction pass
//! cancels rational content, common monomial factors and exact polynomial
//! quotients, which keeps every fraction produced by the engine (denominators
//! are powers of κ) in lowest terms with a monic denominator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A formal parameter adjoined to the rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    /// The level k.
    Level,
    /// The boson normalization κ.
    Kappa,
    /// Unknown coefficient r_i of ∂γ^{α_i} while solving the current ansatz.
    RCoeff(u8),
    /// Weight component λ_mode(h_idx) of weight tuple `tuple` (idx is 1-based).
    Lambda { tuple: u16, mode: u8, idx: u8 },
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Level => write!(f, "k"),
            Param::Kappa => write!(f, "κ"),
            Param::RCoeff(i) => write!(f, "r{i}"),
            Param::Lambda { tuple, mode, idx } => {
                write!(f, "λ")?;
                if *tuple > 0 {
                    write!(f, "({tuple})")?;
                }
                write!(f, "{mode}")?;
                if *idx > 1 {
                    write!(f, "[{idx}]")?;
                }
                Ok(())
            }
        }
    }
}

/// Monomial in the parameters: sorted list of (parameter, exponent).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PMono(pub Vec<(Param, u32)>);

impl PMono {
    pub fn unit() -> Self {
        PMono(Vec::new())
    }

    pub fn var(p: Param) -> Self {
        PMono(vec![(p, 1)])
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn mul(&self, other: &PMono) -> PMono {
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
        PMono(out)
    }

    /// Exact monomial quotient self / other, if other divides self.
    pub fn div(&self, other: &PMono) -> Option<PMono> {
        let mut out = Vec::new();
        let mut i = 0;
        for &(p, e) in &other.0 {
            loop {
                if i >= self.0.len() {
                    return None;
                }
                if self.0[i].0 < p {
                    out.push(self.0[i]);
                    i += 1;
                } else {
                    break;
                }
            }
            if self.0[i].0 != p || self.0[i].1 < e {
                return None;
            }
            if self.0[i].1 > e {
                out.push((p, self.0[i].1 - e));
            }
            i += 1;
        }
        out.extend_from_slice(&self.0[i..]);
        Some(PMono(out))
    }

    pub fn exponent_of(&self, p: Param) -> u32 {
        self.0
            .iter()
            .find(|&&(q, _)| q == p)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }
}

/// Graded-lexicographic order: total degree first, then lex on the variables.
fn cmp_mono(a: &PMono, b: &PMono) -> Ordering {
    match a.degree().cmp(&b.degree()) {
        Ordering::Equal => {}
        o => return o,
    }
    let (mut i, mut j) = (0, 0);
    while i < a.0.len() && j < b.0.len() {
        match a.0[i].0.cmp(&b.0[j].0) {
            // Earlier variable present means lexicographically larger.
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
            Ordering::Equal => match a.0[i].1.cmp(&b.0[j].1) {
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
                Ordering::Less => return Ordering::Less,
                Ordering::Greater => return Ordering::Greater,
            },
        }
    }
    match (i < a.0.len(), j < b.0.len()) {
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => Ordering::Equal,
    }
}

impl PartialOrd for PMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PMono {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_mono(self, other)
    }
}

/// Sparse polynomial in the parameters over exact rationals.
/// Terms are kept sorted ascending in the monomial order, no zero terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ParamPoly {
    pub terms: Vec<(PMono, BigRational)>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        ParamPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        if c.is_zero() {
            ParamPoly::zero()
        } else {
            ParamPoly {
                terms: vec![(PMono::unit(), c)],
            }
        }
    }

    pub fn var(p: Param) -> Self {
        ParamPoly {
            terms: vec![(PMono::var(p), BigRational::one())],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_unit() && self.terms[0].1.is_one()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            Some(BigRational::zero())
        } else if self.terms.len() == 1 && self.terms[0].0.is_unit() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    fn from_map(map: BTreeMap<PMono, BigRational>) -> Self {
        ParamPoly {
            terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn add(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match cmp_mono(&self.terms[i].0, &other.terms[j].0) {
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
        ParamPoly { terms: out }
    }

    pub fn neg(&self) -> ParamPoly {
        ParamPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &ParamPoly) -> ParamPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ParamPoly) -> ParamPoly {
        if self.is_zero() || other.is_zero() {
            return ParamPoly::zero();
        }
        let mut map: BTreeMap<PMono, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match map.get_mut(&m) {
                    Some(acc) => *acc += c,
                    None => {
                        map.insert(m, c);
                    }
                }
            }
        }
        ParamPoly::from_map(map)
    }

    pub fn scale(&self, c: &BigRational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        ParamPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn leading(&self) -> Option<&(PMono, BigRational)> {
        self.terms.last()
    }

    /// Exact polynomial division: Some(q) with self = q * other, or None.
    pub fn exact_div(&self, other: &ParamPoly) -> Option<ParamPoly> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(ParamPoly::zero());
        }
        let (lm, lc) = other.leading().unwrap();
        let mut rem = self.clone();
        let mut quo: Vec<(PMono, BigRational)> = Vec::new();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().unwrap();
            let qm = rm.div(lm)?;
            let qc = rc / lc;
            let t = ParamPoly {
                terms: vec![(qm.clone(), qc.clone())],
            };
            rem = rem.sub(&t.mul(other));
            quo.push((qm, qc));
        }
        quo.reverse();
        Some(ParamPoly { terms: quo })
    }

    /// Partial derivative with respect to a parameter.
    pub fn derivative(&self, p: Param) -> ParamPoly {
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent_of(p);
            if e == 0 {
                continue;
            }
            let m2 = m.div(&PMono::var(p)).expect("exponent checked");
            let c2 = c * BigRational::from(BigInt::from(e));
            *map.entry(m2).or_insert_with(BigRational::zero) += c2;
        }
        ParamPoly::from_map(map)
    }

    /// Substitute a parameter by a polynomial.
    pub fn substitute(&self, p: Param, val: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent_of(p);
            let rest = if e > 0 {
                let mut v = m.clone();
                v.0.retain(|&(q, _)| q != p);
                v
            } else {
                m.clone()
            };
            let mut term = ParamPoly {
                terms: vec![(rest, c.clone())],
            };
            for _ in 0..e {
                term = term.mul(val);
            }
            out = out.add(&term);
        }
        out
    }

    /// Evaluate with a numeric assignment for every parameter that occurs.
    pub fn eval<F: Fn(Param) -> Option<f64>>(&self, assign: &F) -> Result<f64, Param> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = rational_to_f64(c);
            for &(p, e) in &m.0 {
                let x = assign(p).ok_or(p)?;
                v *= x.powi(e as i32);
            }
            total += v;
        }
        Ok(total)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut set: Vec<Param> = Vec::new();
        for (m, _) in &self.terms {
            for &(p, _) in &m.0 {
                if !set.contains(&p) {
                    set.push(p);
                }
            }
        }
        set.sort();
        set
    }

    /// Rational content: gcd of the numerators over lcm of the denominators.
    fn content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for (_, c) in &self.terms {
            num = num_integer::gcd(num, c.numer().clone());
            den = num_integer::lcm(den, c.denom().clone());
        }
        if num.is_zero() {
            BigRational::one()
        } else {
            BigRational::new(num, den)
        }
    }

    /// Common monomial factor of all terms.
    fn monomial_content(&self) -> PMono {
        let mut iter = self.terms.iter();
        let first = match iter.next() {
            Some((m, _)) => m.clone(),
            None => return PMono::unit(),
        };
        let mut acc = first;
        for (m, _) in iter {
            if acc.is_unit() {
                break;
            }
            let mut out = Vec::new();
            for &(p, e) in &acc.0 {
                let e2 = m.exponent_of(p).min(e);
                if e2 > 0 {
                    out.push((p, e2));
                }
            }
            acc = PMono(out);
        }
        acc
    }
}

fn rational_to_f64(c: &BigRational) -> f64 {
    // Good enough for the numeric ranges used here; exact big ratios are
    // converted through strings only when they overflow i128.
    let n = c.numer();
    let d = c.denom();
    match (i128::try_from(n.clone()), i128::try_from(d.clone())) {
        (Ok(a), Ok(b)) => a as f64 / b as f64,
        _ => {
            let n: f64 = n.to_string().parse().unwrap_or(f64::NAN);
            let d: f64 = d.to_string().parse().unwrap_or(f64::NAN);
            n / d
        }
    }
}

fn fmt_rational(c: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Print highest monomial first.
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c } else { c.clone() };
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_unit() {
                fmt_rational(&abs, f)?;
            } else {
                if !abs.is_one() {
                    fmt_rational(&abs, f)?;
                    write!(f, "·")?;
                }
                let mut first = true;
                for &(p, e) in &m.0 {
                    if !first {
                        write!(f, "·")?;
                    }
                    first = false;
                    write!(f, "{p}")?;
                    if e > 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Exact scalar: a fraction of parameter polynomials, reduced and with a
/// monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    num: ParamPoly,
    den: ParamPoly,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            num: ParamPoly::zero(),
            den: ParamPoly::one(),
        }
    }

    pub fn one() -> Self {
        Scalar {
            num: ParamPoly::one(),
            den: ParamPoly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rational(BigRational::from(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Scalar::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(c: BigRational) -> Self {
        Scalar {
            num: ParamPoly::constant(c),
            den: ParamPoly::one(),
        }
    }

    pub fn param(p: Param) -> Self {
        Scalar {
            num: ParamPoly::var(p),
            den: ParamPoly::one(),
        }
    }

    pub fn lambda(tuple: u16, mode: u8, idx: u8) -> Self {
        Scalar::param(Param::Lambda { tuple, mode, idx })
    }

    pub fn kappa() -> Self {
        Scalar::param(Param::Kappa)
    }

    pub fn level() -> Self {
        Scalar::param(Param::Level)
    }

    pub fn from_poly(p: ParamPoly) -> Self {
        Scalar {
            num: p,
            den: ParamPoly::one(),
        }
    }

    pub fn fraction(num: ParamPoly, den: ParamPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut s = Scalar { num, den };
        s.reduce();
        s
    }

    pub fn numer(&self) -> &ParamPoly {
        &self.num
    }

    pub fn denom(&self) -> &ParamPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = ParamPoly::one();
            return;
        }
        // Strip the monomial content of each side; the stripped cofactors are
        // primitive in the monomial sense, which lets the exact-quotient pass
        // below find common polynomial factors such as (κ + λ1).
        let mn = self.num.monomial_content();
        let md = self.den.monomial_content();
        let strip = |poly: &ParamPoly, m: &PMono| ParamPoly {
            terms: poly
                .terms
                .iter()
                .map(|(t, c)| (t.div(m).expect("content divides"), c.clone()))
                .collect(),
        };
        let mut n1 = strip(&self.num, &mn);
        let mut d1 = strip(&self.den, &md);
        // Cancel the polynomial part if one side divides the other.
        if !d1.is_one() {
            if let Some(q) = n1.exact_div(&d1) {
                n1 = q;
                d1 = ParamPoly::one();
            } else if let Some(q) = d1.exact_div(&n1) {
                n1 = ParamPoly::one();
                d1 = q;
            }
        }
        // Cancel the common monomial factor.
        let common = {
            let mut out = Vec::new();
            for &(p, e) in &mn.0 {
                let e2 = md.exponent_of(p).min(e);
                if e2 > 0 {
                    out.push((p, e2));
                }
            }
            PMono(out)
        };
        let mono_poly = |m: PMono| ParamPoly {
            terms: vec![(m, BigRational::one())],
        };
        self.num = n1.mul(&mono_poly(mn.div(&common).expect("common divides")));
        self.den = d1.mul(&mono_poly(md.div(&common).expect("common divides")));
        // Monic denominator, reduced rational content.
        let lc = self.den.leading().expect("nonzero").1.clone();
        if !lc.is_one() {
            let inv = BigRational::one() / lc;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        if self.den.is_one() {
            return;
        }
        let c = self.num.content();
        let cd = self.den.content();
        // Keep integer-primitive numerator and denominator when possible by
        // cancelling the shared rational content.
        let shared = BigRational::new(
            num_integer::gcd(c.numer().clone(), cd.numer().clone()),
            num_integer::lcm(c.denom().clone(), cd.denom().clone()),
        );
        if !shared.is_one() && !shared.is_zero() {
            let inv = BigRational::one() / shared;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
            // Restore the monic denominator.
            let lc = self.den.leading().unwrap().1.clone();
            if !lc.is_one() {
                let inv = BigRational::one() / lc;
                self.num = self.num.scale(&inv);
                self.den = self.den.scale(&inv);
            }
        }
    }

    pub fn pow(&self, n: u32) -> Scalar {
        let mut out = Scalar::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn inv(&self) -> Scalar {
        assert!(!self.is_zero(), "division by zero scalar");
        Scalar::fraction(self.den.clone(), self.num.clone())
    }

    /// Derivative with respect to a parameter (quotient rule).
    pub fn derivative(&self, p: Param) -> Scalar {
        let dn = self.num.derivative(p);
        let dd = self.den.derivative(p);
        if dd.is_zero() {
            return Scalar::fraction(dn, self.den.clone());
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        let den = self.den.mul(&self.den);
        Scalar::fraction(num, den)
    }

    /// Substitute a parameter by a scalar value.
    pub fn substitute(&self, p: Param, val: &Scalar) -> Scalar {
        let sub_poly = |poly: &ParamPoly| -> Scalar {
            let mut out = Scalar::zero();
            for (m, c) in &poly.terms {
                let e = m.exponent_of(p);
                let mut rest = m.clone();
                rest.0.retain(|&(q, _)| q != p);
                let mut term = Scalar::from_poly(ParamPoly {
                    terms: vec![(rest, c.clone())],
                });
                if e > 0 {
                    term = &term * &val.pow(e);
                }
                out = &out + &term;
            }
            out
        };
        let n = sub_poly(&self.num);
        let d = sub_poly(&self.den);
        &n / &d
    }

    pub fn eval<F: Fn(Param) -> Option<f64>>(&self, assign: &F) -> Result<f64, EvalError> {
        let n = self.num.eval(assign).map_err(EvalError::Unassigned)?;
        let d = self.den.eval(assign).map_err(EvalError::Unassigned)?;
        if d == 0.0 {
            return Err(EvalError::ZeroDenominator);
        }
        Ok(n / d)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut v = self.num.params();
        for p in self.den.params() {
            if !v.contains(&p) {
                v.push(p);
            }
        }
        v.sort();
        v
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("parameter {0} has no numeric assignment")]
    Unassigned(Param),
    #[error("denominator evaluates to zero")]
    ZeroDenominator,
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if self.den == rhs.den {
            return Scalar::fraction(self.num.add(&rhs.num), self.den.clone());
        }
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        let den = self.den.mul(&rhs.den);
        Scalar::fraction(num, den)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() || rhs.is_zero() {
            return Scalar::zero();
        }
        Scalar::fraction(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        assert!(!rhs.is_zero(), "division by zero scalar");
        Scalar::fraction(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let num_simple = self.num.terms.len() <= 1;
        let den_simple = self.den.terms.len() <= 1;
        if num_simple {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        write!(f, "/")?;
        if den_simple {
            write!(f, "{}", self.den)
        } else {
            write!(f, "({})", self.den)
        }
    }
}
