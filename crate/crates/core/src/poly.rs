//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Two families of variables live in the same ring:
//!
//! * degree parameters (`k`, `n`, ...) stand for symbolic integers and may
//!   carry negative exponents, so coefficients like `1/(2k)` are representable;
//! * split variables `x'(D)` and `x''(D)` stand for the degrees of a divisor
//!   symbol `D` on the two sides of a one-node degeneration. These only ever
//!   carry nonnegative exponents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_q(value: &Q) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Param(String),
    Prime(String),
    DPrime(String),
}

impl Var {
    pub fn is_split(&self) -> bool {
        !matches!(self, Var::Param(_))
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Var::Param(_) => None,
            Var::Prime(s) | Var::DPrime(s) => Some(s),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Param(p) => write!(f, "{p}"),
            Var::Prime(s) => write!(f, "x'({s})"),
            Var::DPrime(s) => write!(f, "x''({s})"),
        }
    }
}

/// Product of variables with nonzero integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Var, i32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn var(v: Var, exp: i32) -> Self {
        let mut m = BTreeMap::new();
        if exp != 0 {
            m.insert(v, exp);
        }
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Var, i32)> {
        self.0.iter().map(|(v, e)| (v, *e))
    }

    pub fn exponent(&self, v: &Var) -> i32 {
        self.0.get(v).copied().unwrap_or(0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            let entry = out.entry(v.clone()).or_insert(0);
            *entry += e;
            if *entry == 0 {
                out.remove(v);
            }
        }
        Monomial(out)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A polynomial: finite map from monomials to nonzero rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Poly::from_term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(q(n))
    }

    pub fn from_term(m: Monomial, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn var(v: Var) -> Self {
        Poly::from_term(Monomial::var(v, 1), Q::one())
    }

    pub fn param(name: &str) -> Self {
        Poly::var(Var::Param(name.to_string()))
    }

    pub fn prime(symbol: &str) -> Self {
        Poly::var(Var::Prime(symbol.to_string()))
    }

    pub fn dprime(symbol: &str) -> Self {
        Poly::var(Var::DPrime(symbol.to_string()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Integer value if the polynomial is an integer constant.
    pub fn as_integer(&self) -> Option<i64> {
        let c = self.as_constant()?;
        if !c.is_integer() {
            return None;
        }
        i64::try_from(c.numer()).ok()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.0.keys().cloned())
            .collect()
    }

    pub fn has_split_vars(&self) -> bool {
        self.terms.keys().any(|m| m.0.keys().any(Var::is_split))
    }

    pub fn is_params_only(&self) -> bool {
        !self.has_split_vars()
    }

    /// Sign of a constant, or `None` for a non-constant polynomial.
    pub fn is_negative_constant(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_negative())
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x * c))
                .collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..exp {
            out = &out * self;
        }
        out
    }

    /// Multiplicative inverse, available for single terms in parameters only.
    pub fn inverse(&self) -> Option<Poly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        if m.0.keys().any(Var::is_split) {
            return None;
        }
        let inv = Monomial(m.0.iter().map(|(v, e)| (v.clone(), -e)).collect());
        Some(Poly::from_term(inv, c.recip()))
    }

    /// Replaces variables by polynomials. Variables for which `sub` returns
    /// `None` are kept.
    pub fn substitute<F>(&self, sub: F) -> Poly
    where
        F: Fn(&Var) -> Option<Poly>,
    {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(c.clone());
            for (v, e) in &m.0 {
                let factor = match sub(v) {
                    Some(p) if *e >= 0 => p.pow(*e as u32),
                    Some(p) => match p.inverse() {
                        Some(inv) => inv.pow(e.unsigned_abs()),
                        None => Poly::from_term(Monomial::var(v.clone(), *e), Q::one()),
                    },
                    None => Poly::from_term(Monomial::var(v.clone(), *e), Q::one()),
                };
                term = &term * &factor;
            }
            out += term;
        }
        out
    }

    /// Renames variables (merging terms that collide).
    pub fn rename<F>(&self, f: F) -> Poly
    where
        F: Fn(&Var) -> Var,
    {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut renamed = Monomial::one();
            for (v, e) in &m.0 {
                renamed = renamed.mul(&Monomial::var(f(v), *e));
            }
            out.add_term(renamed, c.clone());
        }
        out
    }

    /// Caps the exponent of every variable selected by `idempotent` at 1.
    pub fn cap_exponents<F>(&self, idempotent: F) -> Poly
    where
        F: Fn(&Var) -> bool,
    {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let capped = Monomial(
                m.0.iter()
                    .map(|(v, e)| {
                        if *e > 1 && idempotent(v) {
                            (v.clone(), 1)
                        } else {
                            (v.clone(), *e)
                        }
                    })
                    .collect(),
            );
            out.add_term(capped, c.clone());
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{}", fmt_q(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_q(&abs))?;
            }
        }
        Ok(())
    }
}

impl From<Q> for Poly {
    fn from(c: Q) -> Self {
        Poly::constant(c)
    }
}

impl From<i64> for Poly {
    fn from(n: i64) -> Self {
        Poly::int(n)
    }
}

impl AddAssign<Poly> for Poly {
    fn add_assign(&mut self, rhs: Poly) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl SubAssign<Poly> for Poly {
    fn sub_assign(&mut self, rhs: Poly) {
        *self -= &rhs;
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
