use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::context::{Context, OMEGA};
use crate::error::{Error, Result};
use crate::poly::{Poly, Q};
use crate::splitting::{Convention, DiagonalStatus, SplitIndex};

/// A divisor generator on the total space: a tracked symbol or `omega`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    Sym(String),
    Omega,
}

impl Gen {
    pub fn sym(name: &str) -> Gen {
        if name == OMEGA {
            Gen::Omega
        } else {
            Gen::Sym(name.to_string())
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Gen::Sym(s) => s,
            Gen::Omega => OMEGA,
        }
    }

    /// `x'` of this generator: the primed split variable, or -1 for omega
    /// (the canonical class has degree -1 on each side of a node).
    pub fn prime(&self) -> Poly {
        match self {
            Gen::Sym(s) => Poly::prime(s),
            Gen::Omega => Poly::int(-1),
        }
    }

    pub fn dprime(&self) -> Poly {
        match self {
            Gen::Sym(s) => Poly::dprime(s),
            Gen::Omega => Poly::int(-1),
        }
    }
}

/// Atoms of the base divisor-class algebra.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseAtom {
    /// `pi_*(a.b)`, stored with `a <= b`.
    Push(Gen, Gen),
    /// `s_i^* g`.
    SectPull(usize, Gen),
    /// `pi_* f^* C_2(Omega_X)`.
    C2Push,
    /// An opaque named class on the base.
    Named(String),
    /// `psi_i`, an alias of `-pi_*(s_i.s_i)`.
    Psi(usize),
    /// A single boundary divisor.
    Boundary(SplitIndex),
    /// The swap-fixed boundary stratum when its index is not concrete.
    DiagonalBoundary,
}

impl BaseAtom {
    pub fn push(a: Gen, b: Gen) -> BaseAtom {
        if a <= b {
            BaseAtom::Push(a, b)
        } else {
            BaseAtom::Push(b, a)
        }
    }
}

/// A linear combination of base atoms with coefficients in parameters,
/// plus one ordered and one unordered boundary sum.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseExpr {
    pub(crate) terms: BTreeMap<BaseAtom, Poly>,
    /// Coefficient function of `Sum[...] Delta`.
    pub(crate) ordered: Poly,
    /// Coefficient function of `Sum'[...] Delta`.
    pub(crate) unordered: Poly,
}

impl BaseExpr {
    pub fn zero() -> Self {
        BaseExpr::default()
    }

    pub fn atom(atom: BaseAtom) -> Self {
        BaseExpr::term(atom, Poly::one())
    }

    pub fn term(atom: BaseAtom, coeff: Poly) -> Self {
        let mut e = BaseExpr::zero();
        e.add_term(atom, coeff);
        e
    }

    pub fn push(a: Gen, b: Gen) -> Self {
        BaseExpr::atom(BaseAtom::push(a, b))
    }

    pub fn push_syms(a: &str, b: &str) -> Self {
        BaseExpr::push(Gen::sym(a), Gen::sym(b))
    }

    pub fn named(name: &str) -> Self {
        BaseExpr::atom(BaseAtom::Named(name.to_string()))
    }

    pub fn c2() -> Self {
        BaseExpr::atom(BaseAtom::C2Push)
    }

    pub fn boundary(idx: SplitIndex) -> Self {
        BaseExpr::atom(BaseAtom::Boundary(idx))
    }

    /// Boundary sum without validation; unordered sums are symmetrized on
    /// normalization.
    pub fn boundary_sum(p: Poly, convention: Convention) -> Self {
        let mut e = BaseExpr::zero();
        match convention {
            Convention::Ordered => e.ordered = p,
            Convention::Unordered => e.unordered = p,
        }
        e
    }

    /// `Sum'[p] Delta`, rejecting coefficients that are not swap-symmetric.
    pub fn symmetric_sum(ctx: &Context, p: Poly) -> Result<Self> {
        ctx.check_split_vars(&p)?;
        if !ctx.is_swap_symmetric(&p) {
            return Err(Error::AsymmetricSum(p.to_string()));
        }
        Ok(BaseExpr::boundary_sum(p, Convention::Unordered))
    }

    /// The total boundary `Sum' 1 Delta`.
    pub fn total_boundary() -> Self {
        BaseExpr::boundary_sum(Poly::one(), Convention::Unordered)
    }

    pub fn add_term(&mut self, atom: BaseAtom, coeff: Poly) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(atom.clone()).or_default();
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&atom);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.ordered.is_zero() && self.unordered.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BaseAtom, &Poly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, atom: &BaseAtom) -> Poly {
        self.terms.get(atom).cloned().unwrap_or_default()
    }

    pub fn ordered_sum(&self) -> &Poly {
        &self.ordered
    }

    pub fn unordered_sum(&self) -> &Poly {
        &self.unordered
    }

    pub fn scale(&self, c: &Poly) -> BaseExpr {
        let mut out = BaseExpr::zero();
        for (a, x) in &self.terms {
            out.add_term(a.clone(), x * c);
        }
        out.ordered = &self.ordered * c;
        out.unordered = &self.unordered * c;
        out
    }

    pub fn scale_q(&self, c: &Q) -> BaseExpr {
        self.scale(&Poly::constant(c.clone()))
    }

    fn merge(&mut self, other: &BaseExpr, sign: &Poly) {
        for (a, x) in &other.terms {
            self.add_term(a.clone(), x * sign);
        }
        self.ordered += &other.ordered * sign;
        self.unordered += &other.unordered * sign;
    }

    /// Canonical form relative to a context.
    ///
    /// * `s_i^* X` becomes `pi_*(X.s_i)` and `psi_i` becomes `-pi_*(s_i.s_i)`;
    /// * with disjoint sections `pi_*(s_i.s_j) = 0` for `i != j`;
    /// * boundary sums are rewritten as one `Sum'` with a reduced symmetric
    ///   coefficient, the ordered sum's swap-fixed term moving to the
    ///   diagonal stratum;
    /// * single boundary atoms get canonical indices; unstable ones vanish.
    pub fn normalize(&self, ctx: &Context) -> BaseExpr {
        let mut out = BaseExpr::zero();
        for (atom, coeff) in &self.terms {
            match atom {
                BaseAtom::Push(a, b) => {
                    if push_vanishes(ctx, a, b) {
                        continue;
                    }
                    out.add_term(BaseAtom::push(a.clone(), b.clone()), coeff.clone());
                }
                BaseAtom::SectPull(i, g) => {
                    let s = Gen::Sym(crate::context::section_name(*i));
                    if push_vanishes(ctx, &s, g) {
                        continue;
                    }
                    out.add_term(BaseAtom::push(s, g.clone()), coeff.clone());
                }
                BaseAtom::Psi(i) => {
                    let s = Gen::Sym(crate::context::section_name(*i));
                    out.add_term(BaseAtom::push(s.clone(), s), -coeff);
                }
                BaseAtom::Boundary(idx) => {
                    if ctx.suppress_boundary || !ctx.is_stable(idx) {
                        continue;
                    }
                    out.add_term(BaseAtom::Boundary(idx.canonical()), coeff.clone());
                }
                BaseAtom::DiagonalBoundary => out.add_diagonal(ctx, coeff.clone()),
                BaseAtom::C2Push | BaseAtom::Named(_) => {
                    out.add_term(atom.clone(), coeff.clone());
                }
            }
        }

        if ctx.suppress_boundary {
            return out;
        }
        let ordered = ctx.reduce_split(&self.ordered);
        let mut sym = ctx.symmetrize_split(&self.unordered);
        sym += &ordered;
        sym += ctx.swap_split(&ordered);
        if !ordered.is_zero() {
            out.add_diagonal(ctx, -ctx.eval_diagonal(&ordered));
        }
        if ctx.coordinates().is_empty() {
            // a single index, which is its own swap
            out.add_diagonal(ctx, sym);
        } else {
            out.unordered = sym;
        }
        out
    }

    fn add_diagonal(&mut self, ctx: &Context, coeff: Poly) {
        match ctx.diagonal() {
            DiagonalStatus::Absent => {}
            DiagonalStatus::Formal => self.add_term(BaseAtom::DiagonalBoundary, coeff),
            DiagonalStatus::Concrete(idx) => self.add_term(BaseAtom::Boundary(idx), coeff),
        }
    }

    /// Whether the class vanishes identically: zero after normalizing, or,
    /// for finite contexts, after expanding every boundary sum.
    pub fn is_zero_class(&self, ctx: &Context) -> Result<bool> {
        let n = self.normalize(ctx);
        if n.is_zero() {
            return Ok(true);
        }
        if ctx.is_enumerable() {
            return Ok(n.expand(ctx)?.is_zero());
        }
        Ok(false)
    }

    /// Replaces boundary sums by the boundary divisors they sum over.
    pub fn expand(&self, ctx: &Context) -> Result<BaseExpr> {
        let n = self.normalize(ctx);
        let mut out = BaseExpr::zero();
        for (atom, c) in &n.terms {
            out.add_term(atom.clone(), c.clone());
        }
        if n.unordered.is_zero() {
            return Ok(out);
        }
        ctx.check_split_vars(&n.unordered)?;
        for idx in ctx.enumerate_indices()? {
            let value = ctx.eval_split(&n.unordered, &idx);
            out.add_term(BaseAtom::Boundary(idx), value);
        }
        Ok(out)
    }

    /// Boundary coefficients after expansion, keyed by canonical index.
    pub fn boundary_coefficients(&self, ctx: &Context) -> Result<BTreeMap<SplitIndex, Poly>> {
        let e = self.expand(ctx)?;
        Ok(e.terms
            .into_iter()
            .filter_map(|(a, c)| match a {
                BaseAtom::Boundary(idx) => Some((idx, c)),
                _ => None,
            })
            .collect())
    }
}

fn push_vanishes(ctx: &Context, a: &Gen, b: &Gen) -> bool {
    if !ctx.disjoint_sections {
        return false;
    }
    match (a, b) {
        (Gen::Sym(x), Gen::Sym(y)) if x != y => {
            ctx.section_index(x).is_some() && ctx.section_index(y).is_some()
        }
        _ => false,
    }
}

impl Add<&BaseExpr> for &BaseExpr {
    type Output = BaseExpr;
    fn add(self, rhs: &BaseExpr) -> BaseExpr {
        let mut out = self.clone();
        out.merge(rhs, &Poly::one());
        out
    }
}

impl Sub<&BaseExpr> for &BaseExpr {
    type Output = BaseExpr;
    fn sub(self, rhs: &BaseExpr) -> BaseExpr {
        let mut out = self.clone();
        out.merge(rhs, &Poly::int(-1));
        out
    }
}

impl Add for BaseExpr {
    type Output = BaseExpr;
    fn add(self, rhs: BaseExpr) -> BaseExpr {
        &self + &rhs
    }
}

impl Sub for BaseExpr {
    type Output = BaseExpr;
    fn sub(self, rhs: BaseExpr) -> BaseExpr {
        &self - &rhs
    }
}

impl Neg for &BaseExpr {
    type Output = BaseExpr;
    fn neg(self) -> BaseExpr {
        self.scale(&Poly::int(-1))
    }
}

impl Neg for BaseExpr {
    type Output = BaseExpr;
    fn neg(self) -> BaseExpr {
        -&self
    }
}

impl std::iter::Sum for BaseExpr {
    fn sum<I: Iterator<Item = BaseExpr>>(iter: I) -> BaseExpr {
        iter.fold(BaseExpr::zero(), |acc, e| acc + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{Effectivity, StabilityMode};

    fn ctx() -> Context {
        Context::sections_only(2, StabilityMode::Artin)
            .with_symbol("D", Poly::param("e"), Effectivity::Unbounded)
            .unwrap()
    }

    #[test]
    fn push_is_commutative() {
        let d = Gen::Sym("D".to_string());
        let e = BaseExpr::push(d.clone(), Gen::Omega) + BaseExpr::push(Gen::Omega, d.clone());
        let n = e.normalize(&ctx());
        assert_eq!(n.terms().count(), 1);
        assert_eq!(n.coefficient(&BaseAtom::push(d, Gen::Omega)), Poly::int(2));
    }

    #[test]
    fn antisymmetric_ordered_sum_cancels() {
        let p = Poly::prime("D") - Poly::dprime("D");
        assert!(BaseExpr::boundary_sum(p, Convention::Ordered).normalize(&ctx()).is_zero());
    }

    #[test]
    fn zero_multiple_is_empty() {
        let e = BaseExpr::push_syms("D", "D") + BaseExpr::named("y") + BaseExpr::c2();
        assert!(e.scale(&Poly::zero()).normalize(&ctx()).is_zero());
    }

    #[test]
    fn psi_and_section_pullbacks_rewrite() {
        let c = ctx();
        let s1 = Gen::Sym("s1".to_string());
        let psi = BaseExpr::atom(BaseAtom::Psi(1)).normalize(&c);
        assert_eq!(psi, (-BaseExpr::push(s1.clone(), s1.clone())).normalize(&c));
        let pulled = BaseExpr::atom(BaseAtom::SectPull(1, Gen::Sym("D".to_string()))).normalize(&c);
        assert_eq!(pulled, BaseExpr::push(s1.clone(), Gen::Sym("D".to_string())).normalize(&c));
        let mixed = BaseExpr::push(s1, Gen::Sym("s2".to_string())).normalize(&c);
        assert!(mixed.is_zero());
    }

    #[test]
    fn unstable_boundary_is_dropped() {
        let c = Context::sections_only(4, StabilityMode::DeligneMumford);
        let single = SplitIndex::new(vec![(1, 0), (0, 1), (0, 1), (0, 1)]);
        assert!(BaseExpr::boundary(single).normalize(&c).is_zero());
        let pair = SplitIndex::new(vec![(1, 0), (1, 0), (0, 1), (0, 1)]);
        assert!(!BaseExpr::boundary(pair).normalize(&c).is_zero());
    }
}
