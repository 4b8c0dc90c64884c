use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::context::Context;
use crate::error::{Error, Result};
use crate::poly::{q_frac, Poly, Q};
use crate::splitting::{Convention, SplitIndex};

use super::base::{BaseAtom, BaseExpr, Gen};

/// A divisor class on the total space of the family.
///
/// `Delta~(idx)` is the component of the preimage of the boundary divisor
/// `Delta(idx)` on the primed side; the two components of a node sum to the
/// pullback of the boundary divisor. On a swap-fixed index both components
/// are counted, so `Delta~(idx) = pi^* Delta(idx)` there.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveExpr {
    pub(crate) gens: BTreeMap<Gen, Poly>,
    /// Pulled back from the base.
    pub(crate) base: BaseExpr,
    /// Coefficient function of the ordered sum `SumT[...] DeltaT`.
    pub(crate) tilde: Poly,
    pub(crate) tilde_atoms: BTreeMap<SplitIndex, Poly>,
}

impl CurveExpr {
    pub fn zero() -> Self {
        CurveExpr::default()
    }

    pub fn gen(g: Gen) -> Self {
        CurveExpr::gen_term(g, Poly::one())
    }

    pub fn gen_term(g: Gen, coeff: Poly) -> Self {
        let mut e = CurveExpr::zero();
        e.add_gen(g, coeff);
        e
    }

    pub fn sym(name: &str) -> Self {
        CurveExpr::gen(Gen::sym(name))
    }

    pub fn omega() -> Self {
        CurveExpr::gen(Gen::Omega)
    }

    pub fn pullback(base: BaseExpr) -> Self {
        CurveExpr {
            base,
            ..CurveExpr::zero()
        }
    }

    /// Tilde boundary sum. The unordered form of a symmetric coefficient
    /// counts both components of every node and is the pullback of the
    /// base sum.
    pub fn tilde_sum(p: Poly, convention: Convention) -> Self {
        match convention {
            Convention::Ordered => CurveExpr {
                tilde: p,
                ..CurveExpr::zero()
            },
            Convention::Unordered => CurveExpr::pullback(BaseExpr::boundary_sum(p, Convention::Unordered)),
        }
    }

    pub fn tilde_atom(idx: SplitIndex) -> Self {
        let mut e = CurveExpr::zero();
        e.add_tilde_atom(idx, Poly::one());
        e
    }

    pub fn add_gen(&mut self, g: Gen, coeff: Poly) {
        add_entry(&mut self.gens, g, coeff);
    }

    pub fn add_tilde_atom(&mut self, idx: SplitIndex, coeff: Poly) {
        add_entry(&mut self.tilde_atoms, idx, coeff);
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty() && self.base.is_zero() && self.tilde.is_zero() && self.tilde_atoms.is_empty()
    }

    pub fn gens(&self) -> impl Iterator<Item = (&Gen, &Poly)> {
        self.gens.iter()
    }

    pub fn base(&self) -> &BaseExpr {
        &self.base
    }

    pub fn tilde_sum_coefficient(&self) -> &Poly {
        &self.tilde
    }

    pub fn tilde_atoms(&self) -> impl Iterator<Item = (&SplitIndex, &Poly)> {
        self.tilde_atoms.iter()
    }

    pub fn gen_coefficient(&self, g: &Gen) -> Poly {
        self.gens.get(g).cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &Poly) -> CurveExpr {
        let mut out = CurveExpr::zero();
        for (g, x) in &self.gens {
            out.add_gen(g.clone(), x * c);
        }
        for (idx, x) in &self.tilde_atoms {
            out.add_tilde_atom(idx.clone(), x * c);
        }
        out.base = self.base.scale(c);
        out.tilde = &self.tilde * c;
        out
    }

    pub fn scale_q(&self, c: &Q) -> CurveExpr {
        self.scale(&Poly::constant(c.clone()))
    }

    /// Canonical form: the tilde sum keeps only the swap-antisymmetric part
    /// of its coefficient (the symmetric part is a pulled-back `Sum'`), and
    /// tilde atoms only canonical, non-swap-fixed indices.
    pub fn normalize(&self, ctx: &Context) -> CurveExpr {
        let mut out = CurveExpr::zero();
        for (g, c) in &self.gens {
            out.add_gen(g.clone(), c.clone());
        }
        let mut base = self.base.clone();
        if !ctx.suppress_boundary {
            let reduced = ctx.reduce_split(&self.tilde);
            let swapped = ctx.swap_split(&self.tilde);
            let half = q_frac(1, 2);
            let sym = (&reduced + &swapped).scale(&half);
            out.tilde = (&reduced - &swapped).scale(&half);
            base = &base + &BaseExpr::boundary_sum(sym, Convention::Unordered);

            for (idx, c) in &self.tilde_atoms {
                if !ctx.is_stable(idx) {
                    continue;
                }
                let canonical = idx.canonical();
                if idx.is_swap_fixed() {
                    base.add_term(BaseAtom::Boundary(canonical), c.clone());
                } else if canonical == *idx {
                    out.add_tilde_atom(canonical, c.clone());
                } else {
                    base.add_term(BaseAtom::Boundary(canonical.clone()), c.clone());
                    out.add_tilde_atom(canonical, -c);
                }
            }
        }
        out.base = base.normalize(ctx);
        out
    }

    /// Replaces the tilde sum and base boundary sums by explicit atoms.
    pub fn expand(&self, ctx: &Context) -> Result<CurveExpr> {
        let n = self.normalize(ctx);
        let mut out = CurveExpr {
            gens: n.gens.clone(),
            base: n.base.expand(ctx)?,
            tilde: Poly::zero(),
            tilde_atoms: n.tilde_atoms.clone(),
        };
        if !n.tilde.is_zero() {
            ctx.check_split_vars(&n.tilde)?;
            for idx in ctx.enumerate_indices()? {
                if idx.is_swap_fixed() {
                    // the antisymmetric part vanishes here
                    continue;
                }
                let value = ctx.eval_split(&n.tilde, &idx);
                let swapped = ctx.eval_split(&n.tilde, &idx.swap());
                out.base.add_term(BaseAtom::Boundary(idx.clone()), swapped.clone());
                out.add_tilde_atom(idx, value - swapped);
            }
        }
        Ok(out)
    }

    pub fn is_zero_class(&self, ctx: &Context) -> Result<bool> {
        let n = self.normalize(ctx);
        if n.is_zero() {
            return Ok(true);
        }
        if ctx.is_enumerable() {
            return Ok(n.expand(ctx)?.normalize(ctx).is_zero());
        }
        Ok(false)
    }

    /// Relative degree `e = sum c * deg`.
    pub fn degree(&self, ctx: &Context) -> Result<Poly> {
        self.check_tilde_free("relative degree of a boundary component")?;
        let mut out = Poly::zero();
        for (g, c) in &self.gens {
            out += c * &ctx.degree_of(g.name())?;
        }
        Ok(out)
    }

    /// `x'(D) = sum c * x'(gen)`, for classes without boundary components.
    pub fn prime(&self, ctx: &Context) -> Result<Poly> {
        self.split_form(ctx, Gen::prime)
    }

    pub fn dprime(&self, ctx: &Context) -> Result<Poly> {
        self.split_form(ctx, Gen::dprime)
    }

    fn split_form(&self, ctx: &Context, f: fn(&Gen) -> Poly) -> Result<Poly> {
        self.check_tilde_free("side degree of a boundary component")?;
        let mut out = Poly::zero();
        for (g, c) in &self.gens {
            check_gen(ctx, g)?;
            out += c * &f(g);
        }
        Ok(out)
    }

    fn check_tilde_free(&self, what: &str) -> Result<()> {
        if self.tilde.is_zero() && self.tilde_atoms.is_empty() {
            Ok(())
        } else {
            Err(Error::Unsupported(what.to_string()))
        }
    }
}

fn add_entry<K: Ord + Clone>(map: &mut BTreeMap<K, Poly>, key: K, coeff: Poly) {
    if coeff.is_zero() {
        return;
    }
    let entry = map.entry(key.clone()).or_default();
    *entry += coeff;
    if entry.is_zero() {
        map.remove(&key);
    }
}

fn check_gen(ctx: &Context, g: &Gen) -> Result<()> {
    match g {
        Gen::Omega => Ok(()),
        Gen::Sym(name) => ctx
            .symbol(name)
            .map(|_| ())
            .ok_or_else(|| Error::UnknownSymbol(name.clone())),
    }
}

/// `x'` of a generator at a concrete index.
fn prime_at(ctx: &Context, g: &Gen, idx: &SplitIndex) -> Result<Poly> {
    match g {
        Gen::Omega => Ok(Poly::int(-1)),
        Gen::Sym(name) => {
            let pos = ctx
                .coordinate_position(name)
                .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
            Ok(Poly::int(idx.prime(pos)))
        }
    }
}

/// `pi_*(a.b)` for classes in the supported fragment.
///
/// Rules: `pi_*(D.D')` is a pushforward atom, `pi_*(D.pi^*x) = deg(D) x`,
/// `pi_*(pi^*x.pi^*y) = 0`, `pi_*(D.Delta~(idx)) = x'(D)(idx) Delta(idx)`
/// (with `x'(omega) = -1`), and `pi_*(pi^*x.Delta~) = 0`. Products of two
/// tilde classes are rejected.
pub fn push_product(ctx: &Context, a: &CurveExpr, b: &CurveExpr) -> Result<BaseExpr> {
    let a = a.normalize(ctx);
    let b = b.normalize(ctx);
    let a_tilde = !a.tilde.is_zero() || !a.tilde_atoms.is_empty();
    let b_tilde = !b.tilde.is_zero() || !b.tilde_atoms.is_empty();
    if a_tilde && b_tilde {
        return Err(Error::Unsupported(
            "product of two boundary components of the total space".to_string(),
        ));
    }
    let mut out = half_push(ctx, &a, &b)?;
    out = &out + &half_push(ctx, &b, &a)?;
    // generator-generator terms were counted on both sides
    let mut gg = BaseExpr::zero();
    for (g, x) in &a.gens {
        check_gen(ctx, g)?;
        for (h, y) in &b.gens {
            check_gen(ctx, h)?;
            gg.add_term(BaseAtom::push(g.clone(), h.clone()), x * y);
        }
    }
    Ok((&out - &gg).normalize(ctx))
}

/// Terms of `pi_*(a.b)` pairing generators of `a` with everything in `b`.
fn half_push(ctx: &Context, a: &CurveExpr, b: &CurveExpr) -> Result<BaseExpr> {
    let mut out = BaseExpr::zero();
    for (g, x) in &a.gens {
        check_gen(ctx, g)?;
        for (h, y) in &b.gens {
            check_gen(ctx, h)?;
            out.add_term(BaseAtom::push(g.clone(), h.clone()), x * y);
        }
        if !b.base.is_zero() {
            let deg = ctx.degree_of(g.name())?;
            out = &out + &b.base.scale(&(&deg * x));
        }
        if !b.tilde.is_zero() {
            ctx.check_split_vars(&b.tilde)?;
            let f = &b.tilde * &g.prime();
            let sym = ctx.reduce_split(&f) + ctx.swap_split(&f);
            out = &out + &BaseExpr::boundary_sum(&sym * x, Convention::Unordered);
        }
        for (idx, y) in &b.tilde_atoms {
            let value = prime_at(ctx, g, idx)?;
            out.add_term(BaseAtom::Boundary(idx.clone()), &(x * y) * &value);
        }
    }
    Ok(out)
}

/// `s_i^* e` for classes without boundary components.
pub fn sect_pull(ctx: &Context, i: usize, e: &CurveExpr) -> Result<BaseExpr> {
    let section = ctx.require_section(i)?;
    let n = e.normalize(ctx);
    if !n.tilde.is_zero() || !n.tilde_atoms.is_empty() {
        return Err(Error::Unsupported(
            "section pullback of a boundary component".to_string(),
        ));
    }
    let mut out = n.base.clone();
    for (g, c) in &n.gens {
        check_gen(ctx, g)?;
        match g {
            Gen::Omega => {
                let s = Gen::Sym(section.clone());
                out.add_term(BaseAtom::push(s.clone(), s), -c);
            }
            Gen::Sym(_) => out.add_term(BaseAtom::SectPull(i, g.clone()), c.clone()),
        }
    }
    Ok(out.normalize(ctx))
}

impl Add<&CurveExpr> for &CurveExpr {
    type Output = CurveExpr;
    fn add(self, rhs: &CurveExpr) -> CurveExpr {
        let mut out = self.clone();
        for (g, x) in &rhs.gens {
            out.add_gen(g.clone(), x.clone());
        }
        for (idx, x) in &rhs.tilde_atoms {
            out.add_tilde_atom(idx.clone(), x.clone());
        }
        out.base = &out.base + &rhs.base;
        out.tilde += &rhs.tilde;
        out
    }
}

impl Sub<&CurveExpr> for &CurveExpr {
    type Output = CurveExpr;
    fn sub(self, rhs: &CurveExpr) -> CurveExpr {
        self + &(-rhs)
    }
}

impl Add for CurveExpr {
    type Output = CurveExpr;
    fn add(self, rhs: CurveExpr) -> CurveExpr {
        &self + &rhs
    }
}

impl Sub for CurveExpr {
    type Output = CurveExpr;
    fn sub(self, rhs: CurveExpr) -> CurveExpr {
        &self - &rhs
    }
}

impl Neg for &CurveExpr {
    type Output = CurveExpr;
    fn neg(self) -> CurveExpr {
        self.scale(&Poly::int(-1))
    }
}

impl Neg for CurveExpr {
    type Output = CurveExpr;
    fn neg(self) -> CurveExpr {
        -&self
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
    fn projection_formula() {
        let c = ctx();
        let x = BaseExpr::named("x");
        let pushed = push_product(&c, &CurveExpr::sym("D"), &CurveExpr::pullback(x.clone())).unwrap();
        assert_eq!(pushed, x.scale(&Poly::param("e")).normalize(&c));
        let both = push_product(&c, &CurveExpr::pullback(x), &CurveExpr::pullback(BaseExpr::named("y"))).unwrap();
        assert!(both.is_zero());
    }

    #[test]
    fn tilde_products_are_unsupported() {
        let c = ctx();
        let t = CurveExpr::tilde_atom(SplitIndex::new(vec![(1, 0), (0, 1), (1, -1)]));
        assert!(matches!(push_product(&c, &t, &t), Err(Error::Unsupported(_))));
        assert!(matches!(sect_pull(&c, 1, &t), Err(Error::Unsupported(_))));
    }

    #[test]
    fn section_pullbacks() {
        let c = ctx();
        let x = BaseExpr::named("x");
        assert_eq!(sect_pull(&c, 1, &CurveExpr::pullback(x.clone())).unwrap(), x);
        let s1 = Gen::Sym("s1".to_string());
        let self_int = BaseExpr::push(s1.clone(), s1);
        assert_eq!(sect_pull(&c, 1, &CurveExpr::omega()).unwrap(), (-self_int.clone()).normalize(&c));
        assert_eq!(sect_pull(&c, 1, &CurveExpr::sym("s1")).unwrap(), self_int.normalize(&c));
    }

    #[test]
    fn degrees() {
        let c = ctx();
        let e = CurveExpr::sym("D").scale(&Poly::int(2)) + CurveExpr::omega() + CurveExpr::sym("s2");
        assert_eq!(e.degree(&c).unwrap(), &Poly::param("e").scale(&q_frac(2, 1)) - &Poly::int(1));
        assert!(CurveExpr::sym("Z").degree(&c).is_err());
    }
}
