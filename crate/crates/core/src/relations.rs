//! Divisor-class relations, each returned as a single zero-asserted
//! expression `LHS - RHS`, already normalized.
//!
//! Divisor arguments are total-space classes without boundary components:
//! linear combinations of symbols, `omega` and pullbacks from the base.
//! Section-indexed relations take a distinguished section `i` (the first
//! section in the usual statements) and, where the statement needs it,
//! pairwise disjoint sections.

use std::fmt;
use std::str::FromStr;

use crate::context::{section_name, Context};
use crate::error::{Error, Result};
use crate::expr::{push_product, sect_pull, BaseAtom, BaseExpr, CurveExpr, Gen};
use crate::poly::{q_frac, Poly};
use crate::splitting::{Convention, SplitIndex};

fn pp(ctx: &Context, a: &CurveExpr, b: &CurveExpr) -> Result<BaseExpr> {
    push_product(ctx, a, b)
}

fn ordered(p: Poly) -> BaseExpr {
    BaseExpr::boundary_sum(p, Convention::Ordered)
}

fn unordered(p: Poly) -> BaseExpr {
    BaseExpr::boundary_sum(p, Convention::Unordered)
}

fn section(ctx: &Context, i: usize) -> Result<CurveExpr> {
    Ok(CurveExpr::sym(&ctx.require_section(i)?))
}

fn section_self(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let s = Gen::Sym(ctx.require_section(i)?);
    Ok(BaseExpr::push(s.clone(), s))
}

/// `sum_k pi_*(s_k.s_k)`.
fn sum_section_selves(ctx: &Context) -> Result<BaseExpr> {
    (1..=ctx.section_count()).map(|k| section_self(ctx, k)).sum()
}

/// `x''` of the sum of all sections other than `s_i`.
fn others_dprime(ctx: &Context, i: usize) -> Poly {
    let mut out = Poly::zero();
    for k in 1..=ctx.section_count() {
        if k != i {
            out += Poly::dprime(&section_name(k));
        }
    }
    out
}

fn require_sections(ctx: &Context, name: &str, i: usize) -> Result<usize> {
    let r = ctx.section_count();
    if r < 2 {
        return Err(Error::Precondition(format!("{name} needs at least two sections, got {r}")));
    }
    if !ctx.disjoint_sections {
        return Err(Error::Precondition(format!("{name} needs pairwise disjoint sections")));
    }
    ctx.require_section(i)?;
    Ok(r)
}

fn int(n: usize) -> Poly {
    Poly::int(n as i64)
}

/// `pi_*(D.D) + e pi_*(D.omega) - Sum' x'(D) x''(D) Delta`.
pub fn rel1(ctx: &Context, d: &CurveExpr) -> Result<BaseExpr> {
    let e = d.degree(ctx)?;
    let omega = CurveExpr::omega();
    let lhs = &pp(ctx, d, d)? + &pp(ctx, d, &omega)?.scale(&e);
    let rhs = unordered(&d.prime(ctx)? * &d.dprime(ctx)?);
    Ok((&lhs - &rhs).normalize(ctx))
}

/// The polarized form of [`rel1`].
pub fn rel2(ctx: &Context, d1: &CurveExpr, d2: &CurveExpr) -> Result<BaseExpr> {
    let e1 = d1.degree(ctx)?;
    let e2 = d2.degree(ctx)?;
    let omega = CurveExpr::omega();
    let lhs = pp(ctx, d1, d2)?.scale(&Poly::int(2))
        + pp(ctx, d2, &omega)?.scale(&e1)
        + pp(ctx, d1, &omega)?.scale(&e2);
    let coeff = &d1.prime(ctx)? * &d2.dprime(ctx)? + &d2.prime(ctx)? * &d1.dprime(ctx)?;
    Ok((lhs - unordered(coeff)).normalize(ctx))
}

/// Adjunction along a section: `pi_*(s.s) + pi_*(s.omega)`.
pub fn rel3(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let s = section(ctx, i)?;
    let e = &pp(ctx, &s, &s)? + &pp(ctx, &s, &CurveExpr::omega())?;
    Ok(e.normalize(ctx))
}

/// `2e s_i^*D - pi_*(D.D) - e^2 pi_*(s_i.s_i)` against
/// `Sum' (x'(D)^2 x''(s_i) + x''(D)^2 x'(s_i)) Delta`.
pub fn rel4(ctx: &Context, i: usize, d: &CurveExpr) -> Result<BaseExpr> {
    let e = d.degree(ctx)?;
    let s = section(ctx, i)?;
    let name = ctx.require_section(i)?;
    let lhs = sect_pull(ctx, i, d)?.scale(&(&e * &Poly::int(2)))
        - pp(ctx, d, d)?
        - pp(ctx, &s, &s)?.scale(&e.pow(2));
    let xp = d.prime(ctx)?;
    let xpp = d.dprime(ctx)?;
    let coeff = &xp.pow(2) * &Poly::dprime(&name) + &xpp.pow(2) * &Poly::prime(&name);
    Ok((lhs - unordered(coeff)).normalize(ctx))
}

/// On the total space: `2eD - pi^*pi_*(D.D) + e^2 omega` against
/// `SumT x''(D)^2 DeltaT`.
pub fn rel5(ctx: &Context, d: &CurveExpr) -> Result<CurveExpr> {
    let e = d.degree(ctx)?;
    let lhs = d.scale(&(&e * &Poly::int(2)))
        - CurveExpr::pullback(pp(ctx, d, d)?)
        + CurveExpr::omega().scale(&e.pow(2));
    let rhs = CurveExpr::tilde_sum(d.dprime(ctx)?.pow(2), Convention::Ordered);
    Ok((lhs - rhs).normalize(ctx))
}

/// Two disjoint sections: `pi_*(s_i.s_i) + pi_*(s_j.s_j) = -Sum x'(s_i) x''(s_j) Delta`.
pub fn rel6(ctx: &Context, i: usize, j: usize) -> Result<BaseExpr> {
    if i == j {
        return Err(Error::Precondition("rel6 needs two distinct sections".to_string()));
    }
    if !ctx.disjoint_sections {
        return Err(Error::Precondition("rel6 needs disjoint sections".to_string()));
    }
    let (si, sj) = (ctx.require_section(i)?, ctx.require_section(j)?);
    let lhs = section_self(ctx, i)? + section_self(ctx, j)?;
    let rhs = ordered(-(Poly::prime(&si) * Poly::dprime(&sj)));
    Ok((lhs - rhs).normalize(ctx))
}

pub fn rel7(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel7", i)?;
    let lhs = -sum_section_selves(ctx)?;
    let rhs = section_self(ctx, i)?.scale(&(int(r) - Poly::int(2)))
        + ordered(Poly::prime(&section_name(i)) * others_dprime(ctx, i));
    Ok((lhs - rhs).normalize(ctx))
}

pub fn rel8_first(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel8", i)?;
    let lhs = -sum_section_selves(ctx)?;
    let rhs = section_self(ctx, i)?.scale(&int(r * (r - 2)))
        + ordered(Poly::prime(&section_name(i)) * others_dprime(ctx, i).pow(2));
    Ok((lhs - rhs).normalize(ctx))
}

/// `(r-1)(r-2) pi_*(s_i.s_i) = -Sum x'(s_i) S''(S''-1) Delta`, with `S` the
/// sum of the other sections.
pub fn rel8_psi(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel8", i)?;
    let s = others_dprime(ctx, i);
    let lhs = section_self(ctx, i)?.scale(&int((r - 1) * (r - 2)));
    let rhs = ordered(-(Poly::prime(&section_name(i)) * &s * (&s - &Poly::one())));
    Ok((lhs - rhs).normalize(ctx))
}

/// `-(r-1) sum_k pi_*(s_k.s_k) = Sum x'(s_i) S''(r - S'') Delta`.
pub fn rel8_sum(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel8", i)?;
    let lhs = sum_section_selves(ctx)?.scale(&-int(r - 1));
    let rhs = ordered(sum_tail(ctx, i, r));
    Ok((lhs - rhs).normalize(ctx))
}

/// `x'(s_i) S''(r - S'')`.
fn sum_tail(ctx: &Context, i: usize, r: usize) -> Poly {
    let s = others_dprime(ctx, i);
    Poly::prime(&section_name(i)) * &s * (int(r) - &s)
}

/// Sum over boundary divisors `Delta_(A,B)` with `s_i` on side `A`, with
/// coefficient `weight(#B)`. Needs a finite context.
fn partition_sum(ctx: &Context, i: usize, weight: impl Fn(i64) -> Poly) -> Result<BaseExpr> {
    let pos = i - 1;
    let mut out = BaseExpr::zero();
    if ctx.suppress_boundary {
        return Ok(out);
    }
    for idx in ctx.enumerate_indices()? {
        let b = side_count(ctx, &idx, idx.prime(pos) != 1);
        out.add_term(BaseAtom::Boundary(idx), weight(b));
    }
    Ok(out)
}

/// Number of markings on one side of an index.
fn side_count(ctx: &Context, idx: &SplitIndex, primed: bool) -> i64 {
    (0..ctx.section_count())
        .map(|p| if primed { idx.prime(p) } else { idx.dprime(p) })
        .sum()
}

/// [`rel8_psi`] in partition form: `-(r-1)(r-2) pi_*(s_i.s_i) =
/// sum_{i in A} #B(#B-1) Delta_(A,B)`.
pub fn rel8_psi_partitions(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel8", i)?;
    let lhs = section_self(ctx, i)?.scale(&-int((r - 1) * (r - 2)));
    let rhs = partition_sum(ctx, i, |b| Poly::int(b * (b - 1)))?;
    Ok((lhs - rhs).normalize(ctx))
}

/// [`rel8_sum`] in partition form.
pub fn rel8_sum_partitions(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel8", i)?;
    let lhs = sum_section_selves(ctx)?.scale(&-int(r - 1));
    let rhs = partition_sum(ctx, i, |b| Poly::int(b * (r as i64 - b)))?;
    Ok((lhs - rhs).normalize(ctx))
}

/// The weighted boundary sum of [`rel8_sum`] does not depend on the
/// distinguished section.
pub fn rel9(ctx: &Context, i: usize, j: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel9", i)?;
    ctx.require_section(j)?;
    let e = ordered(sum_tail(ctx, i, r)) - ordered(sum_tail(ctx, j, r));
    Ok(e.normalize(ctx))
}

/// [`rel9`] with both sides in partition form.
pub fn rel9_partitions(ctx: &Context, i: usize, j: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel9", i)? as i64;
    ctx.require_section(j)?;
    let weight = |b: i64| Poly::int(b * (r - b));
    let e = partition_sum(ctx, i, weight)? - partition_sum(ctx, j, weight)?;
    Ok(e.normalize(ctx))
}

/// `s_i^*D` in terms of `pi_*(D.D)` and boundary divisors.
pub fn rel10(ctx: &Context, i: usize, d: &CurveExpr) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel10", i)?;
    let e = d.degree(ctx)?;
    let c = int((r - 1) * (r - 2));
    let lhs = sect_pull(ctx, i, d)?.scale(&(&(&c * &e) * &Poly::int(2)));
    let s = others_dprime(ctx, i);
    let a = &c * &d.dprime(ctx)?.pow(2) - &e.pow(2) * &s * (&s - &Poly::one());
    let rhs = pp(ctx, d, d)?.scale(&c) + ordered(Poly::prime(&section_name(i)) * a);
    Ok((lhs - rhs).normalize(ctx))
}

/// Rank and first Chern class of a determinant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Determinant {
    pub rank: Poly,
    pub c1: BaseExpr,
}

/// Determinant of the derived pushforward of the dual of
/// `Omega_pi(s_1 + ... + s_r)`: rank `3 - r`, class
/// `-2 Sum' Delta - sum_k pi_*(s_k.s_k)`.
pub fn rel11_det(ctx: &Context) -> Result<Determinant> {
    let r = ctx.section_count();
    let c1 = BaseExpr::total_boundary().scale(&Poly::int(-2)) - sum_section_selves(ctx)?;
    Ok(Determinant {
        rank: Poly::int(3) - int(r),
        c1: c1.normalize(ctx),
    })
}

/// The boundary form `-2 Sum' Delta + 1/(r-1) Sum x'(s_i) S''(r - S'') Delta`
/// of the same class, for `r >= 2`.
pub fn rel11_alternate(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let r = require_sections(ctx, "rel11", i)?;
    let tail = ordered(sum_tail(ctx, i, r)).scale_q(&q_frac(1, r as i64 - 1));
    Ok((BaseExpr::total_boundary().scale(&Poly::int(-2)) + tail).normalize(ctx))
}

/// Difference of the two forms of the determinant class.
pub fn rel11(ctx: &Context, i: usize) -> Result<BaseExpr> {
    let alt = rel11_alternate(ctx, i)?;
    Ok((rel11_det(ctx)?.c1 - alt).normalize(ctx))
}

/// Lengths of the filtration quotients of a torsion sheaf of length `a^2`:
/// `2a-1, 2a-3, ..., 3, 1`.
pub fn filtration_lengths(a: i64) -> Result<Vec<u64>> {
    if a < 1 {
        return Err(Error::Precondition(format!("filtration lengths need a >= 1, got {a}")));
    }
    Ok((1..=a as u64).rev().map(|k| 2 * k - 1).collect())
}

/// `Q_pi` at first-Chern-class level: `pi_*(C1^2) - 2 C2`.
pub fn q_pi(ctx: &Context, c1: &CurveExpr, c2: &BaseExpr) -> Result<BaseExpr> {
    let e = pp(ctx, c1, c1)? - c2.scale(&Poly::int(2));
    Ok(e.normalize(ctx))
}

/// `Q_pi` of a line bundle of relative degree 0 as a boundary sum:
/// `Sum' x'(L) x''(L) Delta`, i.e. `-a^2` on the splitting `(a, -a)`.
pub fn cor_lcomp(ctx: &Context, l: &CurveExpr) -> Result<BaseExpr> {
    let e = l.degree(ctx)?;
    if !e.is_zero() {
        return Err(Error::Precondition(format!("needs relative degree 0, got {e}")));
    }
    Ok(unordered(&l.prime(ctx)? * &l.dprime(ctx)?).normalize(ctx))
}

/// Relation identifiers accepted by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationId {
    Rel1,
    Rel2,
    Rel3,
    Rel4,
    Rel5,
    Rel6,
    Rel7,
    Rel8First,
    Rel8Psi,
    Rel8Sum,
    Rel9,
    Rel10,
    Rel11,
}

impl RelationId {
    pub const ALL: [RelationId; 13] = [
        RelationId::Rel1,
        RelationId::Rel2,
        RelationId::Rel3,
        RelationId::Rel4,
        RelationId::Rel5,
        RelationId::Rel6,
        RelationId::Rel7,
        RelationId::Rel8First,
        RelationId::Rel8Psi,
        RelationId::Rel8Sum,
        RelationId::Rel9,
        RelationId::Rel10,
        RelationId::Rel11,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationId::Rel1 => "rel1",
            RelationId::Rel2 => "rel2",
            RelationId::Rel3 => "rel3",
            RelationId::Rel4 => "rel4",
            RelationId::Rel5 => "rel5",
            RelationId::Rel6 => "rel6",
            RelationId::Rel7 => "rel7",
            RelationId::Rel8First => "rel8_first",
            RelationId::Rel8Psi => "rel8_psi",
            RelationId::Rel8Sum => "rel8_sum",
            RelationId::Rel9 => "rel9",
            RelationId::Rel10 => "rel10",
            RelationId::Rel11 => "rel11",
        }
    }

    /// Number of divisor arguments.
    pub fn divisor_arity(self) -> usize {
        match self {
            RelationId::Rel1 | RelationId::Rel4 | RelationId::Rel5 | RelationId::Rel10 => 1,
            RelationId::Rel2 => 2,
            _ => 0,
        }
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = if s == "rel8" { "rel8_first" } else { s };
        RelationId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| Error::Precondition(format!("unknown relation `{s}`")))
    }
}

/// Arguments of a relation instance.
#[derive(Clone, Debug, Default)]
pub struct RelationArgs {
    pub divisors: Vec<CurveExpr>,
    /// Distinguished section (default 1).
    pub i: Option<usize>,
    /// Second section for `rel6` and `rel9` (default 2).
    pub j: Option<usize>,
}

/// A zero-asserted relation on the base or on the total space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationValue {
    Base(BaseExpr),
    Curve(CurveExpr),
}

impl RelationValue {
    pub fn is_zero_class(&self, ctx: &Context) -> Result<bool> {
        match self {
            RelationValue::Base(e) => e.is_zero_class(ctx),
            RelationValue::Curve(e) => e.is_zero_class(ctx),
        }
    }

    pub fn as_base(&self) -> Option<&BaseExpr> {
        match self {
            RelationValue::Base(e) => Some(e),
            RelationValue::Curve(_) => None,
        }
    }
}

/// Instantiates a relation by id.
pub fn instantiate(ctx: &Context, id: RelationId, args: &RelationArgs) -> Result<RelationValue> {
    let arity = id.divisor_arity();
    if args.divisors.len() != arity {
        return Err(Error::Precondition(format!(
            "{id} takes {arity} divisor argument(s), got {}",
            args.divisors.len()
        )));
    }
    let i = args.i.unwrap_or(1);
    let j = args.j.unwrap_or(2);
    let d = |k: usize| &args.divisors[k];
    Ok(match id {
        RelationId::Rel1 => RelationValue::Base(rel1(ctx, d(0))?),
        RelationId::Rel2 => RelationValue::Base(rel2(ctx, d(0), d(1))?),
        RelationId::Rel3 => RelationValue::Base(rel3(ctx, i)?),
        RelationId::Rel4 => RelationValue::Base(rel4(ctx, i, d(0))?),
        RelationId::Rel5 => RelationValue::Curve(rel5(ctx, d(0))?),
        RelationId::Rel6 => RelationValue::Base(rel6(ctx, i, j)?),
        RelationId::Rel7 => RelationValue::Base(rel7(ctx, i)?),
        RelationId::Rel8First => RelationValue::Base(rel8_first(ctx, i)?),
        RelationId::Rel8Psi => RelationValue::Base(rel8_psi(ctx, i)?),
        RelationId::Rel8Sum => RelationValue::Base(rel8_sum(ctx, i)?),
        RelationId::Rel9 => RelationValue::Base(rel9(ctx, i, j)?),
        RelationId::Rel10 => RelationValue::Base(rel10(ctx, i, d(0))?),
        RelationId::Rel11 => RelationValue::Base(rel11(ctx, i)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{Effectivity, StabilityMode};

    fn symbolic(r: usize) -> Context {
        Context::sections_only(r, StabilityMode::Artin)
            .with_symbol("D", Poly::param("e"), Effectivity::Unbounded)
            .unwrap()
            .with_symbol("E", Poly::param("f"), Effectivity::Unbounded)
            .unwrap()
    }

    fn d() -> CurveExpr {
        CurveExpr::sym("D")
    }

    #[test]
    fn rel1_zero_divisor() {
        let ctx = symbolic(0);
        assert!(rel1(&ctx, &CurveExpr::zero()).unwrap().is_zero());
    }

    #[test]
    fn rel1_on_a_section_is_rel3() {
        for r in 1..=4 {
            let ctx = Context::sections_only(r, StabilityMode::Artin);
            for i in 1..=r {
                let s = CurveExpr::sym(&section_name(i));
                assert_eq!(rel1(&ctx, &s).unwrap(), rel3(&ctx, i).unwrap());
            }
        }
    }

    #[test]
    fn rel2_at_equal_arguments() {
        let ctx = symbolic(1);
        let two = rel1(&ctx, &d()).unwrap().scale(&Poly::int(2));
        assert_eq!(rel2(&ctx, &d(), &d()).unwrap(), two);
        assert!(rel2(&ctx, &d(), &CurveExpr::zero()).unwrap().is_zero());
    }

    #[test]
    fn rel4_degree_zero_symbol() {
        let ctx = Context::sections_only(1, StabilityMode::Artin)
            .with_symbol("L", Poly::zero(), Effectivity::Unbounded)
            .unwrap();
        let l = CurveExpr::sym("L");
        let got = rel4(&ctx, 1, &l).unwrap();
        let expected = -BaseExpr::push_syms("L", "L")
            - BaseExpr::boundary_sum(
                Poly::prime("L").pow(2) * Poly::dprime("s1") + Poly::dprime("L").pow(2) * Poly::prime("s1"),
                Convention::Unordered,
            );
        assert_eq!(got, expected.normalize(&ctx));
    }

    #[test]
    fn rel7_base_case_is_rel6() {
        let ctx = Context::sections_only(2, StabilityMode::Artin);
        assert_eq!(rel7(&ctx, 1).unwrap(), rel6(&ctx, 1, 2).unwrap().scale(&Poly::int(-1)));
    }

    #[test]
    fn preconditions() {
        let ctx = Context::sections_only(1, StabilityMode::Artin);
        assert!(matches!(rel8_psi(&ctx, 1), Err(Error::Precondition(m)) if m.contains("rel8")));
        assert!(rel6(&ctx, 1, 1).is_err());
        assert!(rel3(&ctx, 2).is_err());
        let mut joint = Context::sections_only(3, StabilityMode::Artin);
        joint.disjoint_sections = false;
        assert!(rel7(&joint, 1).is_err());
    }

    #[test]
    fn rel9_on_four_markings() {
        let ctx = Context::sections_only(4, StabilityMode::DeligneMumford);
        let a = partition_sum(&ctx, 1, |b| Poly::int(b * (4 - b))).unwrap();
        let b = partition_sum(&ctx, 2, |b| Poly::int(b * (4 - b))).unwrap();
        assert_eq!(a, b);
        for (_, c) in a.terms() {
            assert_eq!(*c, Poly::int(4));
        }
        assert_eq!(a.terms().count(), 3);
    }

    #[test]
    fn filtration() {
        assert_eq!(filtration_lengths(1).unwrap(), [1]);
        assert_eq!(filtration_lengths(3).unwrap(), [5, 3, 1]);
        assert_eq!(filtration_lengths(10).unwrap().iter().sum::<u64>(), 100);
        assert!(filtration_lengths(0).is_err());
    }

    #[test]
    fn relation_ids_round_trip() {
        for id in RelationId::ALL {
            assert_eq!(id.name().parse::<RelationId>().unwrap(), id);
        }
        assert!("rel12".parse::<RelationId>().is_err());
    }
}
