//! Virtual canonical bundle of a family of genus-0 maps to a smooth target:
//! the determinant of the pushed-forward tangent bundle, the determinant on
//! the sections side, and their assembly.
//!
//! Write `m = -<K, beta>` for the relative degree of the pulled-back
//! anticanonical class. Every formula divides by `2m`, so `m` must be a
//! nonzero rational multiple of a monomial in parameters.

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{push_product, BaseExpr, CurveExpr};
use crate::poly::{q_frac, Poly};
use crate::relations::{self, Determinant};
use crate::splitting::Convention;

/// Target data: dimension of the target and the symbol tracking the
/// pullback of its canonical class `f^* C_1(Omega_X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetData {
    /// `n = dim X`, a constant or a parameter polynomial.
    pub dim: Poly,
    /// Context symbol for `f^* C_1(Omega_X)`.
    pub k_symbol: String,
}

impl TargetData {
    pub fn new(dim: Poly, k_symbol: &str) -> Self {
        TargetData {
            dim,
            k_symbol: k_symbol.to_string(),
        }
    }

    /// `m = -<K, beta>`.
    pub fn anticanonical_degree(&self, ctx: &Context) -> Result<Poly> {
        Ok(-ctx.degree_of(&self.k_symbol)?)
    }

    /// `1 / (2m)`, guarding against a vanishing or non-invertible degree.
    fn half_inverse(&self, ctx: &Context) -> Result<(Poly, Poly)> {
        let m = self.anticanonical_degree(ctx)?;
        if m.is_zero() {
            return Err(Error::Precondition(format!(
                "the relative degree of `{}` must be nonzero",
                self.k_symbol
            )));
        }
        let inv = (&m * &Poly::int(2)).inverse().ok_or_else(|| {
            Error::Precondition(format!(
                "the relative degree of `{}` must be a single monomial to divide by it, got {}",
                self.k_symbol,
                ctx.degree_of(&self.k_symbol).unwrap_or_default()
            ))
        })?;
        Ok((m, inv))
    }

    fn k(&self) -> CurveExpr {
        CurveExpr::sym(&self.k_symbol)
    }
}

/// The bracket `2m c2 - (m+1) pi_*(K.K) + Sum'(x'(K)x''(K) + extra) Delta`.
fn bracket(ctx: &Context, t: &TargetData, m: &Poly, extra: Poly) -> Result<BaseExpr> {
    let kk = push_product(ctx, &t.k(), &t.k())?;
    let sum = &Poly::prime(&t.k_symbol) * &Poly::dprime(&t.k_symbol) + extra;
    Ok(BaseExpr::c2().scale(&(m * &Poly::int(2))) - kk.scale(&(m + &Poly::one()))
        + BaseExpr::boundary_sum(sum, Convention::Unordered))
}

/// Determinant of `R pi_* f^* T_X [-1]`: rank `m + n`, class
/// `1/(2m) [2m c2 - (m+1) pi_*(K.K) + Sum' x'(K) x''(K) Delta]`.
pub fn tx_det(ctx: &Context, t: &TargetData) -> Result<Determinant> {
    let (m, inv) = t.half_inverse(ctx)?;
    let c1 = bracket(ctx, t, &m, Poly::zero())?.scale(&inv);
    Ok(Determinant {
        rank: &m + &t.dim,
        c1: c1.normalize(ctx),
    })
}

/// The same class straight from the Chern character, before eliminating
/// `pi_*(K.omega)`: `c2 - 1/2 pi_*(K.K) - 1/2 pi_*(K.omega)`.
pub fn tx_det_grr(ctx: &Context, t: &TargetData) -> Result<BaseExpr> {
    let k = t.k();
    let half = Poly::constant(q_frac(1, 2));
    let kk = push_product(ctx, &k, &k)?;
    let kw = push_product(ctx, &k, &CurveExpr::omega())?;
    Ok((BaseExpr::c2() - kk.scale(&half) - kw.scale(&half)).normalize(ctx))
}

/// Determinant on the sections side, with its boundary form for `r >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionsDeterminant {
    pub det: Determinant,
    /// `-2 Sum' Delta + 1/(r-1) Sum x'(s_1) S''(r - S'') Delta`.
    pub alternate: Option<BaseExpr>,
}

pub fn omega_sections_det(ctx: &Context) -> Result<SectionsDeterminant> {
    let det = relations::rel11_det(ctx)?;
    let alternate = if ctx.section_count() >= 2 && ctx.disjoint_sections {
        Some(relations::rel11_alternate(ctx, 1)?)
    } else {
        None
    };
    Ok(SectionsDeterminant { det, alternate })
}

/// First Chern class and rank of the virtual canonical bundle, in the
/// three displayed cases `r = 0`, `r = 1` and `r >= 2`.
pub fn virtual_canonical(ctx: &Context, t: &TargetData) -> Result<Determinant> {
    let (m, inv) = t.half_inverse(ctx)?;
    let r = ctx.section_count();
    let extra = &m * &Poly::int(-4);
    let mut c1 = bracket(ctx, t, &m, extra)?.scale(&inv);
    match r {
        0 => {}
        1 => {
            let s = CurveExpr::sym(&ctx.require_section(1)?);
            c1 = c1 - push_product(ctx, &s, &s)?;
        }
        _ => {
            if !ctx.disjoint_sections {
                return Err(Error::Precondition(
                    "the boundary form for r >= 2 needs pairwise disjoint sections".to_string(),
                ));
            }
            let s1 = Poly::prime(&ctx.require_section(1)?);
            let mut others = Poly::zero();
            for k in 2..=r {
                others += Poly::dprime(&ctx.require_section(k)?);
            }
            let tail = &(&s1 * &others) * &(&Poly::int(r as i64) - &others);
            let tail = BaseExpr::boundary_sum(tail, Convention::Ordered).scale_q(&q_frac(1, r as i64 - 1));
            c1 = c1 + tail;
        }
    }
    Ok(Determinant {
        rank: &(&m + &t.dim) + &(Poly::int(r as i64) - Poly::int(3)),
        c1: c1.normalize(ctx),
    })
}

/// `virtual_canonical - (sections side + tangent side)`, using the boundary
/// form of the sections side when `r >= 2`.
pub fn assembly_defect(ctx: &Context, t: &TargetData) -> Result<BaseExpr> {
    let vc = virtual_canonical(ctx, t)?;
    let omega = omega_sections_det(ctx)?;
    let tx = tx_det(ctx, t)?;
    let sections_c1 = omega.alternate.unwrap_or(omega.det.c1);
    Ok((vc.c1 - sections_c1 - tx.c1).normalize(ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{Effectivity, StabilityMode};

    fn ctx(r: usize, k: Poly) -> Context {
        Context::sections_only(r, StabilityMode::Artin)
            .with_symbol("K", k, Effectivity::Unbounded)
            .unwrap()
    }

    #[test]
    fn projective_space_ranks() {
        for (n, d, r) in [(1, 1, 0), (2, 1, 0), (2, 2, 0), (3, 1, 2)] {
            let c = ctx(r, Poly::int(-(n + 1) * d));
            let t = TargetData::new(Poly::int(n), "K");
            let vc = virtual_canonical(&c, &t).unwrap();
            assert_eq!(vc.rank, Poly::int((n + 1) * d + n + r as i64 - 3));
            assert_eq!(tx_det(&c, &t).unwrap().rank, Poly::int((n + 1) * d + n));
        }
    }

    #[test]
    fn guards() {
        let t = TargetData::new(Poly::int(2), "K");
        assert!(matches!(tx_det(&ctx(0, Poly::zero()), &t), Err(Error::Precondition(_))));
        let two_terms = Poly::param("a") + Poly::param("b");
        assert!(matches!(virtual_canonical(&ctx(0, two_terms), &t), Err(Error::Precondition(_))));
        assert!(matches!(
            tx_det(&ctx(0, Poly::int(1)), &TargetData::new(Poly::int(1), "L")),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn irreducible_family() {
        let c = ctx(0, Poly::param("k")).with_suppressed_boundary(true);
        let t = TargetData::new(Poly::param("n"), "K");
        let m = -Poly::param("k");
        let kk = BaseExpr::push_syms("K", "K");
        let expected = (BaseExpr::c2().scale(&(&m * &Poly::int(2))) - kk.scale(&(&m + &Poly::one())))
            .scale(&(&m * &Poly::int(2)).inverse().unwrap());
        assert_eq!(tx_det(&c, &t).unwrap().c1, expected.normalize(&c));
    }

    #[test]
    fn sections_side() {
        let empty = Context::default();
        let r0 = omega_sections_det(&empty).unwrap();
        assert_eq!(r0.det.rank, Poly::int(3));
        assert_eq!(r0.det.c1, BaseExpr::total_boundary().scale(&Poly::int(-2)).normalize(&empty));
        assert!(r0.alternate.is_none());
        let r3 = omega_sections_det(&Context::sections_only(3, StabilityMode::Artin)).unwrap();
        assert_eq!(r3.det.rank, Poly::zero());
        assert!(r3.alternate.is_some());
    }

    #[test]
    fn two_routes_differ_by_rel1() {
        for r in 0..=3 {
            let c = ctx(r, Poly::param("k"));
            let t = TargetData::new(Poly::param("n"), "K");
            let diff = tx_det(&c, &t).unwrap().c1 - tx_det_grr(&c, &t).unwrap();
            let k = Poly::param("k");
            let rel1 = relations::rel1(&c, &CurveExpr::sym("K")).unwrap();
            let scaled = rel1.scale(&(&k * &Poly::int(2)).inverse().unwrap());
            assert!((diff - scaled).normalize(&c).is_zero(), "r={r}");
        }
    }
}
