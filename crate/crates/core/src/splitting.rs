//! Boundary stratum indices and the two boundary-sum conventions.
//!
//! A one-node degeneration splits every tracked degree `e` as `e' + e''`.
//! A [`SplitIndex`] records those pairs, in the coordinate order of the
//! [`Context`]. The two orderings of the same degeneration name the same
//! boundary divisor; the canonical representative is the ordering whose
//! `e'` vector is lexicographically larger (for sections this puts `s1`
//! on the primed side).
//!
//! `Sum` (ordered) sums a coefficient function over every sequence,
//! `Sum'` (unordered) over swap classes and requires a swap-symmetric
//! coefficient. A swap-fixed index is counted once under both.

use std::collections::BTreeMap;
use std::fmt;

use crate::context::{Context, Effectivity, StabilityMode, SymbolKind};
use crate::error::{Error, Result};
use crate::poly::{Poly, Var, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Convention {
    Ordered,
    Unordered,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::Ordered => write!(f, "ordered"),
            Convention::Unordered => write!(f, "unordered"),
        }
    }
}

/// Degree splitting `(d', d'')` per coordinate of a context.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitIndex {
    parts: Vec<(i64, i64)>,
}

impl SplitIndex {
    pub fn new(parts: Vec<(i64, i64)>) -> Self {
        SplitIndex { parts }
    }

    pub fn parts(&self) -> &[(i64, i64)] {
        &self.parts
    }

    pub fn swap(&self) -> SplitIndex {
        SplitIndex {
            parts: self.parts.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    pub fn is_swap_fixed(&self) -> bool {
        self.parts.iter().all(|(a, b)| a == b)
    }

    pub fn canonical(&self) -> SplitIndex {
        let swapped = self.swap();
        if swapped > *self {
            swapped
        } else {
            self.clone()
        }
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonical()
    }

    /// Degree `d'` (primed side) of coordinate `pos`.
    pub fn prime(&self, pos: usize) -> i64 {
        self.parts[pos].0
    }

    pub fn dprime(&self, pos: usize) -> i64 {
        self.parts[pos].1
    }
}

/// `name=d':d''` pairs joined by commas.
pub struct IndexDisplay<'a> {
    ctx: &'a Context,
    idx: &'a SplitIndex,
}

impl fmt::Display for IndexDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (sym, (a, b))) in self.ctx.coordinates().iter().zip(self.idx.parts()).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={a}:{b}", sym.name)?;
        }
        Ok(())
    }
}

impl Context {
    pub fn display_index<'a>(&'a self, idx: &'a SplitIndex) -> IndexDisplay<'a> {
        IndexDisplay { ctx: self, idx }
    }

    fn concrete_degree(&self, pos: usize) -> Result<i64> {
        let sym = &self.coordinates()[pos];
        sym.degree
            .as_integer()
            .ok_or_else(|| Error::SymbolicDegree(sym.name.clone()))
    }

    /// Allowed `d'` values for one coordinate.
    fn coordinate_range(&self, pos: usize) -> Result<Vec<(i64, i64)>> {
        let sym = &self.coordinates()[pos];
        if sym.is_section() {
            return Ok(vec![(0, 1), (1, 0)]);
        }
        let e = self.concrete_degree(pos)?;
        let effectivity = match (sym.effectivity, self.stability) {
            (Effectivity::Unbounded, StabilityMode::DeligneMumford) => Effectivity::Nonnegative,
            (eff, _) => eff,
        };
        let (lo, hi) = match effectivity {
            Effectivity::Unbounded => return Err(Error::UnboundedExpansion(sym.name.clone())),
            Effectivity::Nonnegative => (0, e),
            Effectivity::Bounded(b) => {
                let b = i64::try_from(b).unwrap_or(i64::MAX);
                // |d'| <= b and |e - d'| <= b
                (e.saturating_sub(b).max(-b), b.min(e.saturating_add(b)))
            }
        };
        Ok((lo..=hi).map(|a| (a, e - a)).collect())
    }

    /// Stability filter: in Deligne-Mumford mode a side whose general
    /// coordinates all vanish must carry at least two markings.
    pub fn is_stable(&self, idx: &SplitIndex) -> bool {
        if self.stability == StabilityMode::Artin {
            return true;
        }
        let side_ok = |pick: fn(&(i64, i64)) -> i64| {
            let mut markings = 0;
            let mut curve_degree = false;
            for (sym, part) in self.coordinates().iter().zip(idx.parts()) {
                match sym.kind {
                    SymbolKind::Section(_) => markings += pick(part),
                    _ => curve_degree |= pick(part) != 0,
                }
            }
            curve_degree || markings >= 2
        };
        side_ok(|p| p.0) && side_ok(|p| p.1)
    }

    /// All canonical split indices, deduplicated and sorted.
    pub fn enumerate_indices(&self) -> Result<Vec<SplitIndex>> {
        let ranges = (0..self.coordinates().len())
            .map(|pos| self.coordinate_range(pos))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(ranges.len());
        cartesian(&ranges, &mut current, &mut |parts| {
            let idx = SplitIndex::new(parts.to_vec());
            if idx.is_canonical() && self.is_stable(&idx) {
                out.push(idx);
            }
        });
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Whether the coordinate set is finite and concrete.
    pub fn is_enumerable(&self) -> bool {
        (0..self.coordinates().len()).all(|pos| self.coordinate_range(pos).is_ok())
    }

    /// Rewrites `x''(X)` as `e_X - x'(X)` and caps section variables at
    /// exponent 1 (their splittings are 0 or 1). The result is the unique
    /// representative of the coefficient function on split indices.
    pub fn reduce_split(&self, p: &Poly) -> Poly {
        let substituted = p.substitute(|v| match v {
            Var::DPrime(name) => {
                let sym = self.symbol(name)?;
                Some(&sym.degree - &Poly::prime(name))
            }
            _ => None,
        });
        substituted.cap_exponents(|v| match v {
            Var::Prime(name) => self.section_index(name).is_some(),
            _ => false,
        })
    }

    /// The coefficient function composed with the swap `(e', e'') -> (e'', e')`.
    pub fn swap_split(&self, p: &Poly) -> Poly {
        let renamed = p.rename(|v| match v {
            Var::Prime(s) if self.symbol(s).is_some() => Var::DPrime(s.clone()),
            Var::DPrime(s) if self.symbol(s).is_some() => Var::Prime(s.clone()),
            other => other.clone(),
        });
        self.reduce_split(&renamed)
    }

    /// `(P + swap P) / 2`, reduced.
    pub fn symmetrize_split(&self, p: &Poly) -> Poly {
        let sum = self.reduce_split(p) + self.swap_split(p);
        sum.scale(&crate::poly::q_frac(1, 2))
    }

    pub fn is_swap_symmetric(&self, p: &Poly) -> bool {
        self.reduce_split(p) == self.swap_split(p)
    }

    /// Checks that every split variable refers to a coordinate symbol.
    pub fn check_split_vars(&self, p: &Poly) -> Result<()> {
        for v in p.vars() {
            if let Some(name) = v.symbol() {
                if self.symbol(name).is_none() {
                    return Err(Error::UnknownSymbol(name.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Evaluates split variables at an index; parameters stay symbolic.
    pub fn eval_split(&self, p: &Poly, idx: &SplitIndex) -> Poly {
        p.substitute(|v| {
            let (name, primed) = match v {
                Var::Prime(s) => (s, true),
                Var::DPrime(s) => (s, false),
                Var::Param(_) => return None,
            };
            let pos = self.coordinate_position(name)?;
            let (a, b) = idx.parts()[pos];
            Some(Poly::int(if primed { a } else { b }))
        })
    }

    /// The swap-fixed stratum, when it can exist. With symbolic degrees the
    /// stratum is kept formally (`Ok(None)` means it exists but has no
    /// concrete index).
    pub fn diagonal(&self) -> DiagonalStatus {
        if self.suppress_boundary || self.section_count() > 0 {
            return DiagonalStatus::Absent;
        }
        let mut parts = Vec::new();
        for sym in self.coordinates() {
            match sym.degree.as_integer() {
                Some(e) if e % 2 != 0 => return DiagonalStatus::Absent,
                Some(e) => parts.push((e / 2, e / 2)),
                None => return DiagonalStatus::Formal,
            }
        }
        let idx = SplitIndex::new(parts);
        if self.is_stable(&idx) {
            DiagonalStatus::Concrete(idx)
        } else {
            DiagonalStatus::Absent
        }
    }

    /// Value of a coefficient at the swap-fixed point `x' = x'' = e/2`.
    pub fn eval_diagonal(&self, p: &Poly) -> Poly {
        let half = crate::poly::q_frac(1, 2);
        p.substitute(|v| {
            let name = v.symbol()?;
            let sym = self.symbol(name)?;
            Some(sym.degree.scale(&half))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagonalStatus {
    Absent,
    Formal,
    Concrete(SplitIndex),
}

fn cartesian<F: FnMut(&[(i64, i64)])>(
    ranges: &[Vec<(i64, i64)>],
    current: &mut Vec<(i64, i64)>,
    visit: &mut F,
) {
    if current.len() == ranges.len() {
        visit(current);
        return;
    }
    for &pair in &ranges[current.len()] {
        current.push(pair);
        cartesian(ranges, current, visit);
        current.pop();
    }
}

/// Coefficients of `Sum P Delta` (ordered) or `Sum' P Delta` (unordered)
/// on every canonical index, zeros included.
pub fn expand_sum(ctx: &Context, p: &Poly, convention: Convention) -> Result<BTreeMap<SplitIndex, Q>> {
    ctx.check_split_vars(p)?;
    if convention == Convention::Unordered && !ctx.is_swap_symmetric(p) {
        return Err(Error::AsymmetricSum(p.to_string()));
    }
    let mut out = BTreeMap::new();
    for idx in ctx.enumerate_indices()? {
        let mut value = ctx.eval_split(p, &idx);
        if convention == Convention::Ordered && !idx.is_swap_fixed() {
            value += ctx.eval_split(p, &idx.swap());
        }
        let c = value
            .as_constant()
            .ok_or_else(|| Error::SymbolicCoefficient(value.to_string()))?;
        out.insert(idx, c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    fn l_context(bound: u64) -> Context {
        Context::new(StabilityMode::Artin)
            .with_symbol("L", Poly::zero(), Effectivity::Bounded(bound))
            .unwrap()
    }

    #[test]
    fn degree_zero_symbol_bound_two() {
        let idx = l_context(2).enumerate_indices().unwrap();
        let parts: Vec<_> = idx.iter().map(|i| i.parts()[0]).collect();
        assert_eq!(parts, [(0, 0), (1, -1), (2, -2)]);
    }

    #[test]
    fn four_sections_dm() {
        let ctx = Context::sections_only(4, StabilityMode::DeligneMumford);
        let idx = ctx.enumerate_indices().unwrap();
        assert_eq!(idx.len(), 3);
        // every index has s1 on the primed side and two markings per side
        for i in &idx {
            assert_eq!(i.parts()[0], (1, 0));
            let left: i64 = i.parts().iter().map(|p| p.0).sum();
            assert_eq!(left, 2);
        }
    }

    #[test]
    fn two_sections_dm_is_empty() {
        let ctx = Context::sections_only(2, StabilityMode::DeligneMumford);
        assert!(ctx.enumerate_indices().unwrap().is_empty());
    }

    #[test]
    fn unbounded_artin_symbol_is_an_error() {
        let ctx = Context::default()
            .with_symbol("D", Poly::int(3), Effectivity::Unbounded)
            .unwrap();
        assert_eq!(ctx.enumerate_indices(), Err(Error::UnboundedExpansion("D".into())));
    }

    #[test]
    fn lcomp_coefficients() {
        let p = Poly::prime("L") * Poly::dprime("L");
        let sums = expand_sum(&l_context(2), &p, Convention::Unordered).unwrap();
        let values: Vec<_> = sums.values().cloned().collect();
        assert_eq!(values, [q(0), q(-1), q(-4)]);
    }

    #[test]
    fn partition_indicator() {
        let ctx = Context::sections_only(4, StabilityMode::DeligneMumford);
        let p = Poly::prime("s1") * Poly::prime("s2") * Poly::dprime("s3") * Poly::dprime("s4");
        let sums = expand_sum(&ctx, &p, Convention::Ordered).unwrap();
        let twelve = SplitIndex::new(vec![(1, 0), (1, 0), (0, 1), (0, 1)]);
        for (idx, c) in &sums {
            assert_eq!(*c, if *idx == twelve { q(1) } else { q(0) });
        }
    }

    #[test]
    fn antisymmetric_cancels_and_is_rejected_unordered() {
        let ctx = l_context(3);
        let p = Poly::prime("L") - Poly::dprime("L");
        let sums = expand_sum(&ctx, &p, Convention::Ordered).unwrap();
        assert!(sums.values().all(|c| *c == q(0)));
        assert!(matches!(
            expand_sum(&ctx, &p, Convention::Unordered),
            Err(Error::AsymmetricSum(_))
        ));
    }

    #[test]
    fn canonical_is_idempotent() {
        let i = SplitIndex::new(vec![(0, 1), (2, -1)]);
        assert_eq!(i.canonical().canonical(), i.canonical());
        assert_eq!(i.canonical(), SplitIndex::new(vec![(1, 0), (-1, 2)]));
    }

    #[test]
    fn diagonal_status() {
        assert_eq!(
            l_context(1).diagonal(),
            DiagonalStatus::Concrete(SplitIndex::new(vec![(0, 0)]))
        );
        let odd = Context::default()
            .with_symbol("D", Poly::int(3), Effectivity::Nonnegative)
            .unwrap();
        assert_eq!(odd.diagonal(), DiagonalStatus::Absent);
        let symbolic = Context::default()
            .with_symbol("K", Poly::param("k"), Effectivity::Unbounded)
            .unwrap();
        assert_eq!(symbolic.diagonal(), DiagonalStatus::Formal);
        assert_eq!(Context::sections_only(3, StabilityMode::Artin).diagonal(), DiagonalStatus::Absent);
    }
}
