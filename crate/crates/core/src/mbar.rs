//! Numerical ground truth on the moduli space of stable `n`-pointed genus-0
//! curves: the rational Picard group spanned by boundary divisors, reduced
//! modulo Keel's relations, and paired with F-curves.
//!
//! Both tools are standard facts imported from outside: Keel's relations
//! generate all linear relations among boundary divisors, and an F-curve
//! (a 4-part partition of the markings) meets `Delta_(A,B)` with degree
//! `+1` if `A` is the union of two parts, `-1` if `A` or `B` is one part,
//! and `0` otherwise. The test suite checks the two against each other.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::context::{Context, StabilityMode, SymbolKind};
use crate::error::{Error, Result};
use crate::expr::{BaseAtom, BaseExpr, Gen};
use crate::poly::{fmt_q, Q};

/// Most markings supported by the bit-mask representation.
pub const MAX_MARKINGS: usize = 31;

fn full_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

/// An unordered partition `A|B` of `{1..n}`, stored as the mask of the side
/// containing marking 1 (bit `k-1` for marking `k`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(u32);

impl Partition {
    /// Partition with the given side (either side may be passed).
    pub fn from_side(n: usize, side: u32) -> Partition {
        if side & 1 == 1 {
            Partition(side)
        } else {
            Partition(full_mask(n) & !side)
        }
    }

    pub fn from_markings(n: usize, side: &[usize]) -> Partition {
        Partition::from_side(n, side.iter().fold(0, |m, &k| m | (1 << (k - 1))))
    }

    /// Mask of the side containing marking 1.
    pub fn first_side(self) -> u32 {
        self.0
    }

    pub fn other_side(self, n: usize) -> u32 {
        full_mask(n) & !self.0
    }

    /// Side containing marking `k`.
    pub fn side_of(self, n: usize, k: usize) -> u32 {
        if self.0 & (1 << (k - 1)) != 0 {
            self.0
        } else {
            self.other_side(n)
        }
    }

    pub fn display(self, n: usize) -> PartitionDisplay {
        PartitionDisplay { n, p: self }
    }
}

fn markings(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect()
}

fn fmt_side(mask: u32, n: usize) -> String {
    let parts: Vec<String> = markings(mask).iter().map(usize::to_string).collect();
    parts.join(if n < 10 { "" } else { "," })
}

pub struct PartitionDisplay {
    n: usize,
    p: Partition,
}

impl fmt::Display for PartitionDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}",
            fmt_side(self.p.first_side(), self.n),
            fmt_side(self.p.other_side(self.n), self.n)
        )
    }
}

fn check_n(n: usize) -> Result<()> {
    if (4..=MAX_MARKINGS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "need 4 <= n <= {MAX_MARKINGS} markings, got {n}"
        )))
    }
}

/// Boundary divisors `Delta_(A,B)` with `|A|, |B| >= 2`, in increasing mask
/// order; there are `2^(n-1) - 1 - n` of them.
pub fn boundary_basis(n: usize) -> Vec<Partition> {
    let full = full_mask(n);
    (0..=full)
        .filter(|m| m & 1 == 1 && *m != full)
        .filter(|m| m.count_ones() >= 2 && (full & !m).count_ones() >= 2)
        .map(Partition)
        .collect()
}

/// A rational combination of boundary divisors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MbarVector {
    n: usize,
    coeffs: BTreeMap<Partition, Q>,
}

impl MbarVector {
    pub fn zero(n: usize) -> Self {
        MbarVector {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(n: usize, p: Partition) -> Self {
        let mut v = MbarVector::zero(n);
        v.add(p, Q::one());
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, p: Partition, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(p).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&p);
        }
    }

    pub fn add_scaled(&mut self, other: &MbarVector, c: &Q) {
        for (p, x) in &other.coeffs {
            self.add(*p, x * c);
        }
    }

    pub fn scaled(&self, c: &Q) -> MbarVector {
        let mut out = MbarVector::zero(self.n);
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, other: &MbarVector) -> MbarVector {
        let mut out = self.clone();
        out.add_scaled(other, &-Q::one());
        out
    }

    pub fn coefficient(&self, p: Partition) -> Q {
        self.coeffs.get(&p).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (Partition, &Q)> {
        self.coeffs.iter().map(|(p, c)| (*p, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn dense(&self, basis: &[Partition]) -> Vec<Q> {
        basis.iter().map(|p| self.coefficient(*p)).collect()
    }
}

impl fmt::Display for MbarVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, (p, c)) in self.coeffs.iter().enumerate() {
            let negative = c < &Q::zero();
            let abs = if negative { -c } else { c.clone() };
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !abs.is_one() {
                write!(f, "{} ", fmt_q(&abs))?;
            }
            write!(f, "D[{}]", p.display(self.n))?;
        }
        Ok(())
    }
}

/// Sum of `Delta_(A,B)` over partitions with `a` on one side and `b` on the
/// other (`a`, `b` disjoint masks).
fn separating_sum(n: usize, a: u32, b: u32) -> MbarVector {
    let mut v = MbarVector::zero(n);
    for p in boundary_basis(n) {
        let (x, y) = (p.first_side(), p.other_side(n));
        if (a & x == a && b & y == b) || (a & y == a && b & x == b) {
            v.add(p, Q::one());
        }
    }
    v
}

fn bit(k: usize) -> u32 {
    1 << (k - 1)
}

/// Keel relations: for each `i<j<k<l` the differences
/// `R(ij|kl) - R(ik|jl)` and `R(ij|kl) - R(il|jk)`.
pub fn keel_kernel(n: usize) -> Vec<MbarVector> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                for l in k + 1..=n {
                    let ij = separating_sum(n, bit(i) | bit(j), bit(k) | bit(l));
                    let ik = separating_sum(n, bit(i) | bit(k), bit(j) | bit(l));
                    let il = separating_sum(n, bit(i) | bit(l), bit(j) | bit(k));
                    out.push(ij.sub(&ik));
                    out.push(ij.sub(&il));
                }
            }
        }
    }
    out
}

/// `psi_i` as `sum_{i in A; j, k in B} Delta_(A,B)`.
pub fn psi_vector(n: usize, i: usize, j: usize, k: usize) -> Result<MbarVector> {
    check_n(n)?;
    if i == j || j == k || i == k || [i, j, k].iter().any(|&m| m == 0 || m > n) {
        return Err(Error::Precondition(format!(
            "psi_vector needs three distinct markings in 1..={n}, got {i}, {j}, {k}"
        )));
    }
    Ok(separating_sum(n, bit(i), bit(j) | bit(k)))
}

/// `psi_i` with the two smallest other markings as reference points.
pub fn psi(n: usize, i: usize) -> Result<MbarVector> {
    let mut others = (1..=n).filter(|&m| m != i);
    let (j, k) = (others.next().unwrap_or(0), others.next().unwrap_or(0));
    psi_vector(n, i, j, k)
}

/// Row-reduced echelon form over the rationals; pivots are chosen at the
/// smallest available column.
#[derive(Clone, Debug)]
pub struct RowEchelon {
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl RowEchelon {
    pub fn new(mut rows: Vec<Vec<Q>>, width: usize) -> Self {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..width {
            let Some(found) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, found);
            let inv = rows[rank][col].recip();
            for x in rows[rank].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && !row[col].is_zero() {
                    let factor = row[col].clone();
                    for (x, p) in row.iter_mut().zip(&pivot_row) {
                        *x -= &factor * p;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        RowEchelon { rows, pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Remainder of `v` after clearing every pivot column.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut out = v.to_vec();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if out[col].is_zero() {
                continue;
            }
            let factor = out[col].clone();
            for (x, p) in out.iter_mut().zip(row) {
                *x -= &factor * p;
            }
        }
        out
    }
}

/// Keel relations of `n` markings in echelon form over the boundary basis.
pub struct KeelReducer {
    n: usize,
    basis: Vec<Partition>,
    echelon: RowEchelon,
}

impl KeelReducer {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        let basis = boundary_basis(n);
        let rows = keel_kernel(n).iter().map(|v| v.dense(&basis)).collect();
        let echelon = RowEchelon::new(rows, basis.len());
        Ok(KeelReducer { n, basis, echelon })
    }

    pub fn kernel_rank(&self) -> usize {
        self.echelon.rank()
    }

    /// Dimension of the quotient, i.e. the Picard rank.
    pub fn quotient_rank(&self) -> usize {
        self.basis.len() - self.kernel_rank()
    }

    pub fn reduce(&self, v: &MbarVector) -> MbarVector {
        let dense = self.echelon.reduce(&v.dense(&self.basis));
        let mut out = MbarVector::zero(self.n);
        for (p, c) in self.basis.iter().zip(dense) {
            out.add(*p, c);
        }
        out
    }
}

/// A partition of the markings into four nonempty parts, sorted by least
/// element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FCurve {
    parts: [u32; 4],
}

impl FCurve {
    pub fn new(n: usize, parts: [&[usize]; 4]) -> Result<FCurve> {
        let mut masks = [0u32; 4];
        let mut seen = 0u32;
        for (mask, part) in masks.iter_mut().zip(parts) {
            if part.is_empty() {
                return Err(Error::Precondition("F-curve parts must be nonempty".to_string()));
            }
            for &k in part {
                if k == 0 || k > n || seen & bit(k) != 0 {
                    return Err(Error::Precondition(format!("bad or repeated marking {k}")));
                }
                seen |= bit(k);
                *mask |= bit(k);
            }
        }
        if seen != full_mask(n) {
            return Err(Error::Precondition("F-curve parts must cover all markings".to_string()));
        }
        masks.sort_by_key(|m| m.trailing_zeros());
        Ok(FCurve { parts: masks })
    }

    pub fn parts(&self) -> [Vec<usize>; 4] {
        self.parts.map(markings)
    }

    /// Intersection number with a single boundary divisor.
    pub fn pair_basis(&self, n: usize, p: Partition) -> i64 {
        let (a, b) = (p.first_side(), p.other_side(n));
        if self.parts.contains(&a) || self.parts.contains(&b) {
            return -1;
        }
        for x in 0..4 {
            for y in x + 1..4 {
                if self.parts[x] | self.parts[y] == a {
                    return 1;
                }
            }
        }
        0
    }
}

impl fmt::Display for FCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = 32 - self.parts.iter().fold(0, |m, p| m | p).leading_zeros() as usize;
        let parts: Vec<String> = self.parts.iter().map(|p| fmt_side(*p, n)).collect();
        write!(f, "F({})", parts.join("|"))
    }
}

/// All F-curves for `n` markings, in lexicographic order of their parts.
pub fn fcurves(n: usize) -> Vec<FCurve> {
    let mut out = Vec::new();
    let mut blocks: Vec<u32> = Vec::new();
    assign(1, n, &mut blocks, &mut out);
    out.sort();
    out
}

/// Restricted-growth enumeration of set partitions into exactly 4 blocks.
fn assign(k: usize, n: usize, blocks: &mut Vec<u32>, out: &mut Vec<FCurve>) {
    if blocks.len() + (n + 1 - k) < 4 {
        return;
    }
    if k > n {
        if blocks.len() == 4 {
            out.push(FCurve {
                parts: [blocks[0], blocks[1], blocks[2], blocks[3]],
            });
        }
        return;
    }
    for b in 0..blocks.len() {
        blocks[b] |= bit(k);
        assign(k + 1, n, blocks, out);
        blocks[b] &= !bit(k);
    }
    if blocks.len() < 4 {
        blocks.push(bit(k));
        assign(k + 1, n, blocks, out);
        blocks.pop();
    }
}

pub fn fcurve_pair(n: usize, f: &FCurve, v: &MbarVector) -> Q {
    let _ = n;
    let mut total = Q::zero();
    for (p, c) in v.coefficients() {
        let d = f.pair_basis(v.n(), p);
        if d != 0 {
            total += c * Q::from_integer(d.into());
        }
    }
    total
}

/// Maps a no-map base class to boundary divisors: `pi_*(s_i.s_i) -> -psi_i`,
/// `pi_*(s_i.omega) -> psi_i`, mixed section terms to 0.
pub fn specialize(ctx: &Context, e: &BaseExpr) -> Result<MbarVector> {
    let n = no_map_markings(ctx)?;
    let expanded = e.expand(ctx)?;
    let mut out = MbarVector::zero(n);
    for (atom, c) in expanded.terms() {
        let c = c.as_constant().ok_or_else(|| Error::SymbolicCoefficient(c.to_string()))?;
        let v = specialize_atom(ctx, n, atom)?;
        out.add_scaled(&v, &c);
    }
    Ok(out)
}

fn no_map_markings(ctx: &Context) -> Result<usize> {
    let general = ctx.general_symbols().next();
    if let Some(sym) = general {
        return Err(Error::NotNoMap(format!("context tracks the symbol `{}`", sym.name)));
    }
    if ctx.stability != StabilityMode::DeligneMumford {
        return Err(Error::Precondition("verification needs deligne-mumford stability".to_string()));
    }
    if ctx.suppress_boundary {
        return Err(Error::Precondition("verification needs boundary classes".to_string()));
    }
    let n = ctx.section_count();
    check_n(n)?;
    Ok(n)
}

fn section_of(ctx: &Context, g: &Gen) -> Option<usize> {
    match g {
        Gen::Sym(name) => ctx.section_index(name),
        Gen::Omega => None,
    }
}

fn specialize_atom(ctx: &Context, n: usize, atom: &BaseAtom) -> Result<MbarVector> {
    let not_no_map = || Error::NotNoMap(crate::text::render_base(ctx, &BaseExpr::atom(atom.clone())));
    match atom {
        BaseAtom::Push(a, b) => match (section_of(ctx, a), section_of(ctx, b)) {
            (Some(i), Some(j)) if i == j => Ok(psi(n, i)?.scaled(&-Q::one())),
            (Some(_), Some(_)) => Ok(MbarVector::zero(n)),
            (Some(i), None) | (None, Some(i)) => Ok(psi(n, i)?),
            (None, None) => Err(not_no_map()),
        },
        BaseAtom::SectPull(i, g) => match section_of(ctx, g) {
            Some(j) if j == *i => Ok(psi(n, *i)?.scaled(&-Q::one())),
            Some(_) => Ok(MbarVector::zero(n)),
            None if *g == Gen::Omega => psi(n, *i),
            None => Err(not_no_map()),
        },
        BaseAtom::Psi(i) => psi(n, *i),
        BaseAtom::Boundary(idx) => {
            if !ctx.is_stable(idx) {
                return Ok(MbarVector::zero(n));
            }
            let mut side = 0u32;
            for (sym, &(a, _)) in ctx.coordinates().iter().zip(idx.parts()) {
                if let SymbolKind::Section(k) = sym.kind {
                    if a == 1 {
                        side |= bit(k);
                    }
                }
            }
            Ok(MbarVector::basis(n, Partition::from_side(n, side)))
        }
        BaseAtom::C2Push | BaseAtom::Named(_) | BaseAtom::DiagonalBoundary => Err(not_no_map()),
    }
}

/// Outcome of checking a class against both oracles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub n: usize,
    pub vector: MbarVector,
    pub remainder: MbarVector,
    /// F-curves with nonzero pairing, in F-curve order.
    pub nonzero_pairings: Vec<(FCurve, Q)>,
    pub fcurve_count: usize,
}

impl Verdict {
    pub fn keel_zero(&self) -> bool {
        self.remainder.is_zero()
    }

    pub fn pairings_zero(&self) -> bool {
        self.nonzero_pairings.is_empty()
    }

    pub fn is_zero_class(&self) -> bool {
        self.keel_zero() && self.pairings_zero()
    }
}

/// Both oracles for a fixed number of markings, built once.
pub struct Verifier {
    reducer: KeelReducer,
    curves: Vec<FCurve>,
}

impl Verifier {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Verifier {
            reducer: KeelReducer::new(n)?,
            curves: fcurves(n),
        })
    }

    pub fn n(&self) -> usize {
        self.reducer.n
    }

    pub fn fcurves(&self) -> &[FCurve] {
        &self.curves
    }

    pub fn reducer(&self) -> &KeelReducer {
        &self.reducer
    }

    pub fn verify(&self, v: &MbarVector) -> Result<Verdict> {
        let n = self.n();
        if v.n() != n {
            return Err(Error::Precondition(format!("vector has {} markings, verifier {n}", v.n())));
        }
        let remainder = self.reducer.reduce(v);
        let nonzero_pairings = self
            .curves
            .iter()
            .map(|f| (f.clone(), fcurve_pair(n, f, v)))
            .filter(|(_, d)| !d.is_zero())
            .collect();
        Ok(Verdict {
            n,
            vector: v.clone(),
            remainder,
            nonzero_pairings,
            fcurve_count: self.curves.len(),
        })
    }
}

pub fn verify_vector(v: &MbarVector) -> Result<Verdict> {
    Verifier::new(v.n())?.verify(v)
}

/// Specializes a no-map class and checks it against both oracles.
pub fn specialize_and_verify(ctx: &Context, e: &BaseExpr) -> Result<Verdict> {
    verify_vector(&specialize(ctx, e)?)
}
