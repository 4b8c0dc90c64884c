//! Canonical text rendering and parsing.
//!
//! Polynomials: `3/2*x'(D)*x''(D) - k^-1 + 2n`, with juxtaposition or `*`
//! for products and `^` for powers (negative powers on parameters only).
//!
//! Base classes, one term per atom, each with an optional rational or
//! parenthesized polynomial coefficient:
//!
//! ```text
//! pi_*(D.D) + 3 pi_*(D.omega) - Sum'[ x'(D)*x''(D) ] Delta
//! s1^*(D)   pi_*f^*c2   cls(name)   psi(2)   Sum[ p ] Delta
//! Delta(s1=1:0, s2=0:1, D=2:1)   Delta_diag
//! ```
//!
//! Total-space classes use symbol names, `omega`, `pi^*( base )`,
//! `SumT[ p ] DeltaT` and `DeltaT(...)`.

use num_bigint::BigInt;
use num_traits::Signed;

use crate::context::{Context, OMEGA};
use crate::error::{Error, Result};
use crate::expr::{BaseAtom, BaseExpr, CurveExpr, Gen};
use crate::poly::{fmt_q, Poly, Q};
use crate::splitting::{Convention, SplitIndex};

// ---------------------------------------------------------------- rendering

fn push_signed(out: &mut String, negative: bool, body: &str) {
    if out.is_empty() {
        if negative {
            out.push('-');
        }
    } else if negative {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    out.push_str(body);
}

/// Sign and coefficient prefix (with trailing space) of a term.
fn coefficient(c: &Poly) -> (bool, String) {
    if let Some(q) = c.as_constant() {
        let negative = q.is_negative();
        let abs = q.abs();
        if abs == Q::from_integer(BigInt::from(1)) {
            return (negative, String::new());
        }
        return (negative, format!("{} ", fmt_q(&abs)));
    }
    if c.terms().all(|(_, x)| x.is_negative()) {
        (true, format!("({}) ", -c))
    } else {
        (false, format!("({c}) "))
    }
}

/// A boundary sum with its coefficient function folded into the brackets.
fn sum_body(p: &Poly) -> (bool, Poly) {
    if p.terms().all(|(_, x)| x.is_negative()) {
        (true, -p)
    } else {
        (false, p.clone())
    }
}

fn render_index(ctx: &Context, idx: &SplitIndex) -> String {
    ctx.display_index(idx).to_string()
}

fn render_atom(ctx: &Context, atom: &BaseAtom) -> String {
    match atom {
        BaseAtom::Push(a, b) => format!("pi_*({}.{})", a.name(), b.name()),
        BaseAtom::SectPull(i, g) => format!("s{i}^*({})", g.name()),
        BaseAtom::C2Push => "pi_*f^*c2".to_string(),
        BaseAtom::Named(n) => format!("cls({n})"),
        BaseAtom::Psi(i) => format!("psi({i})"),
        BaseAtom::Boundary(idx) => format!("Delta({})", render_index(ctx, idx)),
        BaseAtom::DiagonalBoundary => "Delta_diag".to_string(),
    }
}

/// Canonical text of a base class (rendered as given; normalize first for
/// the canonical form).
pub fn render_base(ctx: &Context, e: &BaseExpr) -> String {
    let mut out = String::new();
    for (atom, c) in e.terms() {
        let (negative, prefix) = coefficient(c);
        push_signed(&mut out, negative, &format!("{prefix}{}", render_atom(ctx, atom)));
    }
    for (p, open, close) in [
        (e.unordered_sum(), "Sum'[ ", " ] Delta"),
        (e.ordered_sum(), "Sum[ ", " ] Delta"),
    ] {
        if !p.is_zero() {
            let (negative, body) = sum_body(p);
            push_signed(&mut out, negative, &format!("{open}{body}{close}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn render_curve(ctx: &Context, e: &CurveExpr) -> String {
    let mut out = String::new();
    for (g, c) in e.gens() {
        let (negative, prefix) = coefficient(c);
        push_signed(&mut out, negative, &format!("{prefix}{}", g.name()));
    }
    if !e.base().is_zero() {
        push_signed(&mut out, false, &format!("pi^*( {} )", render_base(ctx, e.base())));
    }
    let tilde = e.tilde_sum_coefficient();
    if !tilde.is_zero() {
        let (negative, body) = sum_body(tilde);
        push_signed(&mut out, negative, &format!("SumT[ {body} ] DeltaT"));
    }
    for (idx, c) in e.tilde_atoms() {
        let (negative, prefix) = coefficient(c);
        push_signed(&mut out, negative, &format!("{prefix}DeltaT({})", render_index(ctx, idx)));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

// ------------------------------------------------------------------ parsing

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    ctx: Option<&'a Context>,
}

impl<'a> Parser<'a> {
    fn new(src: &str, ctx: Option<&'a Context>) -> Self {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
            ctx,
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            column: self.pos + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_nonws(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek()
    }

    fn starts_with(&self, s: &str) -> bool {
        let mut i = self.pos;
        for c in s.chars() {
            if self.chars.get(i) != Some(&c) {
                return false;
            }
            i += 1;
        }
        true
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.starts_with(s) {
            self.pos += s.chars().count();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`"))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek_nonws().is_none()
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            return self.error("expected a name");
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    /// Identifier without consuming it.
    fn peek_ident(&mut self) -> Option<String> {
        let save = self.pos;
        let id = self.ident().ok();
        self.pos = save;
        id
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected an integer");
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        Ok(digits.parse().expect("digits"))
    }

    fn small_integer(&mut self) -> Result<i64> {
        let n = self.integer()?;
        match i64::try_from(&n) {
            Ok(v) => Ok(v),
            Err(_) => self.error("integer out of range"),
        }
    }

    fn signed_integer(&mut self) -> Result<i64> {
        let negative = self.eat("-");
        let n = self.small_integer()?;
        Ok(if negative { -n } else { n })
    }

    /// `p` or `p/q`.
    fn rational(&mut self) -> Result<Q> {
        let numer = self.integer()?;
        if self.peek() == Some('/') && self.chars.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            let denom = self.integer()?;
            if denom == BigInt::from(0) {
                return self.error("zero denominator");
            }
            return Ok(Q::new(numer, denom));
        }
        Ok(Q::from_integer(numer))
    }

    // -------- polynomials

    fn poly(&mut self) -> Result<Poly> {
        let mut acc = Poly::zero();
        let mut negative = if self.eat("-") {
            true
        } else {
            self.eat("+");
            false
        };
        loop {
            let t = self.poly_term()?;
            acc = if negative { acc - t } else { acc + t };
            if self.eat("+") {
                negative = false;
            } else if self.eat("-") {
                negative = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_factor(&mut self) -> bool {
        matches!(self.peek_nonws(), Some(c) if c.is_ascii_alphanumeric() || c == '(')
    }

    fn poly_term(&mut self) -> Result<Poly> {
        let mut acc = self.poly_factor()?;
        loop {
            if self.eat("*") {
                acc = &acc * &self.poly_factor()?;
            } else if self.starts_factor() {
                acc = &acc * &self.poly_factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn poly_factor(&mut self) -> Result<Poly> {
        let base = self.poly_primary()?;
        if !self.eat("^") {
            return Ok(base);
        }
        let exp = self.signed_integer()?;
        if exp >= 0 {
            return Ok(base.pow(u32::try_from(exp).unwrap_or(u32::MAX)));
        }
        match base.inverse() {
            Some(inv) => Ok(inv.pow(exp.unsigned_abs() as u32)),
            None => self.error("negative powers need a single parameter term"),
        }
    }

    fn poly_primary(&mut self) -> Result<Poly> {
        match self.peek_nonws() {
            Some(c) if c.is_ascii_digit() => Ok(Poly::constant(self.rational()?)),
            Some('(') => {
                self.pos += 1;
                let p = self.poly()?;
                self.expect(")")?;
                Ok(p)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                if self.eat("x''(") {
                    let name = self.split_symbol()?;
                    self.expect(")")?;
                    return Ok(Poly::dprime(&name));
                }
                if self.eat("x'(") {
                    let name = self.split_symbol()?;
                    self.expect(")")?;
                    return Ok(Poly::prime(&name));
                }
                let name = self.ident()?;
                if name == "x" {
                    return self.error("`x` must be followed by ' or ''");
                }
                Ok(Poly::param(&name))
            }
            _ => self.error("expected a number, parameter or split variable"),
        }
    }

    fn split_symbol(&mut self) -> Result<String> {
        let name = self.ident()?;
        if let Some(ctx) = self.ctx {
            if ctx.symbol(&name).is_none() {
                self.pos -= name.len();
                return self.error(format!("unknown symbol `{name}`"));
            }
        }
        Ok(name)
    }

    // -------- shared term structure

    fn context(&self) -> &'a Context {
        self.ctx.expect("expression parsing needs a context")
    }

    fn coefficient(&mut self) -> Result<Poly> {
        let c = match self.peek_nonws() {
            Some(c) if c.is_ascii_digit() => Poly::constant(self.rational()?),
            Some('(') => {
                self.pos += 1;
                let p = self.poly()?;
                self.expect(")")?;
                if p.has_split_vars() {
                    return self.error("term coefficients may only contain parameters");
                }
                p
            }
            _ => return Ok(Poly::one()),
        };
        self.eat("*");
        Ok(c)
    }

    fn generator(&mut self) -> Result<Gen> {
        let name = self.ident()?;
        if name == OMEGA {
            return Ok(Gen::Omega);
        }
        if self.context().symbol(&name).is_none() {
            self.pos -= name.len();
            return self.error(format!("unknown symbol `{name}`"));
        }
        Ok(Gen::Sym(name))
    }

    fn index(&mut self) -> Result<SplitIndex> {
        let ctx = self.context();
        let mut parts: Vec<Option<(i64, i64)>> = vec![None; ctx.coordinates().len()];
        self.expect("(")?;
        if !self.eat(")") {
            loop {
                let name = self.ident()?;
                let Some(pos) = ctx.coordinate_position(&name) else {
                    self.pos -= name.len();
                    return self.error(format!("`{name}` is not a coordinate of the context"));
                };
                self.expect("=")?;
                let a = self.signed_integer()?;
                self.expect(":")?;
                let b = self.signed_integer()?;
                if parts[pos].is_some() {
                    return self.error(format!("`{name}` given twice"));
                }
                let degree = &ctx.coordinates()[pos].degree;
                if let Some(e) = degree.as_integer() {
                    if a + b != e {
                        return self.error(format!("parts of `{name}` must sum to {e}"));
                    }
                }
                if ctx.coordinates()[pos].is_section() && !matches!((a, b), (0, 1) | (1, 0)) {
                    return self.error(format!("section `{name}` splits as 1:0 or 0:1"));
                }
                parts[pos] = Some((a, b));
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        let mut out = Vec::with_capacity(parts.len());
        for (sym, p) in ctx.coordinates().iter().zip(parts) {
            match p {
                Some(p) => out.push(p),
                None => return self.error(format!("missing coordinate `{}`", sym.name)),
            }
        }
        Ok(SplitIndex::new(out))
    }

    fn bracketed_poly(&mut self) -> Result<Poly> {
        self.expect("[")?;
        let p = self.poly()?;
        self.expect("]")?;
        Ok(p)
    }

    /// Runs `term` over a signed sum, stopping before `)` or end of input.
    fn signed_sum<T, F>(&mut self, mut acc: T, mut term: F) -> Result<T>
    where
        F: FnMut(&mut Self, &mut T, Poly) -> Result<()>,
    {
        let mut sign = if self.eat("-") {
            Poly::int(-1)
        } else {
            self.eat("+");
            Poly::one()
        };
        loop {
            let c = self.coefficient()?;
            term(self, &mut acc, &sign * &c)?;
            if self.eat("+") {
                sign = Poly::one();
            } else if self.eat("-") {
                sign = Poly::int(-1);
            } else {
                return Ok(acc);
            }
        }
    }

    // -------- base classes

    fn base_expr(&mut self) -> Result<BaseExpr> {
        if self.is_lone_zero() {
            return Ok(BaseExpr::zero());
        }
        self.signed_sum(BaseExpr::zero(), |p, acc, c| {
            let term = p.base_term()?;
            *acc = &*acc + &term.scale(&c);
            Ok(())
        })
    }

    /// A bare `0` ending the expression or the enclosing parentheses.
    fn is_lone_zero(&mut self) -> bool {
        let save = self.pos;
        if self.eat("0") && matches!(self.peek_nonws(), None | Some(')')) {
            return true;
        }
        self.pos = save;
        false
    }

    fn base_term(&mut self) -> Result<BaseExpr> {
        let ctx = self.context();
        self.skip_ws();
        if self.eat("pi_*f^*c2") {
            return Ok(BaseExpr::c2());
        }
        if self.eat("pi_*(") {
            let a = self.generator()?;
            self.expect(".")?;
            let b = self.generator()?;
            self.expect(")")?;
            return Ok(BaseExpr::push(a, b));
        }
        if self.eat("Sum'") {
            let p = self.bracketed_poly()?;
            self.expect("Delta")?;
            ctx.check_split_vars(&p)?;
            if !ctx.is_swap_symmetric(&p) {
                return Err(Error::AsymmetricSum(p.to_string()));
            }
            return Ok(BaseExpr::boundary_sum(p, Convention::Unordered));
        }
        if self.eat("Sum") {
            let p = self.bracketed_poly()?;
            self.expect("Delta")?;
            ctx.check_split_vars(&p)?;
            return Ok(BaseExpr::boundary_sum(p, Convention::Ordered));
        }
        if self.eat("Delta_diag") {
            return Ok(BaseExpr::atom(BaseAtom::DiagonalBoundary));
        }
        if self.starts_with("Delta") {
            self.pos += "Delta".len();
            let idx = self.index()?;
            return Ok(BaseExpr::boundary(idx));
        }
        if self.eat("cls(") {
            let name = self.ident()?;
            self.expect(")")?;
            return Ok(BaseExpr::named(&name));
        }
        if self.eat("psi(") {
            let i = self.section_number()?;
            self.expect(")")?;
            return Ok(BaseExpr::atom(BaseAtom::Psi(i)));
        }
        if self.peek() == Some('s') {
            let save = self.pos;
            self.pos += 1;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                let i = self.small_integer()?;
                if self.eat("^*(") {
                    let i = self.check_section(save, i)?;
                    let g = self.generator()?;
                    self.expect(")")?;
                    return Ok(BaseExpr::atom(BaseAtom::SectPull(i, g)));
                }
            }
            self.pos = save;
        }
        self.error("expected a base class atom")
    }

    fn section_number(&mut self) -> Result<usize> {
        let save = self.pos;
        let i = self.small_integer()?;
        self.check_section(save, i)
    }

    fn check_section(&mut self, at: usize, i: i64) -> Result<usize> {
        let ctx = self.context();
        match usize::try_from(i) {
            Ok(i) if i >= 1 && i <= ctx.section_count() => Ok(i),
            _ => {
                self.pos = at;
                self.error(format!("no section s{i} in the context"))
            }
        }
    }

    // -------- total-space classes

    fn curve_expr(&mut self) -> Result<CurveExpr> {
        if self.is_lone_zero() {
            return Ok(CurveExpr::zero());
        }
        self.signed_sum(CurveExpr::zero(), |p, acc, c| {
            let term = p.curve_term()?;
            *acc = &*acc + &term.scale(&c);
            Ok(())
        })
    }

    fn curve_term(&mut self) -> Result<CurveExpr> {
        let ctx = self.context();
        self.skip_ws();
        if self.eat("pi^*(") {
            let b = self.base_expr()?;
            self.expect(")")?;
            return Ok(CurveExpr::pullback(b));
        }
        if self.eat("SumT") {
            let p = self.bracketed_poly()?;
            self.expect("DeltaT")?;
            ctx.check_split_vars(&p)?;
            return Ok(CurveExpr::tilde_sum(p, Convention::Ordered));
        }
        if self.starts_with("DeltaT") {
            self.pos += "DeltaT".len();
            let idx = self.index()?;
            return Ok(CurveExpr::tilde_atom(idx));
        }
        if self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            if let Some(name) = self.peek_ident() {
                if name == OMEGA || ctx.symbol(&name).is_some() {
                    return Ok(CurveExpr::gen(self.generator()?));
                }
                return self.error(format!("unknown symbol `{name}`"));
            }
        }
        self.error("expected a total-space class atom")
    }

    fn finish<T>(&mut self, value: T) -> Result<T> {
        if self.at_end() {
            Ok(value)
        } else {
            self.error("unexpected trailing input")
        }
    }
}

/// Parses a polynomial in parameters and split variables (split variables
/// unchecked).
pub fn parse_poly(src: &str) -> Result<Poly> {
    let mut p = Parser::new(src, None);
    let value = p.poly()?;
    p.finish(value)
}

/// Parses a polynomial whose split variables must name context symbols.
pub fn parse_poly_in(ctx: &Context, src: &str) -> Result<Poly> {
    let mut p = Parser::new(src, Some(ctx));
    let value = p.poly()?;
    p.finish(value)
}

pub fn parse_base(ctx: &Context, src: &str) -> Result<BaseExpr> {
    let mut p = Parser::new(src, Some(ctx));
    let value = p.base_expr()?;
    p.finish(value)
}

pub fn parse_curve(ctx: &Context, src: &str) -> Result<CurveExpr> {
    let mut p = Parser::new(src, Some(ctx));
    let value = p.curve_expr()?;
    p.finish(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{Effectivity, StabilityMode};
    use crate::poly::q_frac;

    fn ctx() -> Context {
        Context::sections_only(2, StabilityMode::Artin)
            .with_symbol("D", Poly::int(3), Effectivity::Nonnegative)
            .unwrap()
            .with_symbol("K", Poly::param("k"), Effectivity::Unbounded)
            .unwrap()
    }

    #[test]
    fn poly_syntax() {
        let p = parse_poly("3/2 x'(D)x''(D) - 2*k^-1 + (n+1)^2").unwrap();
        let expected = Poly::prime("D") * Poly::dprime("D") * Poly::constant(q_frac(3, 2))
            - Poly::param("k").inverse().unwrap() * Poly::int(2)
            + (Poly::param("n") + Poly::one()).pow(2);
        assert_eq!(p, expected);
        assert_eq!(parse_poly(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn poly_errors() {
        assert!(parse_poly("x'(D").is_err());
        assert!(parse_poly("(x'(D))^-1").is_err());
        assert!(parse_poly("1/0").is_err());
        assert!(matches!(parse_poly("2 +"), Err(Error::Parse { column: 4, .. })));
    }

    #[test]
    fn base_example_round_trips() {
        let ctx = ctx();
        let src = "pi_*(D.D) + 3 pi_*(D.omega) - Sum'[ x'(D)x''(D) ] Delta";
        let e = parse_base(&ctx, src).unwrap();
        assert_eq!(e.coefficient(&BaseAtom::push(Gen::sym("D"), Gen::Omega)), Poly::int(3));
        let text = render_base(&ctx, &e);
        assert_eq!(text, "pi_*(D.D) + 3 pi_*(D.omega) - Sum'[ x'(D)*x''(D) ] Delta");
        assert_eq!(parse_base(&ctx, &text).unwrap(), e);
    }

    #[test]
    fn every_atom_round_trips() {
        let ctx = ctx();
        let src = "(k^-1) pi_*(s1.K) - 1/2 s2^*(D) + pi_*f^*c2 + cls(H) + 2 psi(1) \
                   + Delta(s1=1:0, s2=0:1, D=2:1, K=0:0) + Delta_diag + Sum[ x'(s1) ] Delta";
        let e = parse_base(&ctx, &src).unwrap();
        assert_eq!(parse_base(&ctx, &render_base(&ctx, &e)).unwrap(), e);
    }

    #[test]
    fn curve_round_trips() {
        let ctx = ctx();
        let src = "2 D - pi^*( pi_*(D.D) ) + 9 omega - SumT[ x''(D)^2 ] DeltaT + DeltaT(s1=1:0, s2=1:0, D=3:0, K=0:0)";
        let e = parse_curve(&ctx, src).unwrap();
        assert_eq!(parse_curve(&ctx, &render_curve(&ctx, &e)).unwrap(), e);
    }

    #[test]
    fn rejects_unknowns_and_asymmetry() {
        let ctx = ctx();
        assert!(matches!(parse_base(&ctx, "pi_*(E.E)"), Err(Error::Parse { column: 6, .. })));
        assert!(matches!(parse_base(&ctx, "Sum'[ x'(D) ] Delta"), Err(Error::AsymmetricSum(_))));
        assert!(parse_base(&ctx, "s3^*(D)").is_err());
        assert!(parse_base(&ctx, "Delta(s1=1:0)").is_err());
        assert!(parse_base(&ctx, "Delta(s1=1:1, s2=0:1, D=3:0, K=0:0)").is_err());
        assert!(parse_base(&ctx, "pi_*(D.D) pi_*(D.D)").is_err());
    }

    #[test]
    fn zero_renders_and_parses() {
        let ctx = ctx();
        assert_eq!(render_base(&ctx, &BaseExpr::zero()), "0");
        assert!(parse_base(&ctx, "0").unwrap().is_zero());
        assert!(parse_curve(&ctx, " 0 ").unwrap().is_zero());
        assert!(parse_curve(&ctx, "pi^*(0)").unwrap().is_zero());
    }
}
