//! Contexts: which divisor symbols are tracked on the family, their
//! relative degrees, and how their degree splittings are constrained.
//!
//! Context files are TOML:
//!
//! ```toml
//! [mode]
//! stability = "artin"        # or "deligne-mumford"
//! disjoint_sections = true   # sections pairwise disjoint (default true)
//! suppress_boundary = false  # irreducible families: every boundary class is 0
//!
//! [sections]
//! count = 4                  # sections s1..s4, each of relative degree 1
//!
//! [symbols.D]
//! degree = 3                 # integer, or a parameter polynomial such as "k"
//!
//! [symbols.omega]
//! kind = "canonical"         # optional; omega is always available
//!
//! [effectivity]
//! D = "nonnegative"          # or "unbounded", or { bound = 2 }
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::text;

pub const OMEGA: &str = "omega";

const RESERVED: &[&str] = &[
    "omega", "pi", "Sum", "SumT", "Delta", "DeltaT", "Delta_diag", "cls", "psi", "x",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum StabilityMode {
    #[default]
    Artin,
    DeligneMumford,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    General,
    /// Section with the given 1-based marking.
    Section(usize),
    Canonical,
}

/// Allowed splittings `(d', d'')` of a general symbol's degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Effectivity {
    #[default]
    Unbounded,
    /// Both parts nonnegative.
    Nonnegative,
    /// `|d'| <= b` and `|d''| <= b`.
    Bounded(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    /// Total relative degree; a constant or a polynomial in parameters.
    pub degree: Poly,
    pub effectivity: Effectivity,
}

impl Symbol {
    pub fn is_section(&self) -> bool {
        matches!(self.kind, SymbolKind::Section(_))
    }
}

/// Tracked symbols plus global flags. Coordinates of a split index follow
/// `coordinates()`: sections `s1..sr` first, then general symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    coords: Vec<Symbol>,
    pub stability: StabilityMode,
    pub disjoint_sections: bool,
    pub suppress_boundary: bool,
}

impl Default for Context {
    fn default() -> Self {
        Context::new(StabilityMode::Artin)
    }
}

pub fn section_name(i: usize) -> String {
    format!("s{i}")
}

fn is_section_like(name: &str) -> bool {
    name.strip_prefix('s')
        .is_some_and(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Context {
    pub fn new(stability: StabilityMode) -> Self {
        Context {
            coords: Vec::new(),
            stability,
            disjoint_sections: true,
            suppress_boundary: false,
        }
    }

    /// The universal family over the moduli of `r`-pointed curves: sections only.
    pub fn sections_only(r: usize, stability: StabilityMode) -> Self {
        Context::new(stability).with_sections(r)
    }

    /// Replaces the section set by `s1..sr`.
    pub fn with_sections(mut self, r: usize) -> Self {
        self.coords.retain(|s| !s.is_section());
        let sections = (1..=r).map(|i| Symbol {
            name: section_name(i),
            kind: SymbolKind::Section(i),
            degree: Poly::one(),
            effectivity: Effectivity::Bounded(1),
        });
        let general = std::mem::take(&mut self.coords);
        self.coords = sections.chain(general).collect();
        self
    }

    pub fn with_symbol(mut self, name: &str, degree: Poly, effectivity: Effectivity) -> Result<Self> {
        self.add_symbol(name, degree, effectivity)?;
        Ok(self)
    }

    /// Adds a general symbol, or replaces the degree/effectivity of an
    /// existing one.
    pub fn add_symbol(&mut self, name: &str, degree: Poly, effectivity: Effectivity) -> Result<()> {
        if !valid_identifier(name) || RESERVED.contains(&name) || is_section_like(name) {
            return Err(Error::Precondition(format!(
                "`{name}` is not allowed as a general symbol name"
            )));
        }
        if degree.has_split_vars() {
            return Err(Error::Precondition(format!(
                "degree of `{name}` may only involve parameters"
            )));
        }
        let symbol = Symbol {
            name: name.to_string(),
            kind: SymbolKind::General,
            degree,
            effectivity,
        };
        match self.coords.iter_mut().find(|s| s.name == name) {
            Some(existing) => *existing = symbol,
            None => self.coords.push(symbol),
        }
        Ok(())
    }

    pub fn with_stability(mut self, stability: StabilityMode) -> Self {
        self.stability = stability;
        self
    }

    pub fn with_suppressed_boundary(mut self, suppress: bool) -> Self {
        self.suppress_boundary = suppress;
        self
    }

    /// Split coordinates in index order (everything except `omega`).
    pub fn coordinates(&self) -> &[Symbol] {
        &self.coords
    }

    pub fn coordinate_position(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|s| s.name == name)
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.coords.iter().find(|s| s.name == name)
    }

    pub fn section_count(&self) -> usize {
        self.coords.iter().filter(|s| s.is_section()).count()
    }

    pub fn general_symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.coords.iter().filter(|s| s.kind == SymbolKind::General)
    }

    pub fn is_sections_only(&self) -> bool {
        self.general_symbols().next().is_none()
    }

    /// Marking of a section symbol.
    pub fn section_index(&self, name: &str) -> Option<usize> {
        match self.symbol(name)?.kind {
            SymbolKind::Section(i) => Some(i),
            _ => None,
        }
    }

    pub fn require_section(&self, i: usize) -> Result<String> {
        if i == 0 || i > self.section_count() {
            return Err(Error::Precondition(format!(
                "section s{i} does not exist (r = {})",
                self.section_count()
            )));
        }
        Ok(section_name(i))
    }

    pub fn degree_of(&self, name: &str) -> Result<Poly> {
        if name == OMEGA {
            return Ok(Poly::int(-2));
        }
        self.symbol(name)
            .map(|s| s.degree.clone())
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    /// Parses a TOML context file.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let raw: RawContext = toml::from_str(src).map_err(|e| toml_error(src, &e))?;
        raw.build(src)
    }
}

impl fmt::Display for StabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityMode::Artin => write!(f, "artin"),
            StabilityMode::DeligneMumford => write!(f, "deligne-mumford"),
        }
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn toml_error(src: &str, e: &toml::de::Error) -> Error {
    let (line, column) = e.span().map_or((1, 1), |span| line_col(src, span.start));
    Error::Context {
        line,
        column,
        message: e.message().to_string(),
    }
}

fn spanned_error<T>(src: &str, value: &toml::Spanned<T>, message: String) -> Error {
    let (line, column) = line_col(src, value.span().start);
    Error::Context {
        line,
        column,
        message,
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawContext {
    #[serde(default)]
    mode: RawMode,
    #[serde(default)]
    sections: RawSections,
    #[serde(default)]
    symbols: BTreeMap<String, toml::Spanned<RawSymbol>>,
    #[serde(default)]
    effectivity: BTreeMap<String, toml::Spanned<RawEffectivity>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    #[serde(default = "default_stability")]
    stability: toml::Spanned<String>,
    #[serde(default = "yes")]
    disjoint_sections: bool,
    #[serde(default)]
    suppress_boundary: bool,
}

impl Default for RawMode {
    fn default() -> Self {
        RawMode {
            stability: default_stability(),
            disjoint_sections: true,
            suppress_boundary: false,
        }
    }
}

fn default_stability() -> toml::Spanned<String> {
    toml::Spanned::new(0..0, "artin".to_string())
}

fn yes() -> bool {
    true
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSections {
    #[serde(default)]
    count: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbol {
    #[serde(default)]
    degree: Option<RawDegree>,
    #[serde(default)]
    kind: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawDegree {
    Int(i64),
    Expr(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEffectivity {
    Named(String),
    Bound { bound: u64 },
}

impl RawContext {
    fn build(self, src: &str) -> Result<Context> {
        let stability = match self.mode.stability.get_ref().as_str() {
            "artin" => StabilityMode::Artin,
            "deligne-mumford" | "dm" => StabilityMode::DeligneMumford,
            other => {
                return Err(spanned_error(
                    src,
                    &self.mode.stability,
                    format!("unknown stability mode `{other}` (expected artin or deligne-mumford)"),
                ))
            }
        };
        let mut ctx = Context::new(stability).with_sections(self.sections.count);
        ctx.disjoint_sections = self.mode.disjoint_sections;
        ctx.suppress_boundary = self.mode.suppress_boundary;

        let mut canonical_seen = false;
        for (name, decl) in &self.symbols {
            let kind = decl.get_ref().kind.as_deref().unwrap_or("general");
            match kind {
                "canonical" => {
                    if canonical_seen || name != OMEGA {
                        return Err(spanned_error(
                            src,
                            decl,
                            format!("only one canonical symbol is permitted and it must be named `{OMEGA}`"),
                        ));
                    }
                    canonical_seen = true;
                    if decl.get_ref().degree.is_some() {
                        return Err(spanned_error(
                            src,
                            decl,
                            "the canonical symbol has fixed relative degree -2".to_string(),
                        ));
                    }
                    continue;
                }
                "general" => {}
                "section" => {
                    return Err(spanned_error(
                        src,
                        decl,
                        "sections are declared through [sections] count".to_string(),
                    ))
                }
                other => {
                    return Err(spanned_error(src, decl, format!("unknown symbol kind `{other}`")))
                }
            }
            let degree = match &decl.get_ref().degree {
                Some(RawDegree::Int(n)) => Poly::int(*n),
                Some(RawDegree::Expr(e)) => text::parse_poly(e)
                    .map_err(|err| spanned_error(src, decl, format!("bad degree `{e}`: {err}")))?,
                None => {
                    return Err(spanned_error(src, decl, format!("symbol `{name}` needs a degree")))
                }
            };
            ctx.add_symbol(name, degree, Effectivity::Unbounded)
                .map_err(|err| spanned_error(src, decl, err.to_string()))?;
        }

        for (name, eff) in &self.effectivity {
            let effectivity = match eff.get_ref() {
                RawEffectivity::Named(s) if s == "nonnegative" => Effectivity::Nonnegative,
                RawEffectivity::Named(s) if s == "unbounded" => Effectivity::Unbounded,
                RawEffectivity::Named(s) => {
                    return Err(spanned_error(src, eff, format!("unknown effectivity `{s}`")))
                }
                RawEffectivity::Bound { bound } => Effectivity::Bounded(*bound),
            };
            let Some(symbol) = ctx.coords.iter_mut().find(|s| &s.name == name) else {
                return Err(spanned_error(src, eff, format!("effectivity for undeclared symbol `{name}`")));
            };
            if symbol.is_section() {
                return Err(spanned_error(src, eff, "section splittings are fixed".to_string()));
            }
            symbol.effectivity = effectivity;
        }
        Ok(ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let src = r#"
[mode]
stability = "deligne-mumford"

[sections]
count = 3

[symbols.D]
degree = 2

[symbols.K]
degree = "k"

[symbols.omega]
kind = "canonical"

[effectivity]
D = "nonnegative"
K = { bound = 4 }
"#;
        let ctx = Context::from_toml_str(src).unwrap();
        assert_eq!(ctx.stability, StabilityMode::DeligneMumford);
        assert_eq!(ctx.section_count(), 3);
        let names: Vec<_> = ctx.coordinates().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["s1", "s2", "s3", "D", "K"]);
        assert_eq!(ctx.degree_of("K").unwrap(), Poly::param("k"));
        assert_eq!(ctx.symbol("K").unwrap().effectivity, Effectivity::Bounded(4));
        assert_eq!(ctx.degree_of(OMEGA).unwrap(), Poly::int(-2));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = Context::from_toml_str("[mode]\nstability = \n").unwrap_err();
        match err {
            Error::Context { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_error_has_position() {
        let src = "[symbols.D]\ndegree = 1\n\n[effectivity]\nE = \"nonnegative\"\n";
        match Context::from_toml_str(src).unwrap_err() {
            Error::Context { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("undeclared"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn second_canonical_rejected() {
        let src = "[symbols.w]\nkind = \"canonical\"\n";
        assert!(matches!(Context::from_toml_str(src), Err(Error::Context { .. })));
    }

    #[test]
    fn reserved_names_rejected() {
        let ctx = Context::default();
        assert!(ctx.clone().with_symbol("s9", Poly::one(), Effectivity::Unbounded).is_err());
        assert!(ctx.clone().with_symbol("Delta", Poly::one(), Effectivity::Unbounded).is_err());
        assert!(ctx.with_symbol("L2", Poly::zero(), Effectivity::Unbounded).is_ok());
    }
}
