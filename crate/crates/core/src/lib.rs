//! Exact symbolic engine for tautological divisor classes on families of
//! genus-0 prestable curves.

pub mod context;
pub mod error;
pub mod expr;
pub mod graphs;
pub mod mbar;
pub mod poly;
pub mod relations;
pub mod selftest;
pub mod splitting;
pub mod text;
pub mod vcb;

pub use context::{Context, Effectivity, StabilityMode, Symbol, SymbolKind};
pub use error::{Error, Result};
pub use expr::{push_product, sect_pull, BaseAtom, BaseExpr, CurveExpr, Gen};
pub use poly::{Poly, Var, Q};
pub use splitting::{expand_sum, Convention, SplitIndex};
