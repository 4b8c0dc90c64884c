//! The two expression algebras: classes on the base and on the total space.

mod base;
mod curve;

pub use base::{BaseAtom, BaseExpr, Gen};
pub use curve::{push_product, sect_pull, CurveExpr};
