//! Exact invariant theory of finite group and group-scheme actions on
//! truncated local models of curves.

pub mod action;
pub mod algebra;
pub mod base_change;
pub mod cohomology;
pub mod curves;
pub mod det;
pub mod error;
pub mod group;
pub mod invariants;
pub mod linalg;
pub mod parse;
pub mod polarize;
pub mod ring;
pub mod scenario;

pub use algebra::{AlgebraBuilder, Element, Monomial, NormalFormAlgebra, UniPoly};
pub use error::{Error, Result};
pub use ring::{BaseRing, Scalar};
