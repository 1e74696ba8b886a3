//! Generalized Dedekind sums, their continued-fraction closed forms, Todd
//! series of plane lattice cones, partial zeta values of real quadratic
//! fields and equidistribution experiments on the fractional parts.

pub mod arith;
pub mod contfrac;
pub mod dedekind;
pub mod equidist;
pub mod error;
pub mod quadfield;
pub mod registry;
pub mod toddcone;
pub mod verify;
pub mod zeta;

pub use arith::Rational;
pub use error::{Error, ErrorKind, Result};
