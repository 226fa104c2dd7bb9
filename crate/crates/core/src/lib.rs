//! Finite-field Bertini densities with a prescribed subscheme.
//!
//! The crate computes, over small finite fields, the objects appearing in
//! Bertini theorems for hypersurfaces containing a closed subscheme `Z`:
//! graded pieces `I_d`, first-order jets, smoothness of hypersurface sections,
//! embedding-dimension strata and zeta functions. The [`sieve`] module
//! compares exhaustive and Monte-Carlo densities against the predicted
//! `#T/#H⁰(Y, O_Y) · ζ_{U−V}(m+1)^{-1}`.

pub mod arith;
pub mod cli;
pub mod fixture;
pub mod geometry;
pub mod gf;
pub mod ideals;
pub mod linalg;
pub mod poly;
pub mod sieve;
pub mod zeta;

pub use geometry::{ClosedPoint, Dimension, ProjPoint, Scheme};
pub use gf::{Elem, Field, Tower};
pub use ideals::{GradedBasis, LocalConditions};
pub use poly::Poly;
pub use sieve::{DensityReport, SieveConfig};
pub use zeta::{RationalZeta, ZetaValue};
