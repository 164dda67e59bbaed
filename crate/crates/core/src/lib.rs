//! Multipole decompositions of polynomials on quadratic surfaces `{Q = c}`.
//!
//! A homogeneous polynomial `P` not divisible by `Q` splits as
//! `P = λ·∏L_ν + Q·R` with linear `L_ν`; the finitely many such splittings are
//! indexed by generalized parcellings of the intersection divisor of `P` with
//! the conic `{Q = 0}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod approx;
pub mod conic;
pub mod deconstruct;
pub mod harmonic;
pub mod maxwell;
pub mod planar;
pub mod sylvester;
pub mod error;

#[cfg(test)]
mod testutil;

pub use algebra::{
    C64, CMat3, CVec3, HomogPoly, Monomial, Poly, QuadForm, QuadratureRule, Tolerances,
};
pub use error::{Error, Result};
