//! Potential theory for the degenerate elliptic operator
//! `H(u) = Σ u_{xᵢxᵢ} + (2α/x₁) u_{x₁}` on domains in the half-space `x₁ > 0`.
//!
//! Layers, bottom up:
//!
//! - [`specfun`]: Gamma, Pochhammer and Gauss ₂F₁.
//! - [`kernel`]: the fundamental solutions `q₁`, `q₂` and their gradients.
//! - [`surface`]: quadrature on surfaces of revolution meeting `x₁ = 0` at a right angle.
//! - [`potentials`]: double- and simple-layer potentials and their traces.
//! - [`bie`]: Nyström discretisation and dense second-kind solves.
//! - [`green`]: Green's function of the Holmgren problem.
//! - [`holmgren`]: the Holmgren mixed boundary value problem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bie;
pub mod error;
pub mod green;
pub mod holmgren;
pub mod kernel;
pub mod linalg;
pub mod potentials;
pub mod quadrature;
pub mod residual;
pub mod specfun;
pub mod surface;

pub use error::{Error, Result};
pub use kernel::{HalfSpacePoint, Params};
