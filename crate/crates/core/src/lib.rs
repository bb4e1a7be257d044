//! Core of the symmetric binary perceptron (SBP) lab.
//!
//! The SBP asks for spin vectors `X ∈ {−1,+1}^n` satisfying
//! `|⟨G_j, X⟩| ≤ κ√n` for every row `G_j` of an `m × n` Rademacher matrix.
//! This crate holds everything that does not touch the filesystem:
//!
//! - [`theory`]: continuous constants (`P_κ`, `μ_{2,κ}`, `β`, `α_c`, the
//!   overlap function `q_κ`) and their finite-`n` analogues
//! - [`model`]: bit-packed matrices and spins, exact Gray-code counting,
//!   first and second moments
//! - [`planted`]: rejection samplers for the planted and pair-planted laws
//! - [`cycles`]: dense cycle statistics `C_k` and the correction term `Y`
//! - [`stats`]: verdict-producing statistical checks
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cycles;
mod error;
pub mod kappa;
pub mod model;
pub mod numeric;
pub mod planted;
pub mod seed;
pub mod stats;
pub mod theory;

pub use crate::{
    error::{Error, Result},
    kappa::Kappa,
    model::{ConstraintMatrix, ModelParams, SpinVector},
};
