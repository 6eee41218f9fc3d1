//! Spectral Galerkin simulation of the stochastic pseudo-parabolic
//! (dynamic capillarity) equation on flat tori,
//!
//! ```text
//! du + div f(x,u) dt = ε Δu dt + δ dΔu + Φ(x,u) dW,
//! ```
//!
//! together with a finite-volume reference solver for the limiting
//! stochastic conservation law, kinetic diagnostics, and the Monte-Carlo
//! harness that checks a priori estimates and the vanishing
//! diffusion–capillarity limit.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod flux;
pub mod fv;
pub mod harness;
pub mod initial;
pub mod kinetic;
pub mod noise;
pub mod report;
pub mod solver;
pub mod spectral;
pub mod stats;
pub mod wiener;

pub use error::{Error, Result};
