//! Bubbles, periodic Green's functions and reduced equations for the
//! Hardy-Sobolev critical problem `-Δu = M(x) u^{N/(N-2)}/|y|` on a strip that
//! is periodic in some of the `z` directions.
//!
//! The crate is organised by layer:
//!
//! - [`geometry`]: dimensions, the Newtonian kernel, lattice sums, the periodic Green's function
//! - [`bubble`]: the bubble family, its parameter derivatives, the analytic Laplacian
//! - [`model`]: a concrete periodic curvature function `M`
//! - [`quad`]: reduced 2D quadrature, the constants `B, D, F, B_i`, the Gram matrix, Monte Carlo
//! - [`projection`]: the projected bubble `PW` and the discrepancy `φ = W - PW`
//! - [`norms`]: weighted sup norms, the error term `l`, the nonlinear remainder, slope fits
//! - [`reduction`]: the reduced balance equations, `C₀` and `λ_L`
//! - [`config`], [`report`], [`cli`]: run configuration, JSON/CSV output, the `bubblestrip` binary
//!
//! The `examples/` directory has one runnable program per capability.

pub mod bubble;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod model;
pub mod norms;
pub mod projection;
pub mod quad;
pub mod reduction;
pub mod report;

pub use error::{Error, Result};
