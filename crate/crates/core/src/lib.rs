//! Explicit bordered Riemann surfaces whose corona solutions must be large.
//!
//! For `0 < d < c < 1` and `n ≥ 1` the surface
//! `R(n, c, d) = {(z1, z2) : (z1^n - c)/(1 - c z1^n) = z2^{n²}}` carries the
//! corona data `F1 = d^{1/n}/z1`, `F2 = z2`. Averaging `F1·G1` over the fibers
//! of `(z1, z2) ↦ z1^n` and applying Cauchy's formula on the annulus
//! `d < |z| < 1` gives a lower bound on `‖G1‖` for every solution of
//! `F1·G1 + F2·G2 = 1`. The crate builds the surfaces, checks the data,
//! computes the bounds, and tests them against a minimax Bezout solver, an
//! annulus interpolation solver and a monodromy engine.

pub mod cli;
pub mod continuation;
pub mod corona;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod minimax;
pub mod params;
pub mod surface;
pub mod trace;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::Params;
