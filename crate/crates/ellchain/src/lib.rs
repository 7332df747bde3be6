//! Elliptic spin-Ruijsenaars systems and the long-range spin chains obtained by freezing them.
//!
//! The crate is organised bottom-up:
//!
//! - [`elliptic`]: the odd theta function normalised by θ′(0)=1, the Kronecker function, identities.
//! - [`linalg`]: dense matrices on (ℂ^r)^{⊗N}, two-site embeddings, prefix weights, binary export.
//! - [`rmatrix`]: vertex (Baxter–Belavin) and face (Felder) R-matrices, deformed permutations.
//! - [`perm`]: permutations, reduced words, and the products P_w(x), P_I(x).
//! - [`diffops`]: difference operators with matrix coefficients and the Ruijsenaars operators.
//! - [`classical`]: classical Ruijsenaars–Schneider functions, flows, and equilibria.
//! - [`modular`]: the SL(2,ℤ) action and the modular family of equilibria.
//! - [`freezing`]: the order-ħ term, evaluation at equilibria, and the frozen hamiltonians.
//! - [`hybrid`]: RK4 integrator for the classical flow coupled to a spin observable.
//!
//! Matrices use the big-endian basis: site 1 is the slowest tensor index, colours run 0..r−1.

pub mod classical;
pub mod diffops;
pub mod elliptic;
mod error;
pub mod freezing;
pub mod hybrid;
pub mod linalg;
pub mod modular;
pub mod perm;
pub mod rmatrix;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = nalgebra::Complex<f64>;

/// Shorthand constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
