//! Finite linear harmonic oscillator built on spin-l representations of so(3).
//!
//! The position, momentum and "imaginary unit" of the Heisenberg algebra are
//! replaced by the three generators of a (2l+1)-dimensional so(3) irrep,
//! scaled by small quanta `Q`, `P` and `J = 1/l`. The oscillator Hamiltonian
//! `H = (K/2)(Lx² + κ² Ly²)` is then a finite real symmetric matrix with an
//! upper energy limit, a doubly degenerate low-lying spectrum at `κ = 1`,
//! and strongly non-classical behaviour for `κ → 0` and `κ → ∞`.
//!
//! Modules:
//!
//! - [`liealg`]: structure constants, Jacobi defect, Killing form,
//!   semisimplicity verdict and contraction trajectories.
//! - [`su2rep`]: spin-l generator matrices in real split form, quantum
//!   constants and commutator checks.
//! - [`oscillator`]: banded Hamiltonian, parity blocks and the tridiagonal
//!   eigensolvers (implicit QL, Sturm bisection + inverse iteration).
//! - [`analysis`]: closed-form and perturbative spectra, bounds,
//!   uncertainty products and regime classification.
//! - [`cli`]: the `flho` command-line front end.

pub mod analysis;
pub mod cli;
mod error;
pub mod liealg;
pub mod output;
pub mod oscillator;
pub mod su2rep;

pub use error::{Error, Result};
