//! Forward and inverse spectral computations for the canonical Dirac system
//! `B y' + Omega(x) y = lambda rho(x) y` on `[0, pi]` with a one-jump
//! weight and boundary conditions that depend linearly on `lambda`.
//!
//! Module map:
//! - [`model`]: boundary coefficients, weight, potential, grid.
//! - [`integrator`]: RK4 propagation of `phi`, `psi` and `C`.
//! - [`charfn`]: characteristic function and asymptotic seeds.
//! - [`eigensolver`]: eigenvalues, norming constants, proportionality factors.
//! - [`weyl`]: the Weyl function and Weyl solution.
//! - [`expansion`]: inner product, eigenfunction expansion, resolvent.
//! - [`inverse`]: potential reconstruction from spectral data.
//! - [`cli`]: command implementations behind the `diracspec` binary.

pub mod charfn;
pub mod cli;
pub mod eigensolver;
pub mod error;
pub mod expansion;
pub mod integrator;
pub mod inverse;
pub mod model;
pub mod output;
pub mod par;
pub mod presets;
pub mod quadrature;
mod roots;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64;
