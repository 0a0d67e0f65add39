//! Numerical laboratory for the time decay of nonlocal diffusion
//! equations `du/dt = J*u - chi0 u` with radially symmetric dispersal
//! kernels.
//!
//! The crate verifies, at desk scale, the chain of facts that links
//! kernel structure to solution decay:
//!
//! - [`regvar`]: slowly and regularly varying functions and the Karamata
//!   sup/inf comparison checks.
//! - [`xseries`]: exponential series with regularly varying coefficients,
//!   Kummer's function, and Gamma-ratio asymptotics.
//! - [`kernels`]: grid kernels, k-fold convolution powers through the
//!   Fourier symbol, the sharp Young sup-norm bound, and small-frequency
//!   symbol fits.
//! - [`solver`]: the evolution semigroup by spectral exponentiation and by
//!   the exponential series, two independent routes.
//! - [`decayfit`]: decay-rate fits, envelope hypotheses on iterates, and
//!   the end-to-end theorem scenarios.
//!
//! Everything is deterministic and immutable after construction; the only
//! randomness is an optional, seeded jitter of the Karamata mesh.

pub mod decayfit;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod regvar;
pub mod solver;
pub mod xseries;

pub use error::{Error, Result};
