//! Pseudospectral simulation and verification laboratory for the
//! one-dimensional coupled quadratic Schrödinger system
//!
//! ```text
//! i u_t + u_xx       = v ū
//! i v_t + α v_xx     = u² / 2
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: periodic Fourier grid, transforms, dealiased products,
//!   Sobolev-type norms and dyadic blocks.
//! * [`evolution`]: Strang-split time stepping with exact linear propagators.
//! * [`functionals`]: hyperplane-restricted multilinear sums Λₖ, elongation,
//!   mass and energy.
//! * [`imethod`]: the smoothed frequency cutoff, modified masses E₂/E₃ and
//!   their derivative identities.
//! * [`resonance`]: closed-form resonance functions and frequency-set
//!   classification.
//! * [`certifier`]: space-time counterexample sets, discrete X^{s,b} norms and
//!   scaling-slope fits.
//! * [`planner`]: exponent arithmetic of the global iteration schemes.
//! * [`cli`]: experiment harness and CSV output.

pub mod certifier;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod fit;
pub mod functionals;
pub mod imethod;
pub mod planner;
pub mod resonance;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
