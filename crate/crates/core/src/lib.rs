//! Reconstruction of a time-dependent Robin (heat-exchange) coefficient from
//! noisy boundary temperature data by hierarchical Bayesian inversion.
//!
//! The pieces, bottom up:
//!
//! * [`forward`] - Crank-Nicolson / linear-FEM solver for the 1D parabolic
//!   problem and the forward map gamma -> u(0, t), plus the three
//!   manufactured reference problems.
//! * [`topology`] - zero-dimensional persistence of discrete sequences and
//!   the persistence-weighted regularizer.
//! * [`priors`] - squared-exponential Gaussian reference measure and the
//!   lambda-free regularizers of the Gaussian / TV-Gaussian / PH-Gaussian
//!   prior models.
//! * [`sampler`] - the pCN-within-Gibbs chain with a Gamma hyperprior on the
//!   regularization strength.
//! * [`harness`] - experiment orchestration: synthetic observations, sweeps
//!   over priors and noise levels, CSV / metadata outputs.

pub mod error;
pub mod forward;
pub mod grid;
pub mod harness;
pub mod priors;
pub mod sampler;
pub mod topology;

pub use error::{Error, Result};
