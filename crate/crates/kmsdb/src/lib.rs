//! Exactly detailed-balanced quantum Markov dynamics at desk scale.
//!
//! The crate turns arbitrary self-adjoint CP maps into maps that satisfy KMS
//! detailed balance with respect to a Gibbs state `ρ ∝ e^{−H}`, completes them
//! into Lindbladians or quantum channels, and checks every construction through
//! dense superoperator linear algebra.

pub mod error;
pub mod linalg;
pub mod serial;
pub mod hamiltonian;
pub mod cpmap;
pub mod quad;
pub mod profile;
pub mod classical;
pub mod balance;
pub mod dynamics;
pub mod timedomain;
pub mod analysis;
pub mod random;

pub use error::{Error, Result};
