//! Coupling of a dipole-tipped nanomechanical cantilever to trapped polar
//! molecules: derived couplings, squeezing dynamics under phase noise,
//! dipolar-chain phonons and exact truncated Fock-space checks.

pub mod dynamics;
pub mod error;
pub mod fock_oracle;
pub mod io;
pub mod lattice;
pub mod quantities;

pub use error::{Error, ExitClass, Result};
