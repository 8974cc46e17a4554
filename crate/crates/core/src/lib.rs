//! Two-qubit Bell-CHSH and key-rate analysis, optimal local filtering via
//! the Lorentz normal form of the Mueller matrix, and a seeded Monte Carlo
//! simulator of the filtered entanglement-based key distribution protocol.

pub mod error;
pub mod filtering;
pub mod linalg;
pub mod metrics;
pub mod sim;
pub mod states;
pub mod sweep;

pub use error::{Error, Result};
