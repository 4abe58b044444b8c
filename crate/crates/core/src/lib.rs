//! Detecting conjugacy between iterative optimization algorithms from the
//! spectra of their Koopman operators.

pub mod compare;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod io;
pub mod oracles;
pub mod par;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
