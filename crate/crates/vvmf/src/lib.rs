//! Vector-valued modular forms from modular linear differential equations.

pub mod cli;
pub mod conformal;
pub mod error;
pub mod families;
pub mod frobenius;
pub mod hypergeom;
pub mod mlde;
pub mod ring;
pub mod series;

pub use error::{Error, Result};
