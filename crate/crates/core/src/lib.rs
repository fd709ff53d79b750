pub mod aop;
pub mod charges;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod solver;
pub mod symmetric;
pub mod symwave;
pub mod transfer;

pub use error::{Error, Result};
