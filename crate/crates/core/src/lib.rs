pub mod cli;
pub mod error;
pub mod experiments;
pub mod expansion;
pub mod hermite;
pub mod integrate;
pub mod interpolation;
pub mod quadrature;
pub mod space;
pub mod tridiag;

pub use error::{Error, Result};
