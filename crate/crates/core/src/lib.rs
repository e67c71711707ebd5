pub mod arith;
pub mod error;
pub mod geometry;
pub mod hecke;
pub mod lfunctions;
pub mod moments;
pub mod precision;
pub mod qseries;
pub mod special;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
