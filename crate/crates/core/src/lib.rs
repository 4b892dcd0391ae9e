pub mod arith;
pub mod birkhoff;
pub mod cli;
pub mod error;
pub mod frobenius;
pub mod curvature;
pub mod places;
pub mod qdiff;
pub mod rootdyn;

pub use error::{Error, Result};
