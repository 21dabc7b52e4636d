pub mod analysis;
pub mod corrugation;
pub mod error;
pub mod formal;
pub mod geom;
pub mod holonomic;
pub mod metrics;
pub mod schedule;
pub mod specfun;

pub use error::{Error, Result};
