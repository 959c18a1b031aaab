//! Classical simulation of partially entangled two-qubit correlations with
//! shared randomness, one millionaire box and one PR box, plus the
//! quantum reference model and a statistical harness to compare them.

pub mod error;
pub mod geom;
pub mod protocol;
pub mod quantum;
pub mod resources;
pub mod stats;
mod stream;

pub use error::{Error, Result};
