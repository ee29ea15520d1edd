//! Trace statistics of random matrices on classical matrix spaces.

pub mod engine;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod oracle;
pub mod rng;
pub mod spaces;
pub mod stats;
pub mod stein;
pub mod theory;
pub mod trace_stats;

pub use error::{Error, Result};
pub use matrix::CMatrix;
pub use spaces::{MatrixSpace, SpaceKind};
