pub mod error;
pub mod linalg;

pub use error::{LabError, Result};
pub mod approxfn;
pub mod cli;
pub mod config;
pub mod lattice;
pub mod measures;
pub mod oracle;
pub mod orbit;
pub mod stats;
pub(crate) mod trig;
