pub mod error;
pub mod fft;
pub mod rng;
pub mod solver;
pub mod stimulus;
pub mod targets;

pub use error::{Error, Result};
pub mod search;
pub mod measures;
pub mod stats;
pub mod bench;
pub mod cli;
