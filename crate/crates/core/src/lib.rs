pub mod bench;
pub mod cli;
pub mod config;
pub mod copula;
pub mod error;
pub mod regression;
pub mod rng;
pub mod sample;
pub mod scoring;
pub mod synth;
pub mod topology;
pub mod trac;

pub use config::{run_method, Outcome, RunConfig};
pub use error::{Error, Result};
pub use sample::PairSample;
