//! Simulation and learning toolkit for RIS-assisted UAV data collection with
//! wireless power transfer, scored by the age of information.

pub mod agent;
pub mod channel;
pub mod config;
pub mod energy;
pub mod env;
pub mod episode;
pub mod error;
pub mod harness;
pub mod nn;
pub mod per;
pub mod ris;
pub mod rng;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use rng::RngStream;
