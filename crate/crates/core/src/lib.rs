//! Minimum Bayes risk decoding under a misspecified model: samplers,
//! utilities, decoders, Wasserstein distances, regret bounds and the
//! simulation harness that compares them.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod decoding;
pub mod error;
pub mod hypothesis_space;
pub mod report;
pub mod rng;
pub mod simulation;
pub mod transport;
pub mod utility;

pub use error::{Error, Result};
