//! Simulation and analysis of a fault-tolerant continuous-variable
//! measurement-based computing pipeline: Gaussian cluster-state construction
//! and verification, gate-noise accounting, biased-GKP plus repetition-code
//! error rates, squeezing thresholds, and a Monte Carlo cross-check.

pub mod cluster;
pub mod error;
pub mod figures;
pub mod gates;
pub mod ft;
pub mod gaussian;
pub mod gkp;
pub mod mc;
pub mod squeezing;

pub use error::{Error, Result};
