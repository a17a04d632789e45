//! Full-duplex wideband mmWave beamforming simulator.

pub mod beamforming;
pub mod channel;
pub mod dump;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;

pub use error::{Error, ErrorCategory, Result};
