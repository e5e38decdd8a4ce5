//! Block-diagonalization precoding for a two-user MU-MIMO downlink assisted by
//! an intelligent reflecting surface.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the usual double-precision instantiation.

pub mod channel;
pub mod harness;
pub mod irs;
pub mod matgebra;
pub mod metrics;
pub mod scalar;
pub mod scene;
pub mod txrx;

use thiserror::Error;

pub use harness::{ScenarioConfig, SweepResult};
pub use scalar::{Cx, Real};
pub use txrx::MethodId;

pub type CMatrix = matgebra::CMatrix<f64>;
pub type CMatrix32 = matgebra::CMatrix<f32>;
pub type Complex64 = Cx<f64>;
pub type Complex32 = Cx<f32>;
pub type ChannelSet = channel::ChannelSet<f64>;
pub type PhaseProfile = irs::PhaseProfile<f64>;
pub type PrecoderSet = txrx::PrecoderSet<f64>;
pub type CombinerSet = txrx::CombinerSet<f64>;
pub type EffectiveChannels = txrx::EffectiveChannels<f64>;

/// Top-level failure, grouped the way the command line reports it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(#[from] harness::ConfigError),
    #[error("numerical error: {0}")]
    Sweep(#[from] harness::SweepError),
    #[error("output error: {0}")]
    Output(#[from] harness::OutputError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// 2 config, 3 numerical or rank failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(harness::ConfigError::Io { .. }) => 4,
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Sweep(harness::SweepError::Geometry(_)) => 2,
            Error::Sweep(_) => 3,
            Error::Output(_) => 4,
        }
    }
}
