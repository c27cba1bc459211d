//! Joint design of FC energy beamforming, sensor amplification and the
//! linear fusion rule for wirelessly powered sensor networks estimating a
//! common scalar source.

pub mod baselines;
pub mod error;
pub mod joint;
pub mod model;
pub mod schemes;
pub mod sim;
pub mod special;

pub use error::{CoreError, Result};
pub use model::{ChannelRealization, CMat, CVec, DesignPoint, NetworkConfig, NoiseMatrices};
