//! Near-field multichannel target-speech separation toolkit.
//!
//! Provides array geometry and near-field path modelling, STFT analysis,
//! 3D spatial/region features, mask-based MVDR/MCWF beamforming, an
//! image-source shoebox simulator for in-car scenes, and SI-SDR evaluation.

pub mod beamform;
pub mod error;
pub mod features;
pub mod geometry;
pub mod metrics;
pub mod room;
pub mod scene;
pub mod signals;
pub mod spectral;
pub mod wavio;

pub use error::{Error, Result};
