//! Offline signal conditioning: Butterworth band-pass design, zero-phase
//! filtering through second-order sections, and the EMG envelope chain
//! (band-pass, detrend, rectify, moving average, MVC normalization).

pub mod design;
pub mod filter;
mod ops;

pub use design::{design_bandpass, sos_response, BandpassSpec};
pub use filter::{sosfilt, sosfilt_zi, sosfiltfilt, Biquad};
pub use ops::{
    average_bilateral, bandpass_filtfilt, build_interface_force, detrend, detrend_rectify,
    emg_envelope, moving_average, mvc_normalize,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("trace too short: need at least {need} samples, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("MVC reference must be positive, got {0}")]
    InvalidMvc(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        source: crate::loadcell::Error,
    },
}
