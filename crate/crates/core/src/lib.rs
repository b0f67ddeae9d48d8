//! Evaluation toolkit for cuff-mounted interface-force sensing on back-support
//! exoskeletons.
//!
//! The crate covers the full desk-scale chain:
//!
//! - [`loadcell`]: compact load-cell output model, counts/newton conversion,
//!   and the static-weight verification harness.
//! - [`bus`]: deterministic simulation of the acquisition electronics, with
//!   two load cells behind an 8-channel I2C multiplexer, a 500 Hz poller,
//!   CAN frame codecs, and the serial log exporter.
//! - [`dsp`]: uniform-rate signal conditioning. Zero-phase Butterworth
//!   bandpass, detrend/rectify, moving-average envelope, MVC normalization,
//!   and interface-force trace construction.
//! - [`cycles`]: lifting-cycle segmentation from trunk-angle peaks, box
//!   impact events, and normalized-cycle ensembles.
//! - [`stats`]: Pearson correlation with significance and the strength-band
//!   report shapes.
//! - [`emgfile`]: the on-disk CSV layout shared by the high-rate EMG and
//!   box-accelerometer block.
//! - [`synth`]: seeded synthetic session generator with analytic ground
//!   truth, used to close the loop on the whole chain.

pub mod bus;
pub mod cycles;
pub mod dsp;
pub mod emgfile;
pub mod loadcell;
pub mod stats;
pub mod synth;
pub mod trace;

pub use trace::{SignalTrace, Unit};
