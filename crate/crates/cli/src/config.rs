//! Toolkit configuration: one TOML section per concern, every field
//! defaulted to the evaluation protocol's parameters (500 Hz polling,
//! 2000 Hz EMG, 10-400 Hz band, 0.2 s envelope window, 6 cycles/min).
//! Unknown keys are rejected so typos fail loudly instead of silently
//! falling back to a default.

use anyhow::{bail, Context, Result};
use exoeval_core::bus::POLL_RATE_HZ;
use exoeval_core::cycles::SpanGate;
use exoeval_core::dsp::BandpassSpec;
use exoeval_core::emgfile::EMG_RATE_HZ;
use exoeval_core::loadcell::{Condition, LoadCellConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolkitConfig {
    pub acquisition: AcquisitionConfig,
    pub device: DeviceConfig,
    pub filter: FilterConfig,
    pub mvc: MvcConfig,
    pub segmentation: SegmentationConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcquisitionConfig {
    pub poll_rate_hz: f64,
    pub emg_rate_hz: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            poll_rate_hz: POLL_RATE_HZ,
            emg_rate_hz: EMG_RATE_HZ,
        }
    }
}

/// Bus topology and conversion parameters of the two cuff cells. Both cells
/// share one 7-bit address and are separated by mux channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    pub mux_address: u8,
    pub cell_address: u8,
    pub left_channel: u8,
    pub right_channel: u8,
    pub zero_offset_counts: u16,
    pub full_scale_lbf: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            mux_address: 0x70,
            cell_address: 0x28,
            left_channel: 0,
            right_channel: 1,
            zero_offset_counts: 1000,
            full_scale_lbf: 100.0,
        }
    }
}

impl DeviceConfig {
    pub fn load_cell(&self, condition: Condition) -> Result<LoadCellConfig> {
        LoadCellConfig::new(self.full_scale_lbf, self.zero_offset_counts, condition)
            .context("device section")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub order: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    pub envelope_window_s: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            order: 4,
            low_hz: 10.0,
            high_hz: 400.0,
            envelope_window_s: 0.2,
        }
    }
}

impl FilterConfig {
    pub fn bandpass(&self) -> BandpassSpec {
        BandpassSpec::new(self.order, self.low_hz, self.high_hz)
    }
}

/// Per-muscle reference amplitude (millivolts at maximum voluntary
/// contraction) used to normalize envelopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MvcConfig {
    pub esl_l: f64,
    pub esl_r: f64,
    pub esi_l: f64,
    pub esi_r: f64,
}

impl Default for MvcConfig {
    fn default() -> Self {
        Self {
            esl_l: 0.4,
            esl_r: 0.4,
            esi_l: 0.4,
            esi_r: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationConfig {
    pub cadence_cpm: f64,
    /// Span-duration gate, as fractions of the nominal period.
    pub min_cycle_frac: f64,
    pub max_cycle_frac: f64,
    /// Consecutive valid cycles taken per condition.
    pub cycles_per_condition: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            cadence_cpm: 6.0,
            min_cycle_frac: 0.5,
            max_cycle_frac: 1.5,
            cycles_per_condition: 10,
        }
    }
}

impl SegmentationConfig {
    pub fn gate(&self) -> SpanGate {
        SpanGate {
            min_frac: self.min_cycle_frac,
            max_frac: self.max_cycle_frac,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl ToolkitConfig {
    /// Reads and validates a config file; a missing path means defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.device;
        if d.mux_address >= 0x80 || d.cell_address >= 0x80 {
            bail!(
                "device: addresses must be 7-bit (mux 0x{:02x}, cell 0x{:02x})",
                d.mux_address,
                d.cell_address
            );
        }
        if d.mux_address == d.cell_address {
            bail!("device: mux and cell share address 0x{:02x}", d.mux_address);
        }
        if d.left_channel > 7 || d.right_channel > 7 {
            bail!(
                "device: mux channels must be 0-7 (left {}, right {})",
                d.left_channel,
                d.right_channel
            );
        }
        if d.left_channel == d.right_channel {
            bail!("device: left and right cells share channel {}", d.left_channel);
        }
        d.load_cell(Condition::BareCell)?;

        // The artifact formats carry these rates implicitly (serial-log
        // cadence, EMG timebase), so only the native rates are accepted.
        let a = &self.acquisition;
        if a.poll_rate_hz != POLL_RATE_HZ {
            bail!("acquisition: poll_rate_hz {} unsupported, expected {POLL_RATE_HZ}", a.poll_rate_hz);
        }
        if a.emg_rate_hz != EMG_RATE_HZ {
            bail!("acquisition: emg_rate_hz {} unsupported, expected {EMG_RATE_HZ}", a.emg_rate_hz);
        }

        let f = &self.filter;
        if f.order == 0 {
            bail!("filter: order must be at least 1");
        }
        if !(f.low_hz > 0.0 && f.low_hz < f.high_hz && f.high_hz < a.emg_rate_hz / 2.0) {
            bail!(
                "filter: band {}-{} Hz invalid for {} Hz sampling",
                f.low_hz,
                f.high_hz,
                a.emg_rate_hz
            );
        }
        if f.envelope_window_s <= 0.0 || f.envelope_window_s.is_nan() {
            bail!("filter: envelope_window_s must be positive");
        }

        for (name, v) in [
            ("esl_l", self.mvc.esl_l),
            ("esl_r", self.mvc.esl_r),
            ("esi_l", self.mvc.esi_l),
            ("esi_r", self.mvc.esi_r),
        ] {
            if v <= 0.0 || v.is_nan() {
                bail!("mvc: {name} must be positive, got {v}");
            }
        }

        let s = &self.segmentation;
        if s.cadence_cpm <= 0.0 || s.cadence_cpm.is_nan() {
            bail!("segmentation: cadence_cpm must be positive");
        }
        if !(s.min_cycle_frac > 0.0 && s.min_cycle_frac < s.max_cycle_frac) {
            bail!(
                "segmentation: gate {}..{} is not an increasing positive range",
                s.min_cycle_frac,
                s.max_cycle_frac
            );
        }
        if s.cycles_per_condition == 0 {
            bail!("segmentation: cycles_per_condition must be at least 1");
        }
        Ok(())
    }
}
