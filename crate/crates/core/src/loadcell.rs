//! Compact load-cell output model and static-weight verification.
//!
//! The sensor reports a digital count value; loading force in pounds-force is
//! `(counts - zero_offset) * full_scale / 14000`, converted to newtons for all
//! downstream processing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{SignalTrace, Unit};

/// Newtons per pound-force.
pub const LBF_TO_N: f64 = 4.44822;
/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;
/// Counts between zero load and full scale.
pub const COUNTS_SPAN: u32 = 14_000;
/// Counts accepted below zero / above full scale before a reading is
/// treated as a saturated or disconnected sensor rather than noise.
pub const RANGE_SLACK_COUNTS: u32 = 200;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("raw count {raw} outside [{lo}, {hi}] for this cell (saturated or disconnected)")]
    OutOfRange { raw: i64, lo: i64, hi: i64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid load-cell config: {0}")]
    InvalidConfig(String),
}

/// Mounting condition under which a calibration was run. Metadata only; the
/// conversion model is identical in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    BareCell,
    WithCushion,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Condition::BareCell => write!(f, "without_cushion"),
            Condition::WithCushion => write!(f, "with_cushion"),
        }
    }
}

/// Conversion parameters for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadCellConfig {
    /// Maximum rated load in pounds-force (R).
    pub full_scale_lbf: f64,
    /// Digital output under no load (Z).
    pub zero_offset_counts: u16,
    pub condition: Condition,
}

impl LoadCellConfig {
    /// 100 lbf cell with the given zero offset, bare mounting.
    pub fn new(full_scale_lbf: f64, zero_offset_counts: u16, condition: Condition) -> Result<Self, Error> {
        let cfg = Self {
            full_scale_lbf,
            zero_offset_counts,
            condition,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.full_scale_lbf <= 0.0 || self.full_scale_lbf.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "full_scale_lbf must be positive, got {}",
                self.full_scale_lbf
            )));
        }
        // Full-scale output must stay representable in the 14-bit data field
        // of the sensor word.
        let max_counts = self.zero_offset_counts as u32 + COUNTS_SPAN;
        if max_counts > (1 << 14) - 1 {
            return Err(Error::InvalidConfig(format!(
                "zero offset {} leaves full-scale count {} outside the 14-bit data field",
                self.zero_offset_counts, max_counts
            )));
        }
        Ok(())
    }

    /// Newtons represented by a single count step.
    pub fn newtons_per_count(&self) -> f64 {
        self.full_scale_lbf / COUNTS_SPAN as f64 * LBF_TO_N
    }

    /// Full-scale load in newtons.
    pub fn full_scale_n(&self) -> f64 {
        self.full_scale_lbf * LBF_TO_N
    }

    /// Largest count value the data field can carry for this cell.
    pub fn saturation_counts(&self) -> u16 {
        self.zero_offset_counts + COUNTS_SPAN as u16
    }
}

impl Default for LoadCellConfig {
    fn default() -> Self {
        Self {
            full_scale_lbf: 100.0,
            zero_offset_counts: 1000,
            condition: Condition::BareCell,
        }
    }
}

/// Converts a raw digital count into newtons.
///
/// Counts up to [`RANGE_SLACK_COUNTS`] below the zero offset are accepted and
/// reported as negative force (cuff lift-off); anything further out is an
/// [`Error::OutOfRange`].
pub fn counts_to_force(raw: i64, cfg: &LoadCellConfig) -> Result<f64, Error> {
    let z = cfg.zero_offset_counts as i64;
    let lo = z - RANGE_SLACK_COUNTS as i64;
    let hi = z + COUNTS_SPAN as i64 + RANGE_SLACK_COUNTS as i64;
    if raw < lo || raw > hi {
        return Err(Error::OutOfRange { raw, lo, hi });
    }
    let lbf = (raw - z) as f64 * cfg.full_scale_lbf / COUNTS_SPAN as f64;
    Ok(lbf * LBF_TO_N)
}

/// Inverse of [`counts_to_force`]: nearest count representing `force_n`,
/// clamped to the representable range.
pub fn force_to_counts(force_n: f64, cfg: &LoadCellConfig) -> u16 {
    let delta = force_n / LBF_TO_N / cfg.full_scale_lbf * COUNTS_SPAN as f64;
    let raw = cfg.zero_offset_counts as f64 + delta;
    raw.round().clamp(0.0, cfg.saturation_counts() as f64) as u16
}

/// Validity bits carried in the top two bits of the sensor word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleStatus {
    Valid,
    /// Stale or saturated reading; the data field is not a fresh measurement.
    Stale,
}

/// One 2-byte sensor reading: bits \[15:14\] status, bits \[13:0\] counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadCellWord {
    pub status: SampleStatus,
    pub counts: u16,
}

impl LoadCellWord {
    pub fn valid(counts: u16) -> Self {
        debug_assert!(counts < 1 << 14);
        Self {
            status: SampleStatus::Valid,
            counts,
        }
    }

    pub fn stale(counts: u16) -> Self {
        Self {
            status: SampleStatus::Stale,
            counts,
        }
    }

    /// Big-endian wire form, status in the top bits of the first byte.
    pub fn to_bytes(self) -> [u8; 2] {
        let status = match self.status {
            SampleStatus::Valid => 0u16,
            SampleStatus::Stale => 1u16,
        };
        let word = (status << 14) | (self.counts & 0x3FFF);
        word.to_be_bytes()
    }

    pub fn from_bytes(bytes: [u8; 2]) -> Self {
        let word = u16::from_be_bytes(bytes);
        let status = match word >> 14 {
            0 => SampleStatus::Valid,
            _ => SampleStatus::Stale,
        };
        Self {
            status,
            counts: word & 0x3FFF,
        }
    }
}

/// Result of a zero-offset estimation over an unloaded window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroEstimate {
    pub zero_offset_counts: u16,
    pub std_counts: f64,
    /// Set when the window scatter exceeds 50 counts; the estimate is
    /// returned anyway but should not be trusted.
    pub unstable: bool,
}

/// Window scatter above this many counts flags the estimate unstable.
pub const ZERO_STD_LIMIT_COUNTS: f64 = 50.0;

/// Estimates the zero offset as the rounded mean of an unloaded counts trace.
///
/// Requires at least one second of data at the trace's declared rate.
pub fn estimate_zero_offset(unloaded: &SignalTrace) -> Result<ZeroEstimate, Error> {
    debug_assert_eq!(unloaded.unit, Unit::Counts);
    let needed = unloaded.rate_hz.ceil() as usize;
    if unloaded.len() < needed.max(1) {
        return Err(Error::InsufficientData(format!(
            "zero-offset window holds {} samples, need >= {} (1 s at {} Hz)",
            unloaded.len(),
            needed,
            unloaded.rate_hz
        )));
    }
    let mean = unloaded.mean();
    let std = unloaded.std();
    Ok(ZeroEstimate {
        zero_offset_counts: mean.round().clamp(0.0, u16::MAX as f64) as u16,
        std_counts: std,
        unstable: std > ZERO_STD_LIMIT_COUNTS,
    })
}

/// Per-load outcome of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadResult {
    pub load_mass_kg: f64,
    pub mean_force_n: f64,
    pub std_force_n: f64,
    pub error_percent: f64,
}

/// Outcome of a full static-weight verification protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub config: LoadCellConfig,
    pub per_load: Vec<LoadResult>,
    pub trials: usize,
    pub trial_duration_s: f64,
}

/// Signed percent deviation of a measured mean from the gravity-expected
/// force for a known mass.
pub fn error_percent(load_mass_kg: f64, mean_force_n: f64) -> f64 {
    let expected = load_mass_kg * STANDARD_GRAVITY;
    100.0 * (mean_force_n - expected) / expected
}

/// Supplies raw sensor words for one (load, trial) combination.
pub trait WeightTrialSource {
    fn words(&mut self, load_kg: f64, trial: usize, n_samples: usize) -> Vec<LoadCellWord>;
}

impl<F> WeightTrialSource for F
where
    F: FnMut(f64, usize, usize) -> Vec<LoadCellWord>,
{
    fn words(&mut self, load_kg: f64, trial: usize, n_samples: usize) -> Vec<LoadCellWord> {
        self(load_kg, trial, n_samples)
    }
}

/// Runs the static-weight verification protocol: each known weight is sampled
/// for `trial_s` seconds at `rate_hz`, `trials` times, and the converted
/// forces are pooled per load.
///
/// Only `Valid` samples enter the statistics; a (load, trial) that yields
/// fewer valid samples than the protocol requires fails the run.
pub fn run_verification(
    cfg: &LoadCellConfig,
    weights_kg: &[f64],
    trials: usize,
    trial_s: f64,
    rate_hz: f64,
    source: &mut dyn WeightTrialSource,
) -> Result<CalibrationRecord, Error> {
    if weights_kg.is_empty() {
        return Err(Error::InsufficientData("no weights given".into()));
    }
    cfg.validate()?;
    let per_trial = (trial_s * rate_hz).round() as usize;
    let mut per_load = Vec::with_capacity(weights_kg.len());
    for &mass in weights_kg {
        let mut forces = Vec::with_capacity(per_trial * trials);
        for trial in 0..trials {
            let words = source.words(mass, trial, per_trial);
            let valid: Vec<f64> = words
                .iter()
                .filter(|w| w.status == SampleStatus::Valid)
                .map(|w| counts_to_force(w.counts as i64, cfg))
                .collect::<Result<_, _>>()?;
            if valid.len() < per_trial {
                return Err(Error::InsufficientData(format!(
                    "load {mass} kg trial {trial}: got {} valid samples, need {per_trial}",
                    valid.len()
                )));
            }
            forces.extend(valid);
        }
        let n = forces.len() as f64;
        let mean = forces.iter().sum::<f64>() / n;
        let ss: f64 = forces.iter().map(|f| (f - mean) * (f - mean)).sum();
        let std = (ss / (n - 1.0)).sqrt();
        per_load.push(LoadResult {
            load_mass_kg: mass,
            mean_force_n: mean,
            std_force_n: std,
            error_percent: error_percent(mass, mean),
        });
    }
    Ok(CalibrationRecord {
        config: *cfg,
        per_load,
        trials,
        trial_duration_s: trial_s,
    })
}

impl CalibrationRecord {
    /// CSV form: `load_kg,mean_N,std_N,error_pct,condition,trials,trial_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("load_kg,mean_N,std_N,error_pct,condition,trials,trial_s\n");
        for row in &self.per_load {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.4},{},{},{}\n",
                row.load_mass_kg,
                row.mean_force_n,
                row.std_force_n,
                row.error_percent,
                self.config.condition,
                self.trials,
                self.trial_duration_s
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> LoadCellConfig {
        LoadCellConfig::default()
    }

    #[test]
    fn full_scale_count_maps_to_full_scale_newtons() {
        let c = cfg();
        let f = counts_to_force(c.zero_offset_counts as i64 + 14_000, &c).unwrap();
        assert!((f - 444.822).abs() < 1e-9);
    }

    #[test]
    fn zero_offset_maps_to_zero_newtons() {
        for r in [50.0, 100.0, 250.0] {
            let c = LoadCellConfig::new(r, 1200, Condition::BareCell).unwrap();
            assert_eq!(counts_to_force(1200, &c).unwrap(), 0.0);
        }
    }

    #[test]
    fn half_scale_is_half_force() {
        let c = cfg();
        let f = counts_to_force(c.zero_offset_counts as i64 + 7_000, &c).unwrap();
        assert!((f - 222.411).abs() < 1e-9);
    }

    #[test]
    fn slack_below_zero_reads_negative_then_errors() {
        let c = cfg();
        let f = counts_to_force(c.zero_offset_counts as i64 - 200, &c).unwrap();
        assert!(f < 0.0);
        assert!(matches!(
            counts_to_force(c.zero_offset_counts as i64 - 201, &c),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            counts_to_force(c.zero_offset_counts as i64 + 14_201, &c),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn config_rejects_offset_that_overflows_data_field() {
        assert!(LoadCellConfig::new(100.0, 2384, Condition::BareCell).is_err());
        assert!(LoadCellConfig::new(100.0, 2383, Condition::BareCell).is_ok());
    }

    #[test]
    fn word_round_trips_through_wire_bytes() {
        for w in [
            LoadCellWord::valid(0),
            LoadCellWord::valid(1000),
            LoadCellWord::valid(16_383),
            LoadCellWord::stale(15_000),
        ] {
            assert_eq!(LoadCellWord::from_bytes(w.to_bytes()), w);
        }
    }

    #[test]
    fn zero_estimate_of_constant_trace() {
        let tr = SignalTrace::new(vec![1000.0; 600], 500.0, Unit::Counts, "unloaded");
        let z = estimate_zero_offset(&tr).unwrap();
        assert_eq!(z.zero_offset_counts, 1000);
        assert_eq!(z.std_counts, 0.0);
        assert!(!z.unstable);
    }

    #[test]
    fn zero_estimate_of_symmetric_noise() {
        let samples: Vec<f64> = (0..600).map(|i| 999.0 + (i % 3) as f64).collect();
        let tr = SignalTrace::new(samples, 500.0, Unit::Counts, "unloaded");
        let z = estimate_zero_offset(&tr).unwrap();
        assert_eq!(z.zero_offset_counts, 1000);
    }

    #[test]
    fn zero_estimate_needs_one_second() {
        let tr = SignalTrace::new(vec![1000.0; 499], 500.0, Unit::Counts, "unloaded");
        assert!(matches!(
            estimate_zero_offset(&tr),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn zero_estimate_flags_unstable_window() {
        let samples: Vec<f64> = (0..600)
            .map(|i| 1000.0 + if i % 2 == 0 { 80.0 } else { -80.0 })
            .collect();
        let tr = SignalTrace::new(samples, 500.0, Unit::Counts, "unloaded");
        assert!(estimate_zero_offset(&tr).unwrap().unstable);
    }

    #[test]
    fn error_percent_recomputes_reference_rows() {
        // Displayed means vs displayed errors, both mounting conditions.
        let rows: [(f64, f64, f64); 12] = [
            (1.0, 9.25, -5.75),
            (2.0, 19.48, -0.70),
            (3.0, 29.53, 0.33),
            (4.0, 38.82, -1.06),
            (5.0, 48.57, -0.98),
            (6.0, 57.79, -1.82),
            (1.0, 9.59, -2.24),
            (2.0, 19.65, 0.15),
            (3.0, 29.64, 0.73),
            (4.0, 39.04, -0.51),
            (5.0, 48.81, -0.48),
            (6.0, 58.32, -0.93),
        ];
        for (mass, mean, displayed) in rows {
            let e = error_percent(mass, mean);
            assert!(
                (e - displayed).abs() <= 0.1,
                "{mass} kg: recomputed {e:.4} vs displayed {displayed}"
            );
        }
    }

    #[test]
    fn verification_with_ideal_source_is_quantization_limited() {
        let c = cfg();
        let mut source = |mass: f64, _trial: usize, n: usize| {
            let counts = force_to_counts(mass * STANDARD_GRAVITY, &c);
            vec![LoadCellWord::valid(counts); n]
        };
        let rec = run_verification(
            &c,
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            5,
            10.0,
            500.0,
            &mut source,
        )
        .unwrap();
        assert_eq!(rec.per_load.len(), 6);
        for row in &rec.per_load {
            assert!(
                row.error_percent.abs() < 0.25,
                "{} kg error {:.4}%",
                row.load_mass_kg,
                row.error_percent
            );
            // Identical samples; only accumulation rounding remains.
            assert!(row.std_force_n.abs() < 1e-9, "{}", row.std_force_n);
        }
    }

    #[test]
    fn verification_reports_underrun_location() {
        let c = cfg();
        let mut source = |mass: f64, trial: usize, n: usize| {
            let counts = force_to_counts(mass * STANDARD_GRAVITY, &c);
            let n = if (mass, trial) == (2.0, 1) { n - 1 } else { n };
            vec![LoadCellWord::valid(counts); n]
        };
        let err = run_verification(&c, &[1.0, 2.0], 3, 1.0, 500.0, &mut source).unwrap_err();
        match err {
            Error::InsufficientData(msg) => {
                assert!(msg.contains("2 kg"), "{msg}");
                assert!(msg.contains("trial 1"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn calibration_csv_shape() {
        let rec = CalibrationRecord {
            config: cfg(),
            per_load: vec![LoadResult {
                load_mass_kg: 3.0,
                mean_force_n: 29.64,
                std_force_n: 0.003,
                error_percent: 0.73,
            }],
            trials: 5,
            trial_duration_s: 10.0,
        };
        let csv = rec.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "load_kg,mean_N,std_N,error_pct,condition,trials,trial_s"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("3,29.64"), "{row}");
        assert!(row.contains("without_cushion"), "{row}");
    }
}
