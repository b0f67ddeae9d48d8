//! Synthetic lifting sessions with controllable ground truth.
//!
//! The construction works backwards from what the analysis chain measures.
//! Cycle phase runs 0..1 between consecutive trunk-flexion peaks. On that
//! phase, three zero-mean unit-variance shapes are mutually orthogonal:
//! `E = sqrt(2) cos(2 pi phi)`, `W = sqrt(2) sin(4 pi phi)` and
//! `V = sqrt(2) cos(4 pi phi)`. Mixing `S = rho E + sqrt(1-rho^2) W` gives a
//! unit-variance shape whose correlation with `E` is exactly `rho`, so the
//! interface force built on `S` correlates with the EMG activation envelope
//! built on `E` at the requested level, and likewise for assistance via `V`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

use crate::bus::{self, i2c::Device, DeviceRoute, I2cBus, ImuSample, ImuSource};
use crate::cycles::{TaskCondition, GRID_POINTS};
use crate::dsp::{self, BandpassSpec};
use crate::emgfile::{self, EmgBlock, EMG_RATE_HZ};
use crate::loadcell::{LoadCellConfig, LoadCellWord, STANDARD_GRAVITY};
use crate::trace::{SignalTrace, Unit};

/// Interface-force profile: base and swing, newtons. Swing amplitude stays
/// at most 2 sqrt(2) standard shapes, keeping the signal inside 0..200 N and
/// well under the 444.8 N full scale.
pub const IF_BASE_N: f64 = 100.0;
pub const IF_SCALE_N: f64 = 45.0;
/// Assistance profile base and swing (commanded-assistance units).
pub const RA_BASE: f64 = 15.0;
pub const RA_SCALE: f64 = 6.0;
/// Activation envelope: fraction of MVC, 0.2..0.8 over the cycle.
pub const ACTIVATION_BASE: f64 = 0.5;
pub const ACTIVATION_DEPTH: f64 = 0.3;
/// Trunk flexion sinusoid amplitude; the angle spans 0..70 degrees.
pub const TRUNK_AMP_DEG: f64 = 35.0;
/// Peak EMG carrier scale, millivolts.
pub const EMG_SCALE_MV: f64 = 0.5;
/// Box impact spike: amplitude in g and duration.
pub const IMPACT_AMP_G: f64 = 5.0;
pub const IMPACT_LEN_S: f64 = 0.03;
/// Impacts land this fraction of a period before the flexion peak.
pub const IMPACT_LEAD: f64 = 0.05;

const MUX_ADDRESS: u8 = 0x70;
const CELL_ADDRESS: u8 = 0x28;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid session spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Dsp(#[from] dsp::Error),
    #[error(transparent)]
    EmgFile(#[from] emgfile::Error),
    #[error(transparent)]
    Bus(#[from] bus::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    /// Load-cell count noise, standard deviation in counts.
    pub counts_sigma: f64,
    /// EMG signal-to-noise ratio of the additive wideband noise, dB.
    pub emg_snr_db: f64,
    /// Trunk-angle white noise as percent of the flexion sinusoid amplitude.
    pub trunk_noise_pct: f64,
    /// Box handling noise per axis, standard deviation in g.
    pub handling_g: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            counts_sigma: 3.0,
            emg_snr_db: 25.0,
            trunk_noise_pct: 5.0,
            handling_g: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionSpec {
    pub subject: String,
    pub cadence_cpm: f64,
    pub duration_s: f64,
    /// Task load, 0 or 10 kg; a condition tag, not a signal parameter.
    pub load_kg: f64,
    pub target_rho_if_emg: f64,
    pub target_rho_if_ra: f64,
    pub noise: NoiseSpec,
    pub seed: u64,
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self {
            subject: "s1".into(),
            cadence_cpm: 6.0,
            duration_s: 300.0,
            load_kg: 10.0,
            target_rho_if_emg: 0.8,
            target_rho_if_ra: 0.8,
            noise: NoiseSpec::default(),
            seed: 0,
        }
    }
}

impl SessionSpec {
    pub fn period_s(&self) -> f64 {
        60.0 / self.cadence_cpm
    }

    pub fn cycle_count(&self) -> usize {
        (self.duration_s / self.period_s()).floor() as usize
    }

    pub fn validate(&self) -> Result<(), Error> {
        let err = |msg: String| Err(Error::InvalidSpec(msg));
        if self.cadence_cpm <= 0.0 || self.cadence_cpm.is_nan() {
            return err(format!("cadence_cpm must be positive, got {}", self.cadence_cpm));
        }
        if self.duration_s < 2.0 * self.period_s() {
            return err(format!(
                "duration_s {} covers under two cycles at {} cpm",
                self.duration_s, self.cadence_cpm
            ));
        }
        if self.load_kg != 0.0 && self.load_kg != 10.0 {
            return err(format!("load_kg must be 0 or 10, got {}", self.load_kg));
        }
        for (name, rho) in [
            ("target_rho_if_emg", self.target_rho_if_emg),
            ("target_rho_if_ra", self.target_rho_if_ra),
        ] {
            if !(-1.0..=1.0).contains(&rho) {
                return err(format!("{name} must lie in [-1, 1], got {rho}"));
            }
        }
        if self.noise.counts_sigma < 0.0
            || self.noise.trunk_noise_pct < 0.0
            || self.noise.handling_g < 0.0
        {
            return err("noise magnitudes must be nonnegative".into());
        }
        Ok(())
    }

    pub fn condition(&self) -> TaskCondition {
        TaskCondition::new(&self.subject, self.load_kg)
    }
}

/// Everything the analysis chain should recover, reproducible from the spec
/// alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: SessionSpec,
    pub condition: TaskCondition,
    pub period_s: f64,
    pub peak_times_s: Vec<f64>,
    pub impact_times_s: Vec<f64>,
    /// True per-cycle profiles on the normalized grid.
    pub grid_if_n: Vec<f64>,
    pub grid_ra: Vec<f64>,
    pub grid_activation: Vec<f64>,
    pub rho_if_emg: f64,
    pub rho_if_ra: f64,
}

// Shape primitives over cycle phase.

/// Cycle phase: 0 at each trunk-flexion peak, wrapping every period.
pub fn phase_at(t_s: f64, period_s: f64) -> f64 {
    ((t_s - 0.5 * period_s) / period_s).rem_euclid(1.0)
}

fn e_hat(phi: f64) -> f64 {
    SQRT_2 * (2.0 * PI * phi).cos()
}

fn w_hat(phi: f64) -> f64 {
    SQRT_2 * (4.0 * PI * phi).sin()
}

fn v_hat(phi: f64) -> f64 {
    SQRT_2 * (4.0 * PI * phi).cos()
}

fn s_if(phi: f64, rho: f64) -> f64 {
    rho * e_hat(phi) + (1.0 - rho * rho).sqrt() * w_hat(phi)
}

/// True interface force at time `t_s`, newtons.
pub fn interface_force_at(spec: &SessionSpec, t_s: f64) -> f64 {
    IF_BASE_N + IF_SCALE_N * s_if(phase_at(t_s, spec.period_s()), spec.target_rho_if_emg)
}

/// True commanded assistance at time `t_s`.
pub fn assistance_at(spec: &SessionSpec, t_s: f64) -> f64 {
    let phi = phase_at(t_s, spec.period_s());
    let rho = spec.target_rho_if_ra;
    RA_BASE
        + RA_SCALE
            * (rho * s_if(phi, spec.target_rho_if_emg) + (1.0 - rho * rho).sqrt() * v_hat(phi))
}

/// True activation envelope (fraction of MVC) at phase `phi`.
pub fn activation_at(phi: f64) -> f64 {
    ACTIVATION_BASE + ACTIVATION_DEPTH * (2.0 * PI * phi).cos()
}

/// Noiseless trunk flexion angle at time `t_s`, degrees.
pub fn trunk_angle_at(spec: &SessionSpec, t_s: f64) -> f64 {
    TRUNK_AMP_DEG * (1.0 - (2.0 * PI * t_s / spec.period_s()).cos())
}

/// Trunk angular velocity at time `t_s`, degrees per second.
pub fn trunk_velocity_at(spec: &SessionSpec, t_s: f64) -> f64 {
    let w = 2.0 * PI / spec.period_s();
    TRUNK_AMP_DEG * w * (w * t_s).sin()
}

/// Independent deterministic noise stream `stream` under the session seed.
fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const STREAM_LEFT_CELL: u64 = 1;
const STREAM_RIGHT_CELL: u64 = 2;
const STREAM_TRUNK: u64 = 3;
const STREAM_EMG_CARRIER: u64 = 10; // +0..3 per channel
const STREAM_EMG_NOISE: u64 = 20; // +0..3 per channel
const STREAM_BOX: u64 = 30; // +0..2 per axis

fn normal_draws(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn ground_truth(spec: &SessionSpec) -> Result<GroundTruth, Error> {
    spec.validate()?;
    let period = spec.period_s();
    let cycles = spec.cycle_count();
    let peak_times_s: Vec<f64> = (0..cycles).map(|k| (k as f64 + 0.5) * period).collect();
    let impact_times_s: Vec<f64> = peak_times_s
        .iter()
        .map(|t| t - IMPACT_LEAD * period)
        .collect();
    let grid_phi = |j: usize| j as f64 / (GRID_POINTS - 1) as f64;
    Ok(GroundTruth {
        spec: spec.clone(),
        condition: spec.condition(),
        period_s: period,
        peak_times_s,
        impact_times_s,
        grid_if_n: (0..GRID_POINTS)
            .map(|j| IF_BASE_N + IF_SCALE_N * s_if(grid_phi(j), spec.target_rho_if_emg))
            .collect(),
        grid_ra: (0..GRID_POINTS)
            .map(|j| {
                let rho = spec.target_rho_if_ra;
                RA_BASE
                    + RA_SCALE
                        * (rho * s_if(grid_phi(j), spec.target_rho_if_emg)
                            + (1.0 - rho * rho).sqrt() * v_hat(grid_phi(j)))
            })
            .collect(),
        grid_activation: (0..GRID_POINTS).map(|j| activation_at(grid_phi(j))).collect(),
        rho_if_emg: spec.target_rho_if_emg,
        rho_if_ra: spec.target_rho_if_ra,
    })
}

/// True assistance sampled at `rate_hz` for the whole session.
pub fn assistance_trace(spec: &SessionSpec, rate_hz: f64) -> SignalTrace {
    let n = (spec.duration_s * rate_hz).round() as usize;
    SignalTrace::new(
        (0..n).map(|i| assistance_at(spec, i as f64 / rate_hz)).collect(),
        rate_hz,
        Unit::Newton,
        "assistance",
    )
}

/// Acquisition bus carrying both cells (left on mux channel 0, right on 1,
/// same 7-bit address) with count noise, plus the trunk IMU source.
pub struct SessionBus {
    pub bus: I2cBus,
    pub left: DeviceRoute,
    pub right: DeviceRoute,
    pub imu: Box<dyn ImuSource>,
}

pub fn build_session_bus(spec: &SessionSpec, cfg: LoadCellConfig) -> Result<SessionBus, Error> {
    spec.validate()?;
    let ticks = (spec.duration_s * bus::poller::POLL_RATE_HZ).round() as usize + 2;
    let tick_us = (1e6 / bus::poller::POLL_RATE_HZ) as u64;
    let npc = cfg.newtons_per_count();

    let make_cell = |stream: u64| -> Box<dyn crate::bus::ForceSource> {
        let noise = normal_draws(&mut stream_rng(spec.seed, stream), ticks);
        let sigma = spec.noise.counts_sigma;
        let spec = spec.clone();
        Box::new(move |t_us: u64| {
            let idx = (t_us / tick_us) as usize;
            let n = noise.get(idx).copied().unwrap_or(0.0);
            interface_force_at(&spec, t_us as f64 / 1e6) + n * sigma * npc
        })
    };
    let left_source = make_cell(STREAM_LEFT_CELL);
    let right_source = make_cell(STREAM_RIGHT_CELL);

    let trunk_noise = normal_draws(&mut stream_rng(spec.seed, STREAM_TRUNK), ticks);
    let trunk_sigma = spec.noise.trunk_noise_pct / 100.0 * TRUNK_AMP_DEG;
    let spec_imu = spec.clone();
    let imu = Box::new(move |t_us: u64| {
        let t = t_us as f64 / 1e6;
        let idx = (t_us / tick_us) as usize;
        let n = trunk_noise.get(idx).copied().unwrap_or(0.0);
        ImuSample {
            angle_deg: trunk_angle_at(&spec_imu, t) + n * trunk_sigma,
            velocity_dps: trunk_velocity_at(&spec_imu, t),
        }
    });

    let mut bus = I2cBus::new(MUX_ADDRESS);
    let left = DeviceRoute {
        channel: 0,
        address: CELL_ADDRESS,
    };
    let right = DeviceRoute {
        channel: 1,
        address: CELL_ADDRESS,
    };
    bus.attach(
        left,
        Device::LoadCell {
            cfg,
            source: left_source,
        },
    )?;
    bus.attach(
        right,
        Device::LoadCell {
            cfg,
            source: right_source,
        },
    )?;
    Ok(SessionBus {
        bus,
        left,
        right,
        imu,
    })
}

/// The trunk-angle trace exactly as the acquisition path reports it: same
/// noise stream the bus IMU draws from, quantized to centidegrees as on the
/// wire. Cheap substitute for running the poller when only the trunk signal
/// is needed; a unit test pins the sample-for-sample equivalence.
pub fn trunk_trace(spec: &SessionSpec) -> Result<SignalTrace, Error> {
    spec.validate()?;
    let rate = bus::poller::POLL_RATE_HZ;
    let n = (spec.duration_s * rate).round() as usize;
    let noise = normal_draws(&mut stream_rng(spec.seed, STREAM_TRUNK), n);
    let sigma = spec.noise.trunk_noise_pct / 100.0 * TRUNK_AMP_DEG;
    let samples = (0..n)
        .map(|i| {
            let angle = trunk_angle_at(spec, i as f64 / rate) + noise[i] * sigma;
            bus::poller::quantize(angle, 100.0) as f64 / 100.0
        })
        .collect();
    Ok(SignalTrace::new(samples, rate, Unit::Degree, "trunk angle"))
}

/// Box accelerometer axes at the EMG rate: handling noise everywhere, plus a
/// half-sine spike of [`IMPACT_AMP_G`] on the vertical axis at each impact.
pub fn box_accel_traces(spec: &SessionSpec) -> Result<[SignalTrace; 3], Error> {
    spec.validate()?;
    let n = (spec.duration_s * EMG_RATE_HZ).round() as usize;
    let g = STANDARD_GRAVITY;
    let sigma = spec.noise.handling_g * g;

    let mut axes: Vec<Vec<f64>> = (0..3)
        .map(|axis| {
            let noise = normal_draws(&mut stream_rng(spec.seed, STREAM_BOX + axis), n);
            let base = if axis == 2 { g } else { 0.0 };
            noise.into_iter().map(|v| base + sigma * v).collect()
        })
        .collect();

    let truth = ground_truth(spec)?;
    for &t0 in &truth.impact_times_s {
        let start = (t0 * EMG_RATE_HZ).round() as usize;
        let len = (IMPACT_LEN_S * EMG_RATE_HZ).round() as usize;
        for k in 0..len {
            if start + k < n {
                axes[2][start + k] += IMPACT_AMP_G * g * (PI * k as f64 / len as f64).sin();
            }
        }
    }

    let [ax, ay, az] = <[Vec<f64>; 3]>::try_from(axes).unwrap();
    let mk = |v: Vec<f64>, label: &str| SignalTrace::new(v, EMG_RATE_HZ, Unit::MetersPerSecond2, label);
    Ok([mk(ax, "box_ax"), mk(ay, "box_ay"), mk(az, "box_az")])
}

/// Raw EMG for one channel: a unit-RMS band-limited carrier, amplitude
/// modulated by the activation envelope, plus wideband noise at the spec
/// SNR.
fn emg_channel(spec: &SessionSpec, channel: u64) -> Result<Vec<f64>, Error> {
    let n = (spec.duration_s * EMG_RATE_HZ).round() as usize;
    let period = spec.period_s();

    let white = normal_draws(&mut stream_rng(spec.seed, STREAM_EMG_CARRIER + channel), n);
    let band = BandpassSpec::new(4, 20.0, 350.0);
    let sos = dsp::design_bandpass(&band, EMG_RATE_HZ)?;
    let mut carrier = dsp::sosfiltfilt(&sos, &white)?;
    let rms = (carrier.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    for v in &mut carrier {
        *v /= rms;
    }

    let mut signal: Vec<f64> = carrier
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let phi = phase_at(i as f64 / EMG_RATE_HZ, period);
            EMG_SCALE_MV * activation_at(phi) * c
        })
        .collect();

    let signal_rms = (signal.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let noise_rms = signal_rms / 10f64.powf(spec.noise.emg_snr_db / 20.0);
    let noise = normal_draws(&mut stream_rng(spec.seed, STREAM_EMG_NOISE + channel), n);
    for (s, w) in signal.iter_mut().zip(noise) {
        *s += noise_rms * w;
    }
    Ok(signal)
}

/// The high-rate block: four EMG channels sharing the activation envelope
/// (independent carriers and noise) plus the box accelerometer.
pub fn emg_block(spec: &SessionSpec) -> Result<EmgBlock, Error> {
    spec.validate()?;
    let mk = |v: Vec<f64>, label: &str| SignalTrace::new(v, EMG_RATE_HZ, Unit::Millivolt, label);
    let [box_ax, box_ay, box_az] = box_accel_traces(spec)?;
    Ok(EmgBlock {
        esl_l: mk(emg_channel(spec, 0)?, "esl_l"),
        esl_r: mk(emg_channel(spec, 1)?, "esl_r"),
        esi_l: mk(emg_channel(spec, 2)?, "esi_l"),
        esi_r: mk(emg_channel(spec, 3)?, "esi_r"),
        box_ax,
        box_ay,
        box_az,
    })
}

/// A full session rendered to its artifact formats.
pub struct SessionArtifacts {
    pub serial_log: String,
    pub emg_csv: String,
    pub truth: GroundTruth,
}

/// Generates the session and runs the acquisition chain end to end.
pub fn run_session(spec: &SessionSpec, cfg: LoadCellConfig) -> Result<SessionArtifacts, Error> {
    let truth = ground_truth(spec)?;
    let mut sb = build_session_bus(spec, cfg)?;
    let out = bus::run_poller(
        spec.duration_s,
        &mut sb.bus,
        sb.left,
        sb.right,
        sb.imu.as_mut(),
    )?;
    let serial_log = bus::export_serial_log(&out.records)?;
    let emg_csv = emgfile::write(&emg_block(spec)?)?;
    Ok(SessionArtifacts {
        serial_log,
        emg_csv,
        truth,
    })
}

/// Static-weight calibration source: per (load, trial) deterministic count
/// stream `Z + delta(mass) + N(0, sigma)`, saturating with the stale status
/// beyond the representable span.
pub struct StaticWeightSource {
    pub cfg: LoadCellConfig,
    pub sigma_counts: f64,
    pub seed: u64,
}

impl StaticWeightSource {
    pub fn new(cfg: LoadCellConfig, sigma_counts: f64, seed: u64) -> Self {
        Self {
            cfg,
            sigma_counts,
            seed,
        }
    }
}

impl crate::loadcell::WeightTrialSource for StaticWeightSource {
    fn words(&mut self, load_kg: f64, trial: usize, n_samples: usize) -> Vec<LoadCellWord> {
        let stream = load_kg
            .to_bits()
            .rotate_left(17)
            .wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = stream_rng(self.seed, stream);
        let delta = load_kg * STANDARD_GRAVITY / self.cfg.newtons_per_count();
        let z = self.cfg.zero_offset_counts as f64;
        let sat = self.cfg.saturation_counts();
        (0..n_samples)
            .map(|_| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let raw = (z + delta + self.sigma_counts * noise).round();
                if raw > sat as f64 {
                    LoadCellWord::stale(sat)
                } else if raw < 0.0 {
                    LoadCellWord::stale(0)
                } else {
                    LoadCellWord::valid(raw as u16)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loadcell::{run_verification, SampleStatus, WeightTrialSource};
    use crate::stats::pearson_r;

    fn quick_spec() -> SessionSpec {
        SessionSpec {
            duration_s: 40.0,
            ..SessionSpec::default()
        }
    }

    #[test]
    fn spec_validation_catches_bad_fields() {
        let ok = quick_spec();
        assert!(ok.validate().is_ok());
        for (mutate, _name) in [
            (
                Box::new(|s: &mut SessionSpec| s.target_rho_if_emg = 1.5)
                    as Box<dyn Fn(&mut SessionSpec)>,
                "rho",
            ),
            (Box::new(|s: &mut SessionSpec| s.duration_s = 15.0), "duration"),
            (Box::new(|s: &mut SessionSpec| s.load_kg = 7.0), "load"),
            (Box::new(|s: &mut SessionSpec| s.cadence_cpm = 0.0), "cadence"),
            (Box::new(|s: &mut SessionSpec| s.noise.counts_sigma = -1.0), "sigma"),
        ] {
            let mut bad = quick_spec();
            mutate(&mut bad);
            assert!(matches!(bad.validate(), Err(Error::InvalidSpec(_))));
        }
    }

    #[test]
    fn truth_lists_thirty_peaks_and_impacts_for_the_standard_task() {
        let truth = ground_truth(&SessionSpec::default()).unwrap();
        assert_eq!(truth.peak_times_s.len(), 30);
        assert_eq!(truth.impact_times_s.len(), 30);
        assert_eq!(truth.peak_times_s[0], 5.0);
        assert_eq!(truth.peak_times_s[29], 295.0);
        assert!((truth.impact_times_s[0] - 4.5).abs() < 1e-12);
        assert_eq!(truth.grid_if_n.len(), GRID_POINTS);
        // Interface force stays in the plausible band.
        for v in &truth.grid_if_n {
            assert!(*v > 0.0 && *v < 200.0, "{v}");
        }
    }

    #[test]
    fn standardized_shapes_mix_to_exact_target_correlation() {
        let n = 10_000;
        for rho in [0.0, 0.3, 0.6, 0.8, 1.0, -0.5] {
            let phis: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
            let s: Vec<f64> = phis.iter().map(|&p| s_if(p, rho)).collect();
            let e: Vec<f64> = phis.iter().map(|&p| e_hat(p)).collect();
            if rho.abs() == 1.0 {
                let r = pearson_r(&s, &e).unwrap();
                assert!((r - rho).abs() < 1e-9, "rho {rho}: r {r}");
            } else if rho == 0.0 {
                assert!(pearson_r(&s, &e).unwrap().abs() < 1e-9);
            } else {
                let r = pearson_r(&s, &e).unwrap();
                assert!((r - rho).abs() < 1e-9, "rho {rho}: r {r}");
            }
        }
    }

    #[test]
    fn mixing_holds_under_random_phase_sampling() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 4000;
        for &rho in &[0.3, 0.8] {
            let phis: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let s: Vec<f64> = phis.iter().map(|&p| s_if(p, rho)).collect();
            let e: Vec<f64> = phis.iter().map(|&p| e_hat(p)).collect();
            let r = pearson_r(&s, &e).unwrap();
            assert!(
                (r - rho).abs() < 3.0 / (n as f64).sqrt(),
                "rho {rho}: r {r}"
            );
        }
    }

    #[test]
    fn assistance_correlates_with_interface_force_at_target() {
        let spec = SessionSpec {
            target_rho_if_ra: 0.6,
            ..quick_spec()
        };
        let n = 10_000;
        let ifv: Vec<f64> = (0..n)
            .map(|k| interface_force_at(&spec, k as f64 * spec.duration_s / n as f64))
            .collect();
        let ra: Vec<f64> = (0..n)
            .map(|k| assistance_at(&spec, k as f64 * spec.duration_s / n as f64))
            .collect();
        let r = pearson_r(&ifv, &ra).unwrap();
        assert!((r - 0.6).abs() < 0.01, "r = {r}");
    }

    #[test]
    fn session_artifacts_are_deterministic() {
        let spec = quick_spec();
        let cfg = LoadCellConfig::default();
        let a = run_session(&spec, cfg).unwrap();
        let b = run_session(&spec, cfg).unwrap();
        assert_eq!(a.serial_log, b.serial_log);
        assert_eq!(a.emg_csv, b.emg_csv);
        assert_eq!(a.truth, b.truth);

        let mut other = spec.clone();
        other.seed = 1;
        let c = run_session(&other, cfg).unwrap();
        assert_ne!(a.serial_log, c.serial_log);
    }

    #[test]
    fn serial_log_length_matches_rate_times_duration() {
        let spec = quick_spec();
        let art = run_session(&spec, LoadCellConfig::default()).unwrap();
        assert_eq!(art.serial_log.lines().count(), 20_000);
        assert_eq!(art.emg_csv.lines().count(), 1 + 80_000);
    }

    #[test]
    fn trunk_trace_matches_the_polled_records() {
        let spec = quick_spec();
        let light = trunk_trace(&spec).unwrap();
        let mut sb = build_session_bus(&spec, LoadCellConfig::default()).unwrap();
        let out = bus::run_poller(
            spec.duration_s,
            &mut sb.bus,
            sb.left,
            sb.right,
            sb.imu.as_mut(),
        )
        .unwrap();
        assert_eq!(light.len(), out.records.len());
        for (i, rec) in out.records.iter().enumerate() {
            assert_eq!(light.samples[i], rec.trunk_angle_deg(), "sample {i}");
        }
    }

    #[test]
    fn box_trace_spikes_sit_at_impact_times() {
        let spec = quick_spec();
        let [_, _, az] = box_accel_traces(&spec).unwrap();
        let truth = ground_truth(&spec).unwrap();
        for &t0 in &truth.impact_times_s {
            let mid = ((t0 + IMPACT_LEN_S / 2.0) * EMG_RATE_HZ) as usize;
            assert!(
                az.samples[mid] > 4.0 * STANDARD_GRAVITY,
                "no spike near {t0} s"
            );
        }
    }

    #[test]
    fn static_source_zero_mass_zero_noise_is_flat_z() {
        let cfg = LoadCellConfig::default();
        let mut src = StaticWeightSource::new(cfg, 0.0, 9);
        let words = src.words(0.0, 0, 100);
        assert!(words
            .iter()
            .all(|w| w.status == SampleStatus::Valid && w.counts == 1000));
    }

    #[test]
    fn static_source_recovers_six_kg_weight() {
        let cfg = LoadCellConfig::default();
        let mut src = StaticWeightSource::new(cfg, 0.0, 9);
        let rec = run_verification(&cfg, &[6.0], 5, 10.0, 500.0, &mut src).unwrap();
        let expected = 6.0 * STANDARD_GRAVITY;
        assert!((rec.per_load[0].mean_force_n - expected).abs() < cfg.newtons_per_count());
    }

    #[test]
    fn static_source_saturates_far_over_full_scale() {
        let cfg = LoadCellConfig::default();
        let mut src = StaticWeightSource::new(cfg, 3.0, 9);
        let words = src.words(50.0, 0, 100);
        assert!(words.iter().all(|w| w.status == SampleStatus::Stale));
        assert!(words.iter().all(|w| w.counts == cfg.saturation_counts()));
    }
}
