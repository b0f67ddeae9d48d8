//! Message-level I2C segment with a TCA9548A-style multiplexer.
//!
//! Both load cells sit at the same 7-bit address on different mux channels,
//! which is the reason the mux exists; a read reaches a device only while its
//! channel is enabled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Error;
use crate::loadcell::{LoadCellConfig, LoadCellWord, SampleStatus};

/// True force applied to a cell at a virtual instant, newtons.
pub trait ForceSource {
    fn force_n(&mut self, t_us: u64) -> f64;
}

impl<F: FnMut(u64) -> f64> ForceSource for F {
    fn force_n(&mut self, t_us: u64) -> f64 {
        self(t_us)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub angle_deg: f64,
    pub velocity_dps: f64,
}

/// Trunk IMU state at a virtual instant.
pub trait ImuSource {
    fn sample(&mut self, t_us: u64) -> ImuSample;
}

impl<F: FnMut(u64) -> ImuSample> ImuSource for F {
    fn sample(&mut self, t_us: u64) -> ImuSample {
        self(t_us)
    }
}

pub enum Device {
    LoadCell {
        cfg: LoadCellConfig,
        source: Box<dyn ForceSource>,
    },
}

/// Where a device lives: mux channel plus 7-bit address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviceRoute {
    pub channel: u8,
    pub address: u8,
}

struct Attached {
    route: DeviceRoute,
    device: Device,
}

pub struct I2cBus {
    mux_address: u8,
    /// Enabled-channel bitmask of the mux; starts with all channels off.
    mux_mask: u8,
    devices: Vec<Attached>,
    /// Scheduled one-shot read failures (virtual time, address).
    nack_schedule: Vec<(u64, u8)>,
    /// Probability that a read suffers one flipped bit; models residual bus
    /// noise, default 0.
    bit_error_prob: f64,
    rng: ChaCha8Rng,
}

impl I2cBus {
    pub fn new(mux_address: u8) -> Self {
        Self {
            mux_address,
            mux_mask: 0,
            devices: Vec::new(),
            nack_schedule: Vec::new(),
            bit_error_prob: 0.0,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn attach(&mut self, route: DeviceRoute, device: Device) -> Result<(), Error> {
        if route.channel > 7 {
            return Err(Error::InvalidChannel(route.channel));
        }
        if route.address >= 0x80 {
            return Err(Error::Topology(format!(
                "address 0x{:02x} is not a 7-bit address",
                route.address
            )));
        }
        if route.address == self.mux_address {
            return Err(Error::Topology(format!(
                "address 0x{:02x} collides with the mux",
                route.address
            )));
        }
        if self.devices.iter().any(|d| d.route == route) {
            return Err(Error::Topology(format!(
                "channel {} already has a device at 0x{:02x}",
                route.channel, route.address
            )));
        }
        self.devices.push(Attached { route, device });
        Ok(())
    }

    /// Enables exactly one downstream channel.
    pub fn mux_select(&mut self, channel: u8) -> Result<(), Error> {
        if channel > 7 {
            return Err(Error::InvalidChannel(channel));
        }
        self.mux_mask = 1 << channel;
        Ok(())
    }

    pub fn mux_deselect_all(&mut self) {
        self.mux_mask = 0;
    }

    /// Makes the device at `address` miss exactly one read at virtual time
    /// `t_us`.
    pub fn schedule_nack(&mut self, t_us: u64, address: u8) {
        self.nack_schedule.push((t_us, address));
    }

    pub fn set_bit_error(&mut self, probability: f64, seed: u64) {
        self.bit_error_prob = probability;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    /// Reads `n_bytes` from the device at `address` through the enabled mux
    /// channel, sampling its source at virtual time `t_us`.
    pub fn i2c_read(&mut self, address: u8, n_bytes: usize, t_us: u64) -> Result<Vec<u8>, Error> {
        if let Some(i) = self
            .nack_schedule
            .iter()
            .position(|&(t, a)| t == t_us && a == address)
        {
            self.nack_schedule.swap_remove(i);
            return Err(Error::Nack { address });
        }
        let mask = self.mux_mask;
        let attached = self
            .devices
            .iter_mut()
            .find(|d| d.route.address == address && (mask >> d.route.channel) & 1 == 1)
            .ok_or(Error::Nack { address })?;
        let mut bytes = match &mut attached.device {
            Device::LoadCell { cfg, source } => {
                if n_bytes != 2 {
                    return Err(Error::Nack { address });
                }
                sample_word(cfg, source.force_n(t_us)).to_bytes().to_vec()
            }
        };
        if self.bit_error_prob > 0.0 && self.rng.gen::<f64>() < self.bit_error_prob {
            let bit = self.rng.gen_range(0..bytes.len() * 8);
            bytes[bit / 8] ^= 1 << (bit % 8);
        }
        Ok(bytes)
    }

    /// Load-cell read decoded to a word; stale words become errors so the
    /// caller can apply its hold policy.
    pub fn read_load_cell(&mut self, address: u8, t_us: u64) -> Result<LoadCellWord, Error> {
        let bytes = self.i2c_read(address, 2, t_us)?;
        let word = LoadCellWord::from_bytes([bytes[0], bytes[1]]);
        match word.status {
            SampleStatus::Valid => Ok(word),
            SampleStatus::Stale => Err(Error::StaleData {
                counts: word.counts,
            }),
        }
    }
}

/// Converts a true force into the cell's output word. Forces outside the
/// representable span clip to the nearest end with the stale status set.
pub fn sample_word(cfg: &LoadCellConfig, force_n: f64) -> LoadCellWord {
    let delta = force_n / crate::loadcell::LBF_TO_N / cfg.full_scale_lbf
        * crate::loadcell::COUNTS_SPAN as f64;
    let raw = (cfg.zero_offset_counts as f64 + delta).round();
    let sat = cfg.saturation_counts();
    if raw > sat as f64 {
        LoadCellWord::stale(sat)
    } else if raw < 0.0 {
        LoadCellWord::stale(0)
    } else {
        LoadCellWord::valid(raw as u16)
    }
}
