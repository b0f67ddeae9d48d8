//! 500 Hz acquisition loop over virtual time.
//!
//! Every tick reads the left cell, the right cell, and the IMU at the same
//! virtual instant, then routes the values through the CAN codec so the
//! emitted records are exactly what the wire would carry.

use super::can::{decode_force_frame, decode_imu_frame, encode_force_frame, encode_imu_frame, TICK_US};
use super::i2c::{DeviceRoute, I2cBus, ImuSource};
use super::{Error, PolledRecord};

pub const POLL_RATE_HZ: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PollOutput {
    pub records: Vec<PolledRecord>,
    /// Reads answered by the hold policy instead of the device.
    pub gap_count: u64,
}

pub(crate) fn quantize(value: f64, scale: f64) -> i16 {
    (value * scale).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

/// Polls both cells and the IMU for `duration_s` at 500 Hz.
///
/// A device that misses a read (nack or stale word) contributes its last
/// known value and the record is flagged; the stream never shortens.
pub fn run_poller(
    duration_s: f64,
    bus: &mut I2cBus,
    left: DeviceRoute,
    right: DeviceRoute,
    imu: &mut dyn ImuSource,
) -> Result<PollOutput, Error> {
    let n = (duration_s * POLL_RATE_HZ).round() as u64;
    let period_us = (1e6 / POLL_RATE_HZ) as u64;
    let mut records = Vec::with_capacity(n as usize);
    let mut gap_count = 0u64;
    let mut last_left: u16 = 0;
    let mut last_right: u16 = 0;

    for i in 0..n {
        let t_us = i * period_us;
        let mut flags = 0u8;

        bus.mux_select(left.channel)?;
        match bus.read_load_cell(left.address, t_us) {
            Ok(word) => last_left = word.counts,
            Err(Error::Nack { .. }) | Err(Error::StaleData { .. }) => {
                flags |= PolledRecord::FLAG_LEFT_HELD;
                gap_count += 1;
            }
            Err(e) => return Err(e),
        }

        bus.mux_select(right.channel)?;
        match bus.read_load_cell(right.address, t_us) {
            Ok(word) => last_right = word.counts,
            Err(Error::Nack { .. }) | Err(Error::StaleData { .. }) => {
                flags |= PolledRecord::FLAG_RIGHT_HELD;
                gap_count += 1;
            }
            Err(e) => return Err(e),
        }

        let imu_sample = imu.sample(t_us);
        let staged = PolledRecord {
            timestamp_us: t_us,
            left_counts: last_left,
            right_counts: last_right,
            trunk_angle_cdeg: quantize(imu_sample.angle_deg, 100.0),
            trunk_vel_ddps: quantize(imu_sample.velocity_dps, 10.0),
            flags,
        };

        // Round-trip through the frame codec; what we report is what a CAN
        // listener would reconstruct.
        let force = decode_force_frame(&encode_force_frame(&staged))?;
        let motion = decode_imu_frame(&encode_imu_frame(&staged))?;
        records.push(PolledRecord {
            timestamp_us: force.ticks as u64 * TICK_US,
            left_counts: force.left_counts,
            right_counts: force.right_counts,
            trunk_angle_cdeg: motion.angle_cdeg,
            trunk_vel_ddps: motion.vel_ddps,
            flags,
        });
    }

    Ok(PollOutput { records, gap_count })
}
