//! Deterministic acquisition-chain simulation: two load cells behind an
//! 8-channel I2C multiplexer, a 500 Hz poller that pairs load-cell and trunk
//! IMU readings at the same virtual instant, a CAN frame codec, and a
//! serial-style log format.
//!
//! Time is virtual and event-stepped; nothing here touches wall clocks, so
//! identical inputs produce byte-identical logs.

pub mod can;
pub mod i2c;
pub mod poller;
pub mod serial;

pub use can::{
    decode_force_frame, decode_imu_frame, encode_force_frame, encode_imu_frame, CanFrame,
    FORCE_FRAME_ID, IMU_FRAME_ID, TICK_US,
};
pub use i2c::{Device, DeviceRoute, ForceSource, I2cBus, ImuSample, ImuSource};
pub use poller::{run_poller, PollOutput, POLL_RATE_HZ};
pub use serial::{export_serial_log, parse_serial_log, BAUD_LIMIT};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("nack from address 0x{address:02x}")]
    Nack { address: u8 },
    #[error("stale data word (counts field {counts})")]
    StaleData { counts: u16 },
    #[error("invalid bus topology: {0}")]
    Topology(String),
    #[error("invalid mux channel {0} (must be 0-7)")]
    InvalidChannel(u8),
    #[error("frame format: {0}")]
    FrameFormat(String),
    #[error("line {line} needs {bits} bit/s, over the {limit} baud budget")]
    BudgetExceeded { line: usize, bits: u64, limit: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One matched 500 Hz sample of both load cells and the trunk IMU.
///
/// Angle and velocity are stored in their wire fixed-point form (0.01 degree
/// and 0.1 degree/s steps) so that CAN frames and serial-log lines reproduce
/// the record exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolledRecord {
    pub timestamp_us: u64,
    pub left_counts: u16,
    pub right_counts: u16,
    pub trunk_angle_cdeg: i16,
    pub trunk_vel_ddps: i16,
    /// Hold markers: when a device does not answer, the previous value is
    /// kept and the corresponding bit is set.
    pub flags: u8,
}

impl PolledRecord {
    pub const FLAG_LEFT_HELD: u8 = 1 << 0;
    pub const FLAG_RIGHT_HELD: u8 = 1 << 1;

    pub fn trunk_angle_deg(&self) -> f64 {
        self.trunk_angle_cdeg as f64 / 100.0
    }

    pub fn trunk_velocity_dps(&self) -> f64 {
        self.trunk_vel_ddps as f64 / 10.0
    }
}
