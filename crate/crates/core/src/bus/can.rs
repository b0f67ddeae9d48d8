//! Fixed CAN frame layout for the exported sensor data.
//!
//! Force frame, id 0x101, 8 bytes little-endian: u16 left counts, u16 right
//! counts, u32 timestamp in 100 us ticks. IMU frame, id 0x102: i16 angle in
//! 0.01 degree, i16 velocity in 0.1 degree/s, u32 timestamp ticks. The
//! timestamp wraps modulo 2^32 ticks (about 119 hours).

use super::{Error, PolledRecord};

pub const FORCE_FRAME_ID: u16 = 0x101;
pub const IMU_FRAME_ID: u16 = 0x102;
/// Microseconds per timestamp tick.
pub const TICK_US: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanFrame {
    id: u16,
    payload: Vec<u8>,
}

impl CanFrame {
    pub fn new(id: u16, payload: Vec<u8>) -> Result<Self, Error> {
        if id >= 2048 {
            return Err(Error::FrameFormat(format!("id 0x{id:x} needs more than 11 bits")));
        }
        if payload.len() > 8 {
            return Err(Error::FrameFormat(format!(
                "payload of {} bytes exceeds dlc 8",
                payload.len()
            )));
        }
        Ok(Self { id, payload })
    }

    pub fn id(&self) -> u16 {
        self.id
    }

    pub fn dlc(&self) -> u8 {
        self.payload.len() as u8
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }
}

/// Load-cell half of a polled record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForceFields {
    pub left_counts: u16,
    pub right_counts: u16,
    pub ticks: u32,
}

/// IMU half of a polled record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImuFields {
    pub angle_cdeg: i16,
    pub vel_ddps: i16,
    pub ticks: u32,
}

fn ticks_of(timestamp_us: u64) -> u32 {
    ((timestamp_us / TICK_US) & 0xFFFF_FFFF) as u32
}

pub fn encode_force_frame(rec: &PolledRecord) -> CanFrame {
    let mut payload = Vec::with_capacity(8);
    payload.extend_from_slice(&rec.left_counts.to_le_bytes());
    payload.extend_from_slice(&rec.right_counts.to_le_bytes());
    payload.extend_from_slice(&ticks_of(rec.timestamp_us).to_le_bytes());
    CanFrame {
        id: FORCE_FRAME_ID,
        payload,
    }
}

pub fn encode_imu_frame(rec: &PolledRecord) -> CanFrame {
    let mut payload = Vec::with_capacity(8);
    payload.extend_from_slice(&rec.trunk_angle_cdeg.to_le_bytes());
    payload.extend_from_slice(&rec.trunk_vel_ddps.to_le_bytes());
    payload.extend_from_slice(&ticks_of(rec.timestamp_us).to_le_bytes());
    CanFrame {
        id: IMU_FRAME_ID,
        payload,
    }
}

fn check(frame: &CanFrame, id: u16) -> Result<(), Error> {
    if frame.id != id {
        return Err(Error::FrameFormat(format!(
            "expected id 0x{id:03x}, got 0x{:03x}",
            frame.id
        )));
    }
    if frame.payload.len() != 8 {
        return Err(Error::FrameFormat(format!(
            "expected dlc 8, got {}",
            frame.payload.len()
        )));
    }
    Ok(())
}

pub fn decode_force_frame(frame: &CanFrame) -> Result<ForceFields, Error> {
    check(frame, FORCE_FRAME_ID)?;
    let p = &frame.payload;
    Ok(ForceFields {
        left_counts: u16::from_le_bytes([p[0], p[1]]),
        right_counts: u16::from_le_bytes([p[2], p[3]]),
        ticks: u32::from_le_bytes([p[4], p[5], p[6], p[7]]),
    })
}

pub fn decode_imu_frame(frame: &CanFrame) -> Result<ImuFields, Error> {
    check(frame, IMU_FRAME_ID)?;
    let p = &frame.payload;
    Ok(ImuFields {
        angle_cdeg: i16::from_le_bytes([p[0], p[1]]),
        vel_ddps: i16::from_le_bytes([p[2], p[3]]),
        ticks: u32::from_le_bytes([p[4], p[5], p[6], p[7]]),
    })
}
