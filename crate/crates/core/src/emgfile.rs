//! The EMG ingestion CSV: four surface-EMG channels plus the box IMU's three
//! acceleration axes at a shared 2000 Hz timebase.
//!
//! Header `t_s,esl_l,esl_r,esi_l,esi_r,box_ax,box_ay,box_az`; EMG in
//! millivolts, acceleration in m/s^2.

use thiserror::Error;

use crate::trace::{SignalTrace, Unit};

pub const EMG_RATE_HZ: f64 = 2000.0;
pub const HEADER: &str = "t_s,esl_l,esl_r,esi_l,esi_r,box_ax,box_ay,box_az";

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// One session's high-rate block: bilateral erector spinae longissimus and
/// iliocostalis channels and the box accelerometer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgBlock {
    pub esl_l: SignalTrace,
    pub esl_r: SignalTrace,
    pub esi_l: SignalTrace,
    pub esi_r: SignalTrace,
    pub box_ax: SignalTrace,
    pub box_ay: SignalTrace,
    pub box_az: SignalTrace,
}

impl EmgBlock {
    fn columns(&self) -> [&SignalTrace; 7] {
        [
            &self.esl_l, &self.esl_r, &self.esi_l, &self.esi_r, &self.box_ax, &self.box_ay,
            &self.box_az,
        ]
    }

    pub fn len(&self) -> usize {
        self.esl_l.len()
    }

    pub fn is_empty(&self) -> bool {
        self.esl_l.is_empty()
    }
}

pub fn write(block: &EmgBlock) -> Result<String, Error> {
    let n = block.len();
    for tr in block.columns() {
        if tr.len() != n || tr.rate_hz != EMG_RATE_HZ {
            return Err(Error::ShapeMismatch(format!(
                "column {:?}: {} samples at {} Hz, expected {} at {}",
                tr.label,
                tr.len(),
                tr.rate_hz,
                n,
                EMG_RATE_HZ
            )));
        }
    }
    let mut out = String::with_capacity(16 + n * 72);
    out.push_str(HEADER);
    out.push('\n');
    let cols = block.columns();
    for i in 0..n {
        // 0.5 ms steps print exactly in four decimals.
        out.push_str(&format!("{:.4}", i as f64 / EMG_RATE_HZ));
        for tr in cols {
            out.push_str(&format!(",{:.6}", tr.samples[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<EmgBlock, Error> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected header {h:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut cols: [Vec<f64>; 7] = Default::default();
    for (i, line) in lines {
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, got {}", fields.len())));
        }
        let t: f64 = fields[0].parse().map_err(|_| err("bad t_s".into()))?;
        let expect_t = (i - 1) as f64 / EMG_RATE_HZ;
        if (t - expect_t).abs() > 0.5 / EMG_RATE_HZ {
            return Err(err(format!("t_s {t} breaks the {EMG_RATE_HZ} Hz timebase")));
        }
        for (field, col) in fields[1..].iter().zip(cols.iter_mut()) {
            col.push(
                field
                    .parse()
                    .map_err(|_| err(format!("bad number {field:?}")))?,
            );
        }
    }
    let [esl_l, esl_r, esi_l, esi_r, ax, ay, az] = cols;
    let emg = |v: Vec<f64>, label: &str| SignalTrace::new(v, EMG_RATE_HZ, Unit::Millivolt, label);
    let acc =
        |v: Vec<f64>, label: &str| SignalTrace::new(v, EMG_RATE_HZ, Unit::MetersPerSecond2, label);
    Ok(EmgBlock {
        esl_l: emg(esl_l, "esl_l"),
        esl_r: emg(esl_r, "esl_r"),
        esi_l: emg(esi_l, "esi_l"),
        esi_r: emg(esi_r, "esi_r"),
        box_ax: acc(ax, "box_ax"),
        box_ay: acc(ay, "box_ay"),
        box_az: acc(az, "box_az"),
    })
}
