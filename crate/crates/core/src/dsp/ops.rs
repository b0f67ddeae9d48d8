//! Trace-level conditioning operations. All of them preserve length and
//! sample rate.

use super::design::{design_bandpass, BandpassSpec};
use super::filter::sosfiltfilt;
use super::Error;
use crate::loadcell::{counts_to_force, LoadCellConfig};
use crate::trace::{SignalTrace, Unit};

/// Zero-phase band-pass of a whole trace.
pub fn bandpass_filtfilt(trace: &SignalTrace, spec: &BandpassSpec) -> Result<SignalTrace, Error> {
    let sos = design_bandpass(spec, trace.rate_hz)?;
    Ok(trace.with_samples(sosfiltfilt(&sos, &trace.samples)?))
}

/// Removes the least-squares line fitted over the sample index.
pub fn detrend(trace: &SignalTrace) -> Result<SignalTrace, Error> {
    let n = trace.len();
    if n < 2 {
        return Err(Error::TooShort { need: 2, got: n });
    }
    // Centering the index makes the normal equations diagonal.
    let nf = n as f64;
    let tbar = (nf - 1.0) / 2.0;
    let mut sy = 0.0;
    let mut sty = 0.0;
    let mut stt = 0.0;
    for (i, &v) in trace.samples.iter().enumerate() {
        let t = i as f64 - tbar;
        sy += v;
        sty += t * v;
        stt += t * t;
    }
    let mean = sy / nf;
    let slope = sty / stt;
    let samples = trace
        .samples
        .iter()
        .enumerate()
        .map(|(i, &v)| v - mean - slope * (i as f64 - tbar))
        .collect();
    Ok(trace.with_samples(samples))
}

/// Detrends, then takes the absolute value.
pub fn detrend_rectify(trace: &SignalTrace) -> Result<SignalTrace, Error> {
    let mut out = detrend(trace)?;
    for v in &mut out.samples {
        *v = v.abs();
    }
    out.label = format!("{} (rectified)", trace.label);
    Ok(out)
}

/// Centered moving average over `window_s` seconds. The window length is
/// forced odd; at the edges each side shrinks to what is available.
pub fn moving_average(trace: &SignalTrace, window_s: f64) -> Result<SignalTrace, Error> {
    let w = (window_s * trace.rate_hz).round() as i64;
    if w < 1 {
        return Err(Error::TooShort {
            need: 1,
            got: w.max(0) as usize,
        });
    }
    let w = if w % 2 == 0 { w + 1 } else { w };
    let half = (w / 2) as usize;
    let n = trace.len();

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in &trace.samples {
        prefix.push(prefix.last().unwrap() + v);
    }
    let samples = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect();
    Ok(trace.with_samples(samples))
}

/// Divides by the maximum-voluntary-contraction reference; output unit
/// becomes a fraction of MVC.
pub fn mvc_normalize(trace: &SignalTrace, mvc_value: f64) -> Result<SignalTrace, Error> {
    if mvc_value <= 0.0 || mvc_value.is_nan() {
        return Err(Error::InvalidMvc(mvc_value));
    }
    let mut out = trace.with_samples(trace.samples.iter().map(|v| v / mvc_value).collect());
    out.unit = Unit::NormalizedMvc;
    Ok(out)
}

/// Elementwise mean of a left/right channel pair.
pub fn average_bilateral(left: &SignalTrace, right: &SignalTrace) -> Result<SignalTrace, Error> {
    if left.len() != right.len() || left.rate_hz != right.rate_hz {
        return Err(Error::ShapeMismatch(format!(
            "left {} samples at {} Hz vs right {} samples at {} Hz",
            left.len(),
            left.rate_hz,
            right.len(),
            right.rate_hz
        )));
    }
    let samples = left
        .samples
        .iter()
        .zip(&right.samples)
        .map(|(l, r)| 0.5 * (l + r))
        .collect();
    let mut out = left.with_samples(samples);
    out.label = format!("avg({}, {})", left.label, right.label);
    Ok(out)
}

/// Converts two raw-counts traces to newtons and averages them into one
/// interface-force trace.
pub fn build_interface_force(
    left_counts: &SignalTrace,
    right_counts: &SignalTrace,
    cfg_left: &LoadCellConfig,
    cfg_right: &LoadCellConfig,
) -> Result<SignalTrace, Error> {
    if left_counts.len() != right_counts.len() || left_counts.rate_hz != right_counts.rate_hz {
        return Err(Error::ShapeMismatch(format!(
            "left {} samples at {} Hz vs right {} samples at {} Hz",
            left_counts.len(),
            left_counts.rate_hz,
            right_counts.len(),
            right_counts.rate_hz
        )));
    }
    let mut samples = Vec::with_capacity(left_counts.len());
    for (index, (l, r)) in left_counts.samples.iter().zip(&right_counts.samples).enumerate() {
        let fl = counts_to_force(l.round() as i64, cfg_left)
            .map_err(|source| Error::Sample { index, source })?;
        let fr = counts_to_force(r.round() as i64, cfg_right)
            .map_err(|source| Error::Sample { index, source })?;
        samples.push(0.5 * (fl + fr));
    }
    Ok(SignalTrace::new(
        samples,
        left_counts.rate_hz,
        Unit::Newton,
        "interface force",
    ))
}

/// Full EMG conditioning chain: band-pass, detrend and rectify, moving
/// average, MVC normalization.
pub fn emg_envelope(
    trace: &SignalTrace,
    spec: &BandpassSpec,
    window_s: f64,
    mvc_value: f64,
) -> Result<SignalTrace, Error> {
    let filtered = bandpass_filtfilt(trace, spec)?;
    let rectified = detrend_rectify(&filtered)?;
    let smoothed = moving_average(&rectified, window_s)?;
    mvc_normalize(&smoothed, mvc_value)
}
