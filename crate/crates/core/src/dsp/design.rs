//! Butterworth band-pass design through the classic analog route: normalized
//! low-pass prototype poles, low-pass to band-pass transform on prewarped
//! edges, bilinear transform, then conjugate-pair grouping into second-order
//! sections.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::filter::Biquad;
use super::Error;

/// Band-pass design request. `order` is the low-pass prototype order, so the
/// realized band-pass has `2 * order` poles and `order` biquad sections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub order: usize,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandpassSpec {
    pub fn new(order: usize, low_hz: f64, high_hz: f64) -> Self {
        Self {
            order,
            low_hz,
            high_hz,
        }
    }
}

impl Default for BandpassSpec {
    fn default() -> Self {
        Self {
            order: 4,
            low_hz: 10.0,
            high_hz: 400.0,
        }
    }
}

/// Poles of the normalized analog Butterworth low-pass: unit circle, left
/// half-plane, equally spaced.
fn prototype_poles(order: usize) -> Vec<Complex64> {
    (0..order)
        .map(|i| {
            let m = (2 * i + 1) as f64 - order as f64;
            -Complex64::new(0.0, PI * m / (2.0 * order as f64)).exp()
        })
        .collect()
}

/// Designs the digital band-pass as cascaded biquads.
pub fn design_bandpass(spec: &BandpassSpec, rate_hz: f64) -> Result<Vec<Biquad>, Error> {
    if spec.order == 0 {
        return Err(Error::InvalidBand("order must be at least 1".into()));
    }
    if !(spec.low_hz > 0.0 && spec.low_hz < spec.high_hz) {
        return Err(Error::InvalidBand(format!(
            "need 0 < low < high, got [{}, {}]",
            spec.low_hz, spec.high_hz
        )));
    }
    if spec.high_hz >= rate_hz / 2.0 {
        return Err(Error::InvalidBand(format!(
            "high edge {} Hz reaches Nyquist ({} Hz)",
            spec.high_hz,
            rate_hz / 2.0
        )));
    }

    let n = spec.order;
    // Prewarped analog edges; the factor 4 fixes the bilinear transform's
    // internal sample rate, and cancels out of the final coefficients.
    let wl = 4.0 * (PI * spec.low_hz / rate_hz).tan();
    let wh = 4.0 * (PI * spec.high_hz / rate_hz).tan();
    let bw = wh - wl;
    let w0sq = Complex64::new(wl * wh, 0.0);

    // Low-pass to band-pass: each prototype pole splits into a pair
    // straddling the band center; n zeros sit at the analog origin.
    let mut analog_poles = Vec::with_capacity(2 * n);
    for p in prototype_poles(n) {
        let plp = p * (bw / 2.0);
        let disc = (plp * plp - w0sq).sqrt();
        analog_poles.push(plp + disc);
        analog_poles.push(plp - disc);
    }
    let k_analog = bw.powi(n as i32);

    // Bilinear transform s -> (4 + s)/(4 - s). The n origin zeros land on
    // z = +1 and the n zeros at infinity land on z = -1.
    let fs2 = Complex64::new(4.0, 0.0);
    let mut den_prod = Complex64::new(1.0, 0.0);
    let digital_poles: Vec<Complex64> = analog_poles
        .iter()
        .map(|&p| {
            den_prod *= fs2 - p;
            (fs2 + p) / (fs2 - p)
        })
        .collect();
    let num_prod = fs2.powu(n as u32);
    let k_digital = k_analog * (num_prod / den_prod).re;

    // Group poles into conjugate pairs (real poles, possible at odd orders,
    // pair among themselves). Each section takes one z=+1 and one z=-1 zero,
    // giving numerator g * (1 - z^-2); the overall gain spreads evenly so no
    // section carries extreme coefficients.
    let mut upper: Vec<Complex64> = digital_poles.iter().copied().filter(|p| p.im > 0.0).collect();
    let mut real: Vec<f64> = digital_poles
        .iter()
        .filter(|p| p.im == 0.0)
        .map(|p| p.re)
        .collect();
    upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    real.sort_by(f64::total_cmp);

    let nsec = n;
    debug_assert_eq!(upper.len() * 2 + real.len(), 2 * n);
    debug_assert_eq!(real.len() % 2, 0);

    let g = k_digital.abs().powf(1.0 / nsec as f64);
    let mut sections = Vec::with_capacity(nsec);
    for p in upper {
        sections.push(Biquad {
            b: [g, 0.0, -g],
            a: [-2.0 * p.re, p.norm_sqr()],
        });
    }
    for pair in real.chunks(2) {
        sections.push(Biquad {
            b: [g, 0.0, -g],
            a: [-(pair[0] + pair[1]), pair[0] * pair[1]],
        });
    }
    if k_digital < 0.0 {
        for b in &mut sections[0].b {
            *b = -*b;
        }
    }
    // High-Q sections (poles nearest the unit circle) run last.
    Ok(sections)
}

/// Complex response of a section cascade at `f_hz`.
pub fn sos_response(sos: &[Biquad], f_hz: f64, rate_hz: f64) -> Complex64 {
    let z1 = Complex64::from_polar(1.0, -2.0 * PI * f_hz / rate_hz);
    let z2 = z1 * z1;
    sos.iter()
        .map(|s| (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (Complex64::new(1.0, 0.0) + s.a[0] * z1 + s.a[1] * z2))
        .product()
}
