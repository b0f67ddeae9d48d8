//! Second-order-section filtering: a direct-form II transposed single pass
//! and zero-phase forward-backward application with odd-symmetric padding.

use super::Error;

/// One biquad with the leading denominator coefficient normalized away:
/// `y[k] = b0 x[k] + b1 x[k-1] + b2 x[k-2] - a1 y[k-1] - a2 y[k-2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    /// a1, a2 (a0 = 1).
    pub a: [f64; 2],
}

impl Biquad {
    /// Gain at DC.
    pub fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }
}

/// Single forward pass through the cascade. `zi` holds two transposed-form
/// state variables per section and is updated in place, so consecutive calls
/// continue the same filtering run.
pub fn sosfilt(sos: &[Biquad], x: &[f64], zi: &mut [[f64; 2]]) -> Vec<f64> {
    assert_eq!(sos.len(), zi.len(), "one state pair per section");
    let mut y = x.to_vec();
    for (s, st) in sos.iter().zip(zi.iter_mut()) {
        let [b0, b1, b2] = s.b;
        let [a1, a2] = s.a;
        for v in y.iter_mut() {
            let xn = *v;
            let yn = b0 * xn + st[0];
            st[0] = b1 * xn - a1 * yn + st[1];
            st[1] = b2 * xn - a2 * yn;
            *v = yn;
        }
    }
    y
}

/// Per-section steady states for a unit constant input, with each section
/// seeing the DC-settled output of the ones before it. Scaling these by the
/// first sample removes the startup transient for inputs that begin near
/// steady state.
pub fn sosfilt_zi(sos: &[Biquad]) -> Vec<[f64; 2]> {
    let mut scale = 1.0;
    sos.iter()
        .map(|s| {
            let h1 = s.dc_gain();
            let zi = [
                scale * (s.b[1] + s.b[2] - (s.a[0] + s.a[1]) * h1),
                scale * (s.b[2] - s.a[1] * h1),
            ];
            scale *= h1;
            zi
        })
        .collect()
}

/// Antisymmetric reflection about the end samples, `n` points each side.
fn odd_ext(x: &[f64], n: usize) -> Vec<f64> {
    let len = x.len();
    debug_assert!(n < len);
    let mut out = Vec::with_capacity(len + 2 * n);
    for i in (1..=n).rev() {
        out.push(2.0 * x[0] - x[i]);
    }
    out.extend_from_slice(x);
    for i in 1..=n {
        out.push(2.0 * x[len - 1] - x[len - 1 - i]);
    }
    out
}

/// Zero-phase filtering: forward pass, backward pass, padding stripped.
///
/// The input is extended by `3 * (2 * sections + 1)` samples of odd
/// reflection on each side and both passes start from scaled steady-state
/// conditions, which together suppress edge transients.
pub fn sosfiltfilt(sos: &[Biquad], x: &[f64]) -> Result<Vec<f64>, Error> {
    assert!(!sos.is_empty(), "empty cascade");
    let padlen = 3 * (2 * sos.len() + 1);
    if x.len() <= padlen {
        return Err(Error::TooShort {
            need: padlen + 1,
            got: x.len(),
        });
    }

    let ext = odd_ext(x, padlen);
    let zi_unit = sosfilt_zi(sos);
    let scaled = |v: f64| -> Vec<[f64; 2]> { zi_unit.iter().map(|z| [z[0] * v, z[1] * v]).collect() };

    let mut zi = scaled(ext[0]);
    let fwd = sosfilt(sos, &ext, &mut zi);

    let rev: Vec<f64> = fwd.into_iter().rev().collect();
    let mut zi = scaled(rev[0]);
    let bwd = sosfilt(sos, &rev, &mut zi);

    let mut out: Vec<f64> = bwd.into_iter().rev().collect();
    out.drain(..padlen);
    out.truncate(out.len() - padlen);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::design::{design_bandpass, BandpassSpec};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_sos() -> Vec<Biquad> {
        design_bandpass(&BandpassSpec::default(), 2000.0).unwrap()
    }

    #[test]
    fn constant_input_is_rejected_everywhere() {
        let sos = default_sos();
        let y = sosfiltfilt(&sos, &vec![5.0; 4000]).unwrap();
        assert_eq!(y.len(), 4000);
        for (i, v) in y.iter().enumerate() {
            assert!(v.abs() < 1e-6, "sample {i}: {v}");
        }
    }

    #[test]
    fn inband_sine_passes_at_unit_gain_single_pass() {
        let sos = default_sos();
        let rate = 2000.0;
        let x: Vec<f64> = (0..8000)
            .map(|i| (2.0 * std::f64::consts::PI * 50.0 * i as f64 / rate).sin())
            .collect();
        let mut zi = vec![[0.0; 2]; sos.len()];
        let y = sosfilt(&sos, &x, &mut zi);
        // Steady state: last 4000 samples are an exact number of 50 Hz
        // periods, so RMS * sqrt(2) is the amplitude.
        let tail = &y[4000..];
        let rms = (tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt();
        let amp = rms * 2f64.sqrt();
        let err_db = 20.0 * amp.log10();
        assert!(err_db.abs() < 0.1, "amplitude {amp} ({err_db:.4} dB)");
    }

    #[test]
    fn zero_phase_keeps_correlation_peak_at_lag_zero() {
        let sos = default_sos();
        let rate = 2000.0;
        let x: Vec<f64> = (0..6000)
            .map(|i| {
                let t = i as f64 / rate;
                (2.0 * std::f64::consts::PI * 30.0 * t).sin()
                    + 0.5 * (2.0 * std::f64::consts::PI * 80.0 * t).sin()
            })
            .collect();
        let y = sosfiltfilt(&sos, &x).unwrap();
        let n = x.len();
        let xcorr = |lag: i64| -> f64 {
            let mut s = 0.0;
            for (i, xv) in x.iter().enumerate() {
                let j = i as i64 + lag;
                if (0..n as i64).contains(&j) {
                    s += xv * y[j as usize];
                }
            }
            s
        };
        let (best, _) = (-10..=10)
            .map(|l| (l, xcorr(l)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn filtfilt_is_linear() {
        let sos = default_sos();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..2000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..2000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b) = (2.5, -1.3);
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();

        let fx = sosfiltfilt(&sos, &x).unwrap();
        let fy = sosfiltfilt(&sos, &y).unwrap();
        let fm = sosfiltfilt(&sos, &mixed).unwrap();

        let norm: f64 = fm.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..fm.len() {
            let want = a * fx[i] + b * fy[i];
            assert!(
                (fm[i] - want).abs() <= 1e-9 * norm.max(1.0),
                "sample {i}: {} vs {want}",
                fm[i]
            );
        }
    }

    #[test]
    fn short_input_is_refused() {
        let sos = default_sos();
        // 4 sections: padding needs 27 samples per side.
        assert!(matches!(
            sosfiltfilt(&sos, &vec![0.0; 27]),
            Err(Error::TooShort { need: 28, got: 27 })
        ));
        assert!(sosfiltfilt(&sos, &vec![0.0; 28]).is_ok());
    }

    #[test]
    fn zi_holds_filter_at_steady_state() {
        let sos = default_sos();
        let zi_unit = sosfilt_zi(&sos);
        let level = 3.7;
        let mut zi: Vec<[f64; 2]> = zi_unit.iter().map(|z| [z[0] * level, z[1] * level]).collect();
        let y = sosfilt(&sos, &vec![level; 200], &mut zi);
        // Overall DC gain is 0 (band-pass), so the settled output is 0 from
        // the first sample when starting at steady state.
        for (i, v) in y.iter().enumerate() {
            assert!(v.abs() < 1e-9, "sample {i}: {v}");
        }
    }
}
