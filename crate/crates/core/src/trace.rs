//! Uniform-rate time series with a declared physical unit.

use serde::{Deserialize, Serialize};

/// Physical unit carried by a [`SignalTrace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    Newton,
    Millivolt,
    /// Fraction of maximum voluntary contraction (not percent).
    NormalizedMvc,
    Degree,
    MetersPerSecond2,
    Counts,
}

impl std::fmt::Display for Unit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Unit::Newton => "N",
            Unit::Millivolt => "mV",
            Unit::NormalizedMvc => "MVC",
            Unit::Degree => "deg",
            Unit::MetersPerSecond2 => "m/s^2",
            Unit::Counts => "counts",
        };
        write!(f, "{s}")
    }
}

/// A uniformly sampled signal starting at t = 0 on the session clock.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    pub samples: Vec<f64>,
    pub rate_hz: f64,
    pub unit: Unit,
    pub label: String,
}

impl SignalTrace {
    pub fn new(samples: Vec<f64>, rate_hz: f64, unit: Unit, label: impl Into<String>) -> Self {
        assert!(rate_hz > 0.0, "sample rate must be positive");
        Self {
            samples,
            rate_hz,
            unit,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate_hz
    }

    /// Time of sample `i` in seconds.
    pub fn time_at(&self, i: usize) -> f64 {
        i as f64 / self.rate_hz
    }

    /// Linear interpolation at time `t_s`, clamped to the trace span.
    pub fn sample_at(&self, t_s: f64) -> f64 {
        let n = self.samples.len();
        assert!(n > 0, "cannot interpolate an empty trace");
        let x = t_s * self.rate_hz;
        if x <= 0.0 {
            return self.samples[0];
        }
        let i = x.floor() as usize;
        if i >= n - 1 {
            return self.samples[n - 1];
        }
        let frac = x - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// Replaces the sample buffer, keeping rate/unit/label.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            rate_hz: self.rate_hz,
            unit: self.unit,
            label: self.label.clone(),
        }
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return f64::NAN;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn std(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.samples.iter().map(|x| (x - m) * (x - m)).sum();
        (ss / (n - 1) as f64).sqrt()
    }
}
