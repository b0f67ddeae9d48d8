//! Lifting-cycle segmentation: trunk-angle peak detection, box-impact event
//! detection, peak-to-peak epoch extraction onto a normalized 0-100 % grid,
//! and cycle-ensemble assembly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp;
use crate::trace::SignalTrace;

/// Grid resolution for normalized cycles: 0 to 100 % inclusive.
pub const GRID_POINTS: usize = 101;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient cycles: {0}")]
    InsufficientCycles(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    Stoop,
}

/// Session condition tag carried through to reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskCondition {
    pub subject: String,
    pub load_kg: f64,
    pub technique: Technique,
}

impl TaskCondition {
    pub fn new(subject: &str, load_kg: f64) -> Self {
        Self {
            subject: subject.to_string(),
            load_kg,
            technique: Technique::Stoop,
        }
    }
}

/// One lifting/lowering epoch resampled onto the normalized grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftCycle {
    pub if_profile: Vec<f64>,
    pub ra_profile: Vec<f64>,
    pub trunk_profile: Vec<f64>,
    /// Muscle name to normalized-activation profile, in column order.
    pub emg_profiles: Vec<(String, Vec<f64>)>,
    pub source_span_us: (u64, u64),
}

impl LiftCycle {
    /// Grid coordinate of point `j` in percent.
    pub fn grid_pct(j: usize) -> f64 {
        j as f64 * 100.0 / (GRID_POINTS - 1) as f64
    }

    /// Profile of the named muscle, if present.
    pub fn emg(&self, muscle: &str) -> Option<&[f64]> {
        self.emg_profiles
            .iter()
            .find(|(m, _)| m == muscle)
            .map(|(_, v)| v.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleEnsemble {
    pub cycles: Vec<LiftCycle>,
    pub condition: TaskCondition,
}

/// Finds trunk-angle peaks: local maxima of a lightly smoothed copy of the
/// trace, kept when their prominence reaches 20 % of the smoothed range,
/// thinned to a minimum separation of 0.6 nominal periods (tallest first),
/// and returned in time order as seconds.
pub fn detect_trunk_peaks(
    trunk_angle: &SignalTrace,
    cadence_cpm: f64,
) -> Result<Vec<f64>, Error> {
    let period_s = 60.0 / cadence_cpm;
    if trunk_angle.duration_s() < 2.0 * period_s {
        return Err(Error::InsufficientCycles(format!(
            "trace covers {:.2} s, need at least two periods ({:.2} s)",
            trunk_angle.duration_s(),
            2.0 * period_s
        )));
    }
    // Smoothing a tenth of a period wide keeps broad flexion peaks intact
    // while removing sample-level noise maxima.
    let smoothed = dsp::moving_average(trunk_angle, 0.1 * period_s)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    let v = &smoothed.samples;
    let n = v.len();

    let mut candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1])
        .collect();

    let range = smoothed.max() - smoothed.min();
    let min_prominence = 0.2 * range;
    candidates.retain(|&i| prominence(v, i) >= min_prominence);

    // Tallest-first greedy thinning at 0.6 periods.
    candidates.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    let min_sep = (0.6 * period_s * trunk_angle.rate_hz).round() as i64;
    let mut kept: Vec<usize> = Vec::new();
    for i in candidates {
        if kept.iter().all(|&k| (k as i64 - i as i64).abs() >= min_sep) {
            kept.push(i);
        }
    }
    kept.sort_unstable();

    if kept.len() < 2 {
        return Err(Error::InsufficientCycles(format!(
            "found {} peak(s), need at least 2",
            kept.len()
        )));
    }
    Ok(kept.into_iter().map(|i| i as f64 / trunk_angle.rate_hz).collect())
}

/// Topographic prominence of the local maximum at `i`: height above the
/// higher of the two valley floors separating it from taller terrain.
fn prominence(v: &[f64], i: usize) -> f64 {
    let peak = v[i];
    let mut left_min = peak;
    for j in (0..i).rev() {
        if v[j] > peak {
            break;
        }
        left_min = left_min.min(v[j]);
    }
    let mut right_min = peak;
    for &x in &v[i + 1..] {
        if x > peak {
            break;
        }
        right_min = right_min.min(x);
    }
    peak - left_min.max(right_min)
}

/// Box-impact events: samples exceeding mean + 6 sigma of the magnitude
/// trace, with a 0.5 s refractory hold after each event. Times in seconds.
pub fn detect_box_impacts(box_accel_mag: &SignalTrace) -> Vec<f64> {
    if box_accel_mag.is_empty() {
        return Vec::new();
    }
    let threshold = box_accel_mag.mean() + 6.0 * box_accel_mag.std();
    let refractory = (0.5 * box_accel_mag.rate_hz).round() as usize;
    let mut events = Vec::new();
    let mut next_allowed = 0usize;
    for (i, &a) in box_accel_mag.samples.iter().enumerate() {
        if i >= next_allowed && a.abs() > threshold {
            events.push(i as f64 / box_accel_mag.rate_hz);
            next_allowed = i + refractory.max(1);
        }
    }
    events
}

/// Elementwise Euclidean magnitude of three acceleration axes.
pub fn accel_magnitude(
    ax: &SignalTrace,
    ay: &SignalTrace,
    az: &SignalTrace,
) -> Result<SignalTrace, Error> {
    if ax.len() != ay.len() || ay.len() != az.len() {
        return Err(Error::ShapeMismatch(format!(
            "axis lengths {} / {} / {}",
            ax.len(),
            ay.len(),
            az.len()
        )));
    }
    let samples = (0..ax.len())
        .map(|i| {
            (ax.samples[i].powi(2) + ay.samples[i].powi(2) + az.samples[i].powi(2)).sqrt()
        })
        .collect();
    let mut out = ax.with_samples(samples);
    out.label = "accel magnitude".into();
    Ok(out)
}

/// The time-aligned traces a cycle is cut from. All share the session's
/// t = 0 epoch; rates may differ (the grid interpolation aligns them).
pub struct SessionTraces<'a> {
    pub interface_force: &'a SignalTrace,
    pub assistance: &'a SignalTrace,
    pub trunk_angle: &'a SignalTrace,
    pub emg: Vec<(String, &'a SignalTrace)>,
}

/// Span-duration acceptance window, as fractions of the nominal period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanGate {
    pub min_frac: f64,
    pub max_frac: f64,
}

impl Default for SpanGate {
    fn default() -> Self {
        Self {
            min_frac: 0.5,
            max_frac: 1.5,
        }
    }
}

/// Cuts peak-to-peak spans, keeps the first run of `target` consecutive
/// spans passing the duration gate, and resamples every trace onto the
/// shared grid by linear interpolation.
pub fn extract_cycles(
    peaks_s: &[f64],
    traces: &SessionTraces,
    cadence_cpm: f64,
    gate: SpanGate,
    condition: TaskCondition,
    target: usize,
) -> Result<CycleEnsemble, Error> {
    let period_s = 60.0 / cadence_cpm;
    let (lo, hi) = (gate.min_frac * period_s, gate.max_frac * period_s);

    let spans: Vec<(f64, f64)> = peaks_s.windows(2).map(|w| (w[0], w[1])).collect();
    let valid: Vec<bool> = spans
        .iter()
        .map(|&(a, b)| (b - a) >= lo && (b - a) <= hi)
        .collect();

    let start = (0..spans.len())
        .filter(|&s| s + target <= spans.len())
        .find(|&s| valid[s..s + target].iter().all(|&v| v));
    let Some(start) = start else {
        let rejected: Vec<String> = spans
            .iter()
            .zip(&valid)
            .enumerate()
            .filter(|(_, (_, ok))| !*ok)
            .map(|(k, ((a, b), _))| {
                format!("span {k} ({a:.2}..{b:.2} s): duration {:.2} s outside [{lo:.2}, {hi:.2}]", b - a)
            })
            .collect();
        return Err(Error::InsufficientCycles(format!(
            "no run of {target} consecutive valid spans in {} candidates; rejected: [{}]",
            spans.len(),
            rejected.join("; ")
        )));
    };

    let cycles = spans[start..start + target]
        .iter()
        .map(|&(t0, t1)| {
            let grid_time =
                |j: usize| t0 + (t1 - t0) * j as f64 / (GRID_POINTS - 1) as f64;
            let resample = |tr: &SignalTrace| -> Vec<f64> {
                (0..GRID_POINTS).map(|j| tr.sample_at(grid_time(j))).collect()
            };
            LiftCycle {
                if_profile: resample(traces.interface_force),
                ra_profile: resample(traces.assistance),
                trunk_profile: resample(traces.trunk_angle),
                emg_profiles: traces
                    .emg
                    .iter()
                    .map(|(name, tr)| (name.clone(), resample(tr)))
                    .collect(),
                source_span_us: ((t0 * 1e6).round() as u64, (t1 * 1e6).round() as u64),
            }
        })
        .collect();

    Ok(CycleEnsemble { cycles, condition })
}

/// Gridwise mean and standard deviation across an ensemble's cycles.
pub fn ensemble_mean(ensemble: &CycleEnsemble) -> Result<(LiftCycle, LiftCycle), Error> {
    let cycles = &ensemble.cycles;
    if cycles.is_empty() {
        return Err(Error::InsufficientCycles("empty ensemble".into()));
    }
    let n = cycles.len() as f64;
    let mean_std = |pick: &dyn Fn(&LiftCycle) -> &Vec<f64>| -> (Vec<f64>, Vec<f64>) {
        let mut mean = vec![0.0; GRID_POINTS];
        let mut std = vec![0.0; GRID_POINTS];
        for c in cycles {
            for (j, v) in pick(c).iter().enumerate() {
                mean[j] += v / n;
            }
        }
        if cycles.len() > 1 {
            for c in cycles {
                for (j, v) in pick(c).iter().enumerate() {
                    std[j] += (v - mean[j]) * (v - mean[j]) / (n - 1.0);
                }
            }
            for s in &mut std {
                *s = s.sqrt();
            }
        }
        (mean, std)
    };

    let (if_m, if_s) = mean_std(&|c| &c.if_profile);
    let (ra_m, ra_s) = mean_std(&|c| &c.ra_profile);
    let (tr_m, tr_s) = mean_std(&|c| &c.trunk_profile);
    let mut emg_m = Vec::new();
    let mut emg_s = Vec::new();
    for (idx, (key, _)) in cycles[0].emg_profiles.iter().enumerate() {
        let (m, s) = mean_std(&move |c: &LiftCycle| &c.emg_profiles[idx].1);
        emg_m.push((key.clone(), m));
        emg_s.push((key.clone(), s));
    }

    let span = (
        cycles.iter().map(|c| c.source_span_us.0).min().unwrap(),
        cycles.iter().map(|c| c.source_span_us.1).max().unwrap(),
    );
    let mean = LiftCycle {
        if_profile: if_m,
        ra_profile: ra_m,
        trunk_profile: tr_m,
        emg_profiles: emg_m,
        source_span_us: span,
    };
    let std = LiftCycle {
        if_profile: if_s,
        ra_profile: ra_s,
        trunk_profile: tr_s,
        emg_profiles: emg_s,
        source_span_us: span,
    };
    Ok((mean, std))
}

/// CSV form of an ensemble: `cycle,grid_pct,if_N,ra,trunk_deg,<muscles...>`,
/// one row per cycle and grid point. Muscle columns keep profile order.
pub fn write_ensemble_csv(ensemble: &CycleEnsemble) -> String {
    let muscles: Vec<&str> = ensemble
        .cycles
        .first()
        .map(|c| c.emg_profiles.iter().map(|(m, _)| m.as_str()).collect())
        .unwrap_or_default();
    let mut out = String::from("cycle,grid_pct,if_N,ra,trunk_deg");
    for m in &muscles {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for (ci, c) in ensemble.cycles.iter().enumerate() {
        for j in 0..GRID_POINTS {
            out.push_str(&format!(
                "{},{},{:.9},{:.9},{:.9}",
                ci,
                LiftCycle::grid_pct(j),
                c.if_profile[j],
                c.ra_profile[j],
                c.trunk_profile[j]
            ));
            for (_, profile) in &c.emg_profiles {
                out.push_str(&format!(",{:.9}", profile[j]));
            }
            out.push('\n');
        }
    }
    out
}

/// Inverse of [`write_ensemble_csv`]. Source spans are not part of the CSV
/// contract; parsed cycles carry synthetic consecutive spans.
pub fn parse_ensemble_csv(text: &str, condition: TaskCondition) -> Result<CycleEnsemble, Error> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 5 || cols[..5] != ["cycle", "grid_pct", "if_N", "ra", "trunk_deg"] {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    let muscles: Vec<String> = cols[5..].iter().map(|s| s.to_string()).collect();

    let mut cycles: Vec<LiftCycle> = Vec::new();
    for (i, line) in lines {
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 + muscles.len() {
            return Err(err(format!(
                "expected {} fields, got {}",
                5 + muscles.len(),
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, Error> {
            s.parse().map_err(|_| err(format!("bad number {s:?}")))
        };
        let ci: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad cycle index {:?}", fields[0])))?;
        if ci == cycles.len() {
            cycles.push(LiftCycle {
                if_profile: Vec::with_capacity(GRID_POINTS),
                ra_profile: Vec::with_capacity(GRID_POINTS),
                trunk_profile: Vec::with_capacity(GRID_POINTS),
                emg_profiles: muscles
                    .iter()
                    .map(|m| (m.clone(), Vec::with_capacity(GRID_POINTS)))
                    .collect(),
                source_span_us: (ci as u64 * 1_000_000, (ci as u64 + 1) * 1_000_000),
            });
        } else if ci + 1 != cycles.len() {
            return Err(err(format!("cycle index {ci} out of order")));
        }
        let c = cycles.last_mut().unwrap();
        c.if_profile.push(parse(fields[2])?);
        c.ra_profile.push(parse(fields[3])?);
        c.trunk_profile.push(parse(fields[4])?);
        for (k, f) in fields[5..].iter().enumerate() {
            c.emg_profiles[k].1.push(parse(f)?);
        }
    }
    for (ci, c) in cycles.iter().enumerate() {
        if c.if_profile.len() != GRID_POINTS {
            return Err(Error::ShapeMismatch(format!(
                "cycle {ci} has {} grid points, expected {GRID_POINTS}",
                c.if_profile.len()
            )));
        }
    }
    Ok(CycleEnsemble { cycles, condition })
}
