//! `exoeval process`: conversion, DSP, and segmentation over one session
//! directory, producing the normalized-cycle ensemble CSV.
//!
//! Wire-format parameters (zero offset, full scale) come from the session's
//! own manifest so artifacts stay interpretable when the analysis config
//! changes; filter, MVC, and segmentation parameters come from the active
//! toolkit config.

use anyhow::{ensure, Context, Result};
use exoeval_core::bus::{self, PolledRecord};
use exoeval_core::cycles::{self, SessionTraces};
use exoeval_core::dsp;
use exoeval_core::loadcell::Condition;
use exoeval_core::synth::{self, GroundTruth};
use exoeval_core::{SignalTrace, Unit};
use std::path::{Path, PathBuf};

use crate::config::ToolkitConfig;
use crate::manifest::Manifest;

pub struct ProcessOutcome {
    pub peaks: usize,
    pub impacts: usize,
    pub cycles: usize,
    pub ensemble_csv: PathBuf,
}

pub fn run(cfg: &ToolkitConfig, session: &Path, jobs: usize, out: &Path) -> Result<ProcessOutcome> {
    ensure!(jobs >= 1, "--jobs must be at least 1");
    let manifest = Manifest::load(&session.join("manifest.toml"))?;
    let truth_path = session.join("truth.json");
    let truth: GroundTruth = serde_json::from_str(
        &std::fs::read_to_string(&truth_path)
            .with_context(|| format!("reading {}", truth_path.display()))?,
    )
    .with_context(|| format!("parsing {}", truth_path.display()))?;

    let serial_path = session.join("serial.log");
    let serial = std::fs::read_to_string(&serial_path)
        .with_context(|| format!("reading {}", serial_path.display()))?;
    let records = bus::parse_serial_log(&serial)
        .with_context(|| format!("parsing {}", serial_path.display()))?;
    ensure!(!records.is_empty(), "{}: no records", serial_path.display());

    let rate = cfg.acquisition.poll_rate_hz;
    let column = |pick: &dyn Fn(&PolledRecord) -> f64, unit: Unit, label: &str| {
        SignalTrace::new(records.iter().map(pick).collect(), rate, unit, label)
    };
    let left = column(&|r| r.left_counts as f64, Unit::Counts, "left counts");
    let right = column(&|r| r.right_counts as f64, Unit::Counts, "right counts");
    let cell = manifest.device.load_cell(Condition::WithCushion)?;
    let interface_force = dsp::build_interface_force(&left, &right, &cell, &cell)
        .context("converting cuff counts to force")?;
    let trunk = column(&|r| r.trunk_angle_deg(), Unit::Degree, "trunk angle");

    let emg_path = session.join("emg.csv");
    let block = exoeval_core::emgfile::parse(
        &std::fs::read_to_string(&emg_path)
            .with_context(|| format!("reading {}", emg_path.display()))?,
    )
    .with_context(|| format!("parsing {}", emg_path.display()))?;

    let band = cfg.filter.bandpass();
    let window = cfg.filter.envelope_window_s;
    let channels = [
        (&block.esl_l, cfg.mvc.esl_l),
        (&block.esl_r, cfg.mvc.esl_r),
        (&block.esi_l, cfg.mvc.esi_l),
        (&block.esi_r, cfg.mvc.esi_r),
    ];
    let envelopes: Vec<SignalTrace> = if jobs > 1 {
        // One worker per channel; join order keeps output deterministic.
        std::thread::scope(|scope| {
            let handles: Vec<_> = channels
                .iter()
                .map(|(tr, mvc)| {
                    let band = &band;
                    scope.spawn(move || dsp::emg_envelope(tr, band, window, *mvc))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("envelope worker panicked"))
                .collect::<Result<_, _>>()
        })
        .context("conditioning EMG")?
    } else {
        channels
            .iter()
            .map(|(tr, mvc)| dsp::emg_envelope(tr, &band, window, *mvc))
            .collect::<Result<_, _>>()
            .context("conditioning EMG")?
    };
    let esl = dsp::average_bilateral(&envelopes[0], &envelopes[1])?;
    let esi = dsp::average_bilateral(&envelopes[2], &envelopes[3])?;

    let magnitude = cycles::accel_magnitude(&block.box_ax, &block.box_ay, &block.box_az)?;
    let impacts = cycles::detect_box_impacts(&magnitude);

    let seg = &cfg.segmentation;
    let peaks = cycles::detect_trunk_peaks(&trunk, seg.cadence_cpm)?;
    let assistance = synth::assistance_trace(&truth.spec, rate);
    let traces = SessionTraces {
        interface_force: &interface_force,
        assistance: &assistance,
        trunk_angle: &trunk,
        emg: vec![("esl".into(), &esl), ("esi".into(), &esi)],
    };
    let ensemble = cycles::extract_cycles(
        &peaks,
        &traces,
        seg.cadence_cpm,
        seg.gate(),
        truth.condition.clone(),
        seg.cycles_per_condition,
    )?;

    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let csv_path = out.join("ensemble.csv");
    std::fs::write(&csv_path, cycles::write_ensemble_csv(&ensemble))
        .with_context(|| format!("writing {}", csv_path.display()))?;

    let outcome = ProcessOutcome {
        peaks: peaks.len(),
        impacts: impacts.len(),
        cycles: ensemble.cycles.len(),
        ensemble_csv: csv_path,
    };
    println!(
        "{}: {} trunk peaks, {} box impacts, {} cycles -> {}",
        session.display(),
        outcome.peaks,
        outcome.impacts,
        outcome.cycles,
        outcome.ensemble_csv.display()
    );
    Ok(outcome)
}
