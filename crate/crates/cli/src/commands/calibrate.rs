//! `exoeval calibrate`: static-weight verification of the counts-to-newtons
//! model, written as a per-load CSV.

use anyhow::{Context, Result};
use exoeval_core::loadcell::{run_verification, CalibrationRecord, Condition};
use exoeval_core::synth::StaticWeightSource;
use std::path::Path;

use crate::config::ToolkitConfig;

#[allow(clippy::too_many_arguments)]
pub fn run(
    cfg: &ToolkitConfig,
    weights_kg: &[f64],
    trials: usize,
    trial_s: f64,
    noise_counts: f64,
    condition: Condition,
    seed: u64,
    out: &Path,
) -> Result<CalibrationRecord> {
    let cell = cfg.device.load_cell(condition)?;
    let mut source = StaticWeightSource::new(cell, noise_counts, seed);
    let record = run_verification(
        &cell,
        weights_kg,
        trials,
        trial_s,
        cfg.acquisition.poll_rate_hz,
        &mut source,
    )?;

    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let path = out.join("calibration.csv");
    std::fs::write(&path, record.to_csv())
        .with_context(|| format!("writing {}", path.display()))?;

    for row in &record.per_load {
        println!(
            "{:>5.1} kg: {:8.3} N mean, {:6.3} N std, {:+.3} % error",
            row.load_mass_kg, row.mean_force_n, row.std_force_n, row.error_percent
        );
    }
    println!("calibration ({condition}) -> {}", path.display());
    Ok(record)
}
