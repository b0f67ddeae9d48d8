//! `exoeval simulate`: render a synthetic session to its artifact
//! directory: manifest.toml, serial.log, emg.csv, truth.json.

use anyhow::{Context, Result};
use exoeval_core::loadcell::Condition;
use exoeval_core::synth::{self, SessionSpec};
use std::path::{Path, PathBuf};

use crate::config::ToolkitConfig;
use crate::manifest::Manifest;

pub struct SimulateOutcome {
    pub dir: PathBuf,
    pub serial_records: usize,
    pub cycles: usize,
}

pub fn run(
    cfg: &ToolkitConfig,
    spec_path: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
) -> Result<SimulateOutcome> {
    let mut spec = match spec_path {
        None => SessionSpec::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading session spec {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing session spec {}", p.display()))?
        }
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }

    let cell = cfg.device.load_cell(Condition::WithCushion)?;
    let artifacts = synth::run_session(&spec, cell)?;
    let manifest = Manifest::new(spec, cfg.device.clone());

    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let write = |name: &str, contents: &str| -> Result<()> {
        let path = out.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    };
    write("manifest.toml", &manifest.to_toml()?)?;
    write("serial.log", &artifacts.serial_log)?;
    write("emg.csv", &artifacts.emg_csv)?;
    let truth_json =
        serde_json::to_string_pretty(&artifacts.truth).context("serializing ground truth")?;
    write("truth.json", &format!("{truth_json}\n"))?;

    let outcome = SimulateOutcome {
        dir: out.to_path_buf(),
        serial_records: artifacts.serial_log.lines().count(),
        cycles: artifacts.truth.peak_times_s.len(),
    };
    println!(
        "simulated {} s session ({} cycles, seed {}): {} serial records -> {}",
        manifest.session.duration_s,
        outcome.cycles,
        manifest.seed,
        outcome.serial_records,
        out.display()
    );
    Ok(outcome)
}
