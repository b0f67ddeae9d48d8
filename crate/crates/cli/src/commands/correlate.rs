//! `exoeval correlate`: assistance metrics over one ensemble CSV. The
//! condition tag (subject, load) is protocol metadata supplied by the
//! caller; it labels report rows and never influences the statistics.

use anyhow::{Context, Result};
use exoeval_core::cycles::{self, TaskCondition};
use exoeval_core::stats::{self, CorrelationReport, Pair};
use std::path::Path;

use crate::config::ToolkitConfig;

pub fn run(
    _cfg: &ToolkitConfig,
    ensemble_csv: &Path,
    subject: &str,
    load_kg: f64,
    out: &Path,
) -> Result<Vec<CorrelationReport>> {
    let text = std::fs::read_to_string(ensemble_csv)
        .with_context(|| format!("reading {}", ensemble_csv.display()))?;
    let ensemble = cycles::parse_ensemble_csv(&text, TaskCondition::new(subject, load_kg))
        .with_context(|| format!("parsing {}", ensemble_csv.display()))?;

    let mut pairs = vec![Pair::IfVsRa];
    if let Some(first) = ensemble.cycles.first() {
        pairs.extend(
            first
                .emg_profiles
                .iter()
                .map(|(muscle, _)| Pair::IfVsEmg(muscle.clone())),
        );
    }
    let reports: Vec<CorrelationReport> = pairs
        .into_iter()
        .map(|pair| stats::correlate_ensemble(&ensemble, pair))
        .collect::<Result<_, _>>()?;

    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let path = out.join("report.csv");
    std::fs::write(&path, stats::write_report_csv(&reports))
        .with_context(|| format!("writing {}", path.display()))?;

    for rep in &reports {
        let muscle = rep.pair.muscle();
        println!(
            "{}{}{}: r = {:+.3}, p = {:.3e}, n = {}, {}",
            rep.pair.label(),
            if muscle.is_empty() { "" } else { " " },
            muscle,
            rep.r,
            rep.p,
            rep.n,
            rep.band()
        );
    }
    println!("report -> {}", path.display());
    Ok(reports)
}
