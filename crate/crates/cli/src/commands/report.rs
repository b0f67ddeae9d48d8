//! `exoeval report`: human-readable summary table over one or more report
//! CSVs, plus optional plot-data panels (mean and std profiles against the
//! cycle grid) from an ensemble CSV: assistance, interface force, and ESL
//! activation.

use anyhow::{bail, Context, Result};
use exoeval_core::cycles::{self, LiftCycle, TaskCondition};
use exoeval_core::stats::{self, CorrelationReport};
use std::path::Path;

pub fn run(report_csvs: &[impl AsRef<Path>], ensemble_csv: Option<&Path>, out: &Path) -> Result<String> {
    let mut rows: Vec<CorrelationReport> = Vec::new();
    for path in report_csvs {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        rows.extend(
            stats::parse_report_csv(&text)
                .with_context(|| format!("parsing {}", path.display()))?,
        );
    }

    let table = format_table(&rows);
    print!("{table}");

    if let Some(path) = ensemble_csv {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        // The condition tag does not enter the profile statistics.
        let ensemble = cycles::parse_ensemble_csv(&text, TaskCondition::new("-", 0.0))
            .with_context(|| format!("parsing {}", path.display()))?;
        let (mean, std) = cycles::ensemble_mean(&ensemble)?;

        std::fs::create_dir_all(out)
            .with_context(|| format!("creating output directory {}", out.display()))?;
        write_panel(out, "panel_ra.csv", &mean.ra_profile, &std.ra_profile)?;
        write_panel(out, "panel_if.csv", &mean.if_profile, &std.if_profile)?;
        let (esl_mean, esl_std) = match (mean.emg("esl"), std.emg("esl")) {
            (Some(m), Some(s)) => (m, s),
            _ => bail!(
                "{}: no esl column for the activation panel",
                path.display()
            ),
        };
        write_panel(out, "panel_esl.csv", esl_mean, esl_std)?;
        println!(
            "plot data -> {}/panel_ra.csv, panel_if.csv, panel_esl.csv",
            out.display()
        );
    }
    Ok(table)
}

fn format_table(rows: &[CorrelationReport]) -> String {
    let mut out = format!(
        "{:<10} {:>7} {:<10} {:<8} {:>7} {:>10} {:>6} {:<8}\n",
        "subject", "load_kg", "pair", "muscle", "r", "p", "n", "band"
    );
    for rep in rows {
        let muscle = if rep.pair.muscle().is_empty() {
            "-"
        } else {
            rep.pair.muscle()
        };
        out.push_str(&format!(
            "{:<10} {:>7} {:<10} {:<8} {:>7.3} {:>10.3e} {:>6} {:<8}\n",
            rep.condition.subject,
            rep.condition.load_kg,
            rep.pair.label(),
            muscle,
            rep.r,
            rep.p,
            rep.n,
            rep.band().to_string()
        ));
    }
    out
}

fn write_panel(out: &Path, name: &str, mean: &[f64], std: &[f64]) -> Result<()> {
    let mut csv = String::from("grid_pct,mean,std\n");
    for j in 0..mean.len() {
        csv.push_str(&format!(
            "{},{:.6},{:.6}\n",
            LiftCycle::grid_pct(j),
            mean[j],
            std[j]
        ));
    }
    let path = out.join(name);
    std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))
}
