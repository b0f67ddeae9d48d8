//! Pearson correlation with significance, strength banding, and the
//! ensemble-level assistance metrics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::cycles::{CycleEnsemble, TaskCondition};

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least 3 paired points, got {0}")]
    TooFew(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Sample Pearson product-moment correlation, single pass.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, Error> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} points",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::TooFew(x.len()));
    }
    let mut mx = 0.0;
    let mut my = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let k = (i + 1) as f64;
        let dx = xi - mx;
        let dy = yi - my;
        mx += dx / k;
        my += dy / k;
        sxx += dx * (xi - mx);
        syy += dy * (yi - my);
        sxy += dx * (yi - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput(
            "zero variance in at least one input".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// t statistic of a correlation under the null: `r sqrt((n-2)/(1-r^2))`.
pub fn t_statistic(r: f64, n: usize) -> f64 {
    r * ((n as f64 - 2.0) / (1.0 - r * r)).sqrt()
}

/// Two-tailed significance of a correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Significance {
    pub p: f64,
    /// Set when |r| = 1; the t transform diverges and p is reported as 0.
    pub exact_fit: bool,
}

/// Significance of `r` over `n` pairs via Student's t with n-2 degrees of
/// freedom, two-tailed.
pub fn pearson_p(r: f64, n: usize) -> Result<Significance, Error> {
    if n < 3 {
        return Err(Error::TooFew(n));
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::DegenerateInput(format!("r = {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok(Significance {
            p: 0.0,
            exact_fit: true,
        });
    }
    let t = t_statistic(r, n);
    let dist = StudentsT::new(0.0, 1.0, (n - 2) as f64)
        .expect("freedom >= 1 by the n >= 3 guard");
    Ok(Significance {
        p: 2.0 * dist.cdf(-t.abs()),
        exact_fit: false,
    })
}

/// Two-tailed permutation test on |r|: shuffles `y` and counts permutations
/// at least as extreme as the observed correlation. Uses the add-one
/// estimator, so the smallest reportable p is `1/(shuffles+1)`.
pub fn permutation_p(x: &[f64], y: &[f64], shuffles: usize, seed: u64) -> Result<f64, Error> {
    let observed = pearson_r(x, y)?.abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = y.to_vec();
    let mut at_least = 0usize;
    for _ in 0..shuffles {
        perm.shuffle(&mut rng);
        match pearson_r(x, &perm) {
            Ok(r) if r.abs() >= observed => at_least += 1,
            Ok(_) => {}
            // A shuffle cannot create variance that was not there.
            Err(e) => return Err(e),
        }
    }
    Ok((at_least + 1) as f64 / (shuffles + 1) as f64)
}

/// Correlation strength wording: weak below 0.2, moderate from 0.2, strong
/// from 0.5, on |r|.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Weak,
    Moderate,
    Strong,
}

impl Band {
    pub fn from_r(r: f64) -> Band {
        let a = r.abs();
        if a < 0.2 {
            Band::Weak
        } else if a < 0.5 {
            Band::Moderate
        } else {
            Band::Strong
        }
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Band::Weak => write!(f, "weak"),
            Band::Moderate => write!(f, "moderate"),
            Band::Strong => write!(f, "strong"),
        }
    }
}

/// Which signal pair a report describes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pair {
    IfVsRa,
    /// Interface force against the named muscle's normalized activation.
    IfVsEmg(String),
}

impl Pair {
    pub fn label(&self) -> &'static str {
        match self {
            Pair::IfVsRa => "IF_vs_RA",
            Pair::IfVsEmg(_) => "IF_vs_EMG",
        }
    }

    pub fn muscle(&self) -> &str {
        match self {
            Pair::IfVsRa => "",
            Pair::IfVsEmg(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub r: f64,
    pub p: f64,
    pub exact_fit: bool,
    pub n: usize,
    pub pair: Pair,
    pub condition: TaskCondition,
}

impl CorrelationReport {
    pub fn band(&self) -> Band {
        Band::from_r(self.r)
    }
}

/// Correlates a named pair over an ensemble. The paired series are the
/// concatenated gridded profiles of every cycle (10 cycles x 101 points in
/// the standard protocol), so cycle-to-cycle variation contributes.
pub fn correlate_ensemble(ensemble: &CycleEnsemble, pair: Pair) -> Result<CorrelationReport, Error> {
    if ensemble.cycles.is_empty() {
        return Err(Error::DegenerateInput("empty ensemble".into()));
    }
    let x: Vec<f64> = ensemble
        .cycles
        .iter()
        .flat_map(|c| c.if_profile.iter().copied())
        .collect();
    let y: Vec<f64> = match &pair {
        Pair::IfVsRa => ensemble
            .cycles
            .iter()
            .flat_map(|c| c.ra_profile.iter().copied())
            .collect(),
        Pair::IfVsEmg(muscle) => {
            let mut y = Vec::with_capacity(x.len());
            for c in &ensemble.cycles {
                let profile = c.emg(muscle).ok_or_else(|| {
                    Error::ShapeMismatch(format!(
                        "no muscle {muscle:?} in ensemble (have: {:?})",
                        c.emg_profiles.iter().map(|(m, _)| m).collect::<Vec<_>>()
                    ))
                })?;
                y.extend_from_slice(profile);
            }
            y
        }
    };
    let r = pearson_r(&x, &y)?;
    let sig = pearson_p(r, x.len())?;
    Ok(CorrelationReport {
        r,
        p: sig.p,
        exact_fit: sig.exact_fit,
        n: x.len(),
        pair,
        condition: ensemble.condition.clone(),
    })
}

/// CSV form: `subject,load,pair,muscle,r,p,n,band`.
pub fn write_report_csv(reports: &[CorrelationReport]) -> String {
    let mut out = String::from("subject,load,pair,muscle,r,p,n,band\n");
    for rep in reports {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6e},{},{}\n",
            rep.condition.subject,
            rep.condition.load_kg,
            rep.pair.label(),
            rep.pair.muscle(),
            rep.r,
            rep.p,
            rep.n,
            rep.band()
        ));
    }
    out
}

/// Inverse of [`write_report_csv`] (the band column is recomputed from r,
/// exact_fit from p = 0).
pub fn parse_report_csv(text: &str) -> Result<Vec<CorrelationReport>, Error> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "subject,load,pair,muscle,r,p,n,band")) => {}
        Some((_, h)) => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unexpected header {h:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut reports = Vec::new();
    for (i, line) in lines {
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(err(format!("expected 8 fields, got {}", f.len())));
        }
        let pair = match f[2] {
            "IF_vs_RA" => Pair::IfVsRa,
            "IF_vs_EMG" => Pair::IfVsEmg(f[3].to_string()),
            other => return Err(err(format!("unknown pair {other:?}"))),
        };
        let r: f64 = f[4].parse().map_err(|_| err(format!("bad r {:?}", f[4])))?;
        let p: f64 = f[5].parse().map_err(|_| err(format!("bad p {:?}", f[5])))?;
        let n: usize = f[6].parse().map_err(|_| err(format!("bad n {:?}", f[6])))?;
        let load_kg: f64 = f[1]
            .parse()
            .map_err(|_| err(format!("bad load {:?}", f[1])))?;
        reports.push(CorrelationReport {
            r,
            p,
            exact_fit: p == 0.0,
            n,
            pair,
            condition: TaskCondition::new(f[0], load_kg),
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{CycleEnsemble, LiftCycle, TaskCondition, GRID_POINTS};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn exact_linear_relations_hit_unit_r() {
        assert_eq!(pearson_r(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn degenerate_and_mismatched_inputs_error() {
        assert!(matches!(
            pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            pearson_r(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            pearson_r(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFew(2))
        ));
    }

    /// Textbook two-pass formula, kept deliberately separate from the
    /// single-pass implementation under test.
    fn two_pass_r(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn single_pass_matches_two_pass_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..1000 {
            let n = rng.gen_range(3..200);
            let scale = 10f64.powi(rng.gen_range(-3..4));
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
            let (Ok(r), want) = (pearson_r(&x, &y), two_pass_r(&x, &y)) else {
                continue;
            };
            assert!(
                (r - want).abs() < 1e-12,
                "trial {trial}: {r} vs {want}"
            );
        }
    }

    #[test]
    fn zero_correlation_has_unit_p() {
        // Orthogonal by construction.
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, -1.0, -1.0, 1.0];
        let r = pearson_r(&x, &y).unwrap();
        assert!(r.abs() < 1e-15);
        let sig = pearson_p(r, 4).unwrap();
        assert!((sig.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_transform_matches_algebra() {
        let t = t_statistic(0.5, 100);
        assert!((t - 5.715476066494083).abs() < 1e-12);
        let sig = pearson_p(0.5, 100).unwrap();
        assert!(sig.p > 8e-8 && sig.p < 2e-7, "p = {:e}", sig.p);
        assert!(!sig.exact_fit);
    }

    #[test]
    fn exact_fit_reports_zero_p() {
        let sig = pearson_p(1.0, 50).unwrap();
        assert_eq!(sig.p, 0.0);
        assert!(sig.exact_fit);
        let sig = pearson_p(-1.0, 50).unwrap();
        assert!(sig.exact_fit);
    }

    #[test]
    fn p_is_monotone_in_r_and_n() {
        let p = |r: f64, n: usize| pearson_p(r, n).unwrap().p;
        assert!(p(0.3, 100) < p(0.1, 100));
        assert!(p(0.5, 100) < p(0.3, 100));
        assert!(p(0.3, 200) < p(0.3, 100));
        assert!(p(0.3, 1010) < p(0.3, 200));
    }

    /// Builds a pair with an exact sample correlation via Gram-Schmidt.
    fn pair_with_exact_r(rho: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let standardize = |v: &[f64]| -> Vec<f64> {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s = (v.iter().map(|a| (a - m) * (a - m)).sum::<f64>()).sqrt();
            v.iter().map(|a| (a - m) / s).collect()
        };
        let xh = standardize(&x);
        let eh = standardize(&e);
        let dot: f64 = xh.iter().zip(&eh).map(|(a, b)| a * b).sum();
        let resid: Vec<f64> = eh.iter().zip(&xh).map(|(a, b)| a - dot * b).collect();
        let wh = standardize(&resid);
        let y: Vec<f64> = xh
            .iter()
            .zip(&wh)
            .map(|(a, b)| rho * a + (1.0 - rho * rho).sqrt() * b)
            .collect();
        (x, y)
    }

    #[test]
    fn t_p_and_permutation_p_agree_at_moderate_r() {
        let (x, y) = pair_with_exact_r(0.2, 100, 11);
        let r = pearson_r(&x, &y).unwrap();
        assert!((r - 0.2).abs() < 1e-9);
        let analytic = pearson_p(r, 100).unwrap().p;
        let permuted = permutation_p(&x, &y, 4000, 99).unwrap();
        let rel = (permuted - analytic).abs() / analytic;
        assert!(
            rel < 0.25,
            "analytic {analytic:.4e} vs permutation {permuted:.4e} (rel {rel:.2})"
        );
    }

    #[test]
    fn band_boundaries_follow_the_wording() {
        let cases = [
            (0.1, Band::Weak),
            (0.16, Band::Weak),
            (0.17, Band::Weak),
            (0.18, Band::Weak),
            (0.19999, Band::Weak),
            (0.2, Band::Moderate),
            (0.33, Band::Moderate),
            (0.49999, Band::Moderate),
            (0.5, Band::Strong),
            (0.58, Band::Strong),
            (0.61, Band::Strong),
            (0.78, Band::Strong),
            (0.80, Band::Strong),
            (-0.33, Band::Moderate),
        ];
        for (r, want) in cases {
            assert_eq!(Band::from_r(r), want, "r = {r}");
        }
    }

    fn affine_ensemble() -> CycleEnsemble {
        let base: Vec<f64> = (0..GRID_POINTS).map(|j| 100.0 + (j as f64 / 7.0).sin() * 40.0).collect();
        let cycles = (0..10)
            .map(|k| {
                let if_profile: Vec<f64> =
                    base.iter().map(|v| v + k as f64).collect();
                let ra_profile: Vec<f64> = if_profile.iter().map(|v| 2.0 * v + 3.0).collect();
                LiftCycle {
                    ra_profile,
                    trunk_profile: base.clone(),
                    emg_profiles: vec![(
                        "esl".to_string(),
                        if_profile.iter().map(|v| -0.5 * v + 1.0).collect(),
                    )],
                    if_profile,
                    source_span_us: (k * 10, k * 10 + 10),
                }
            })
            .collect();
        CycleEnsemble {
            cycles,
            condition: TaskCondition::new("s1", 10.0),
        }
    }

    #[test]
    fn affine_related_profiles_correlate_perfectly() {
        let ens = affine_ensemble();
        let rep = correlate_ensemble(&ens, Pair::IfVsRa).unwrap();
        assert_eq!(rep.n, 10 * GRID_POINTS);
        assert!((rep.r - 1.0).abs() < 1e-12);
        assert_eq!(rep.band(), Band::Strong);
        assert!(rep.exact_fit);

        let neg = correlate_ensemble(&ens, Pair::IfVsEmg("esl".into())).unwrap();
        assert!((neg.r + 1.0).abs() < 1e-12);

        assert!(matches!(
            correlate_ensemble(&ens, Pair::IfVsEmg("nope".into())),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn report_csv_round_trips_fixture_rows() {
        let fixture = [
            ("s1", 0.0, 0.80),
            ("s1", 10.0, 0.78),
            ("s2", 0.0, 0.61),
            ("s2", 10.0, 0.58),
        ];
        let reports: Vec<CorrelationReport> = fixture
            .iter()
            .map(|&(subject, load, r)| CorrelationReport {
                r,
                p: pearson_p(r, 1010).unwrap().p,
                exact_fit: false,
                n: 1010,
                pair: Pair::IfVsRa,
                condition: TaskCondition::new(subject, load),
            })
            .collect();
        let csv = write_report_csv(&reports);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "subject,load,pair,muscle,r,p,n,band");
        for (line, rep) in lines.zip(&reports) {
            assert!(line.ends_with(",strong"), "{line}");
            assert!(line.starts_with(&rep.condition.subject), "{line}");
        }
        let back = parse_report_csv(&csv).unwrap();
        assert_eq!(back.len(), 4);
        for (a, b) in back.iter().zip(&reports) {
            assert!((a.r - b.r).abs() < 1e-9);
            assert_eq!(a.band(), b.band());
            assert_eq!(a.condition.subject, b.condition.subject);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn r_is_affine_invariant_and_symmetric(
            seed in any::<u64>(),
            a in 0.01f64..50.0,
            b in -100.0f64..100.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(3..100);
            // An index ramp guarantees nonzero variance.
            let x: Vec<f64> = (0..n).map(|i| i as f64 + rng.gen_range(-0.4..0.4)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            prop_assume!(pearson_r(&x, &y).is_ok());

            let r = pearson_r(&x, &y).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson_r(&scaled, &y).unwrap() - r).abs() < 1e-12);
            let flipped: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
            prop_assert!((pearson_r(&flipped, &y).unwrap() + r).abs() < 1e-12);
            prop_assert!((pearson_r(&y, &x).unwrap() - r).abs() < 1e-12);
        }
    }
}
