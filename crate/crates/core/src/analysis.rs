//! Robustness slopes over quality trajectories, win/loss breakdowns, and
//! report emission.
//!
//! A trajectory holds the clean corpus score plus one corpus score per
//! noise level. The robustness slope is a least-squares line through the
//! origin fitted to the *declines* `d_i = score(p_i) − clean`, so no
//! intercept exists by construction and the implicit `(0, 0)` anchor is
//! irrelevant to the fit. The slope reads as metric points lost if every
//! token were corrupted; flatter (closer to zero) is more robust.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::corpus::ScoreFile;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::svg::{LineChart, Series};

/// One corpus-level measurement at noise level `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityPoint {
    pub p: f64,
    pub score: f64,
}

/// Quality measurements for one (system, metric, noise type) family.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub system: String,
    pub metric: String,
    /// Family label for reports (a noise type id, or any run label).
    pub noise_type: String,
    pub clean_score: f64,
    points: Vec<QualityPoint>,
}

impl Trajectory {
    /// Points must have `p ∈ (0, 1]`, finite scores, and distinct levels;
    /// they are stored sorted by `p`.
    pub fn new(
        system: impl Into<String>,
        metric: impl Into<String>,
        noise_type: impl Into<String>,
        clean_score: f64,
        mut points: Vec<QualityPoint>,
    ) -> Result<Self> {
        if !clean_score.is_finite() {
            return Err(Error::InvalidParam("non-finite clean score".into()));
        }
        for pt in &points {
            if !pt.p.is_finite() || pt.p <= 0.0 || pt.p > 1.0 {
                return Err(Error::InvalidParam(format!(
                    "trajectory point p={} outside (0, 1]",
                    pt.p
                )));
            }
            if !pt.score.is_finite() {
                return Err(Error::InvalidParam(format!("non-finite score at p={}", pt.p)));
            }
        }
        points.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap());
        for pair in points.windows(2) {
            if pair[0].p == pair[1].p {
                return Err(Error::InvalidParam(format!("duplicate noise level p={}", pair[0].p)));
            }
        }
        Ok(Trajectory {
            system: system.into(),
            metric: metric.into(),
            noise_type: noise_type.into(),
            clean_score,
            points,
        })
    }

    pub fn points(&self) -> &[QualityPoint] {
        &self.points
    }

    /// `(p, score − clean)` pairs the slope is fitted to.
    pub fn declines(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|pt| (pt.p, pt.score - self.clean_score)).collect()
    }
}

/// A through-origin least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    /// Metric points per unit noise proportion (usually negative).
    pub slope: f64,
    pub n_points: usize,
    /// Residual sum of squares of the fit.
    pub rss: f64,
}

/// Fits `d ≈ slope · p` by least squares on raw `(p, d)` pairs:
/// `slope = Σ p·d / Σ p²`. Points with `p = 0, d = 0` contribute nothing,
/// so including the origin anchor does not change the result.
pub fn fit_decline_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.is_empty() {
        return Err(Error::InvalidParam("slope fit needs at least one point".into()));
    }
    let mut pd = 0.0;
    let mut pp = 0.0;
    for &(p, d) in points {
        if !p.is_finite() || !d.is_finite() {
            return Err(Error::InvalidParam("non-finite point in slope fit".into()));
        }
        pd += p * d;
        pp += p * p;
    }
    if pp == 0.0 {
        return Err(Error::InvalidParam("all noise levels are zero; slope undefined".into()));
    }
    let slope = pd / pp;
    let rss = points.iter().map(|&(p, d)| (d - slope * p).powi(2)).sum();
    Ok(SlopeFit { slope, n_points: points.len(), rss })
}

/// Robustness slope of a trajectory (fit on declines relative to clean).
pub fn fit_slope(trajectory: &Trajectory) -> Result<SlopeFit> {
    fit_decline_slope(&trajectory.declines())
}

/// Builds a trajectory from per-segment score files: the corpus score per
/// level is the fixed-order mean. All runs must cover identical segments.
pub fn build_trajectory(
    system: impl Into<String>,
    metric: impl Into<String>,
    noise_type: impl Into<String>,
    clean: &ScoreFile,
    ladder: &[(f64, ScoreFile)],
) -> Result<Trajectory> {
    for (p, run) in ladder {
        if !clean.same_indices(run) {
            return Err(Error::IndexMismatch(format!(
                "run at p={p} covers different segments than the clean run"
            )));
        }
    }
    let points = ladder
        .iter()
        .map(|(p, run)| Ok(QualityPoint { p: *p, score: run.mean()? }))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(system, metric, noise_type, clean.mean()?, points)
}

/// Sentence-level improvement/harm fractions at one noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinLossBreakdown {
    pub p: f64,
    /// Fraction with `challenger − baseline > ε`.
    pub improved: f64,
    /// Fraction with `baseline − challenger > ε`.
    pub harmed: f64,
    pub tied: f64,
    pub n_segments: usize,
}

/// Compares two per-segment score vectors. `tie_epsilon` is the band
/// (default 0 at call sites) within which segments count as tied.
pub fn win_loss(
    p: f64,
    baseline: &ScoreFile,
    challenger: &ScoreFile,
    tie_epsilon: f64,
) -> Result<WinLossBreakdown> {
    if tie_epsilon < 0.0 || !tie_epsilon.is_finite() {
        return Err(Error::InvalidParam(format!("tie epsilon {tie_epsilon} must be ≥ 0")));
    }
    if !baseline.same_indices(challenger) {
        return Err(Error::IndexMismatch(
            "win/loss inputs cover different segments".into(),
        ));
    }
    if baseline.is_empty() {
        return Err(Error::EmptyCorpus("win/loss over zero segments".into()));
    }
    let n = baseline.len();
    let mut improved = 0usize;
    let mut harmed = 0usize;
    for ((_, base), (_, chal)) in baseline.rows().iter().zip(challenger.rows()) {
        if chal - base > tie_epsilon {
            improved += 1;
        } else if base - chal > tie_epsilon {
            harmed += 1;
        }
    }
    let tied = n - improved - harmed;
    Ok(WinLossBreakdown {
        p,
        improved: improved as f64 / n as f64,
        harmed: harmed as f64 / n as f64,
        tied: tied as f64 / n as f64,
        n_segments: n,
    })
}

// ---------------------------------------------------------------------------
// Reports.

/// One fitted trajectory, ready for the report.
#[derive(Debug, Clone)]
pub struct ReportEntry {
    pub trajectory: Trajectory,
    pub fit: SlopeFit,
}

pub const REPORT_CSV_HEADER: &str = "system,metric,noise_type,clean,slope,n_points,rss";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders the slope report: one row per system × metric × noise type.
pub fn render_report_csv(entries: &[ReportEntry]) -> String {
    let mut rows: Vec<&ReportEntry> = entries.iter().collect();
    rows.sort_by(|a, b| {
        (&a.trajectory.system, &a.trajectory.metric, &a.trajectory.noise_type).cmp(&(
            &b.trajectory.system,
            &b.trajectory.metric,
            &b.trajectory.noise_type,
        ))
    });
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for entry in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_field(&entry.trajectory.system),
            csv_field(&entry.trajectory.metric),
            csv_field(&entry.trajectory.noise_type),
            entry.trajectory.clean_score,
            entry.fit.slope,
            entry.fit.n_points,
            entry.fit.rss,
        ));
    }
    out
}

pub const WINLOSS_CSV_HEADER: &str = "label,p,improved,harmed,tied,n_segments";

/// Renders win/loss breakdowns, one row per (label, p).
pub fn render_winloss_csv(breakdowns: &[(String, WinLossBreakdown)]) -> String {
    let mut rows: Vec<&(String, WinLossBreakdown)> = breakdowns.iter().collect();
    rows.sort_by(|a, b| (&a.0, a.1.p).partial_cmp(&(&b.0, b.1.p)).unwrap());
    let mut out = String::from(WINLOSS_CSV_HEADER);
    out.push('\n');
    for (label, b) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(label),
            b.p,
            b.improved,
            b.harmed,
            b.tied,
            b.n_segments
        ));
    }
    out
}

/// Writes `robustness.csv`, one SVG per (metric, noise type) family with a
/// series per system, and `winloss.csv` when breakdowns are given. Returns
/// the written paths. Output is deterministic.
pub fn emit_report(
    out_dir: &Path,
    entries: &[ReportEntry],
    breakdowns: &[(String, WinLossBreakdown)],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();

    let csv_path = out_dir.join("robustness.csv");
    fsutil::write_atomic(&csv_path, render_report_csv(entries).as_bytes())?;
    written.push(csv_path);

    let mut families: BTreeMap<(String, String), Vec<&ReportEntry>> = BTreeMap::new();
    for entry in entries {
        families
            .entry((entry.trajectory.metric.clone(), entry.trajectory.noise_type.clone()))
            .or_default()
            .push(entry);
    }
    for ((metric, noise_type), mut members) in families {
        members.sort_by(|a, b| a.trajectory.system.cmp(&b.trajectory.system));
        let series = members
            .iter()
            .map(|entry| {
                let mut points = vec![(0.0, entry.trajectory.clean_score)];
                points.extend(entry.trajectory.points().iter().map(|pt| (pt.p, pt.score)));
                Series {
                    label: format!("{} (slope {:.2})", entry.trajectory.system, entry.fit.slope),
                    points,
                }
            })
            .collect();
        let chart = LineChart {
            title: format!("{metric} under {noise_type} noise"),
            x_label: "proportion of noised tokens".into(),
            y_label: metric.clone(),
            series,
        };
        let file = out_dir.join(format!("{}-{}.svg", sanitize(&metric), sanitize(&noise_type)));
        fsutil::write_atomic(&file, chart.render().as_bytes())?;
        written.push(file);
    }

    if !breakdowns.is_empty() {
        let path = out_dir.join("winloss.csv");
        fsutil::write_atomic(&path, render_winloss_csv(breakdowns).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_trajectory(slope: f64) -> Trajectory {
        let points = (1..=10)
            .map(|i| {
                let p = i as f64 / 10.0;
                QualityPoint { p, score: 90.0 + slope * p }
            })
            .collect();
        Trajectory::new("sys", "chrf", "swap", 90.0, points).unwrap()
    }

    #[test]
    fn exact_linear_fixture_recovers_slope() {
        let fit = fit_slope(&linear_trajectory(-20.0)).unwrap();
        assert_eq!(fit.slope, -20.0);
        assert_eq!(fit.n_points, 10);
        assert!(fit.rss < 1e-22);
    }

    #[test]
    fn matches_closed_form_two_point_case() {
        // {(0.1, −1), (0.2, −3)}: slope = (−0.1 − 0.6) / (0.01 + 0.04) = −14.
        let fit = fit_decline_slope(&[(0.1, -1.0), (0.2, -3.0)]).unwrap();
        assert!((fit.slope - -14.0).abs() < 1e-12, "{}", fit.slope);
    }

    #[test]
    fn single_point_is_degenerate_ratio() {
        let fit = fit_decline_slope(&[(1.0, -72.97)]).unwrap();
        assert_eq!(fit.slope, -72.97);
        assert_eq!(fit.rss, 0.0);
    }

    #[test]
    fn origin_inclusion_is_irrelevant() {
        let without = fit_decline_slope(&[(0.3, -5.0), (0.7, -9.0)]).unwrap();
        let with = fit_decline_slope(&[(0.0, 0.0), (0.3, -5.0), (0.7, -9.0)]).unwrap();
        assert_eq!(without.slope, with.slope);
        assert_eq!(without.rss, with.rss);
    }

    #[test]
    fn zero_decline_gives_zero_slope() {
        let fit = fit_decline_slope(&[(0.1, 0.0), (0.5, 0.0), (1.0, 0.0)]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.rss, 0.0);
    }

    #[test]
    fn rejects_degenerate_fits() {
        assert!(fit_decline_slope(&[]).is_err());
        assert!(fit_decline_slope(&[(0.0, -1.0)]).is_err());
    }

    #[test]
    fn trajectory_validation_and_sorting() {
        let pts = vec![
            QualityPoint { p: 0.9, score: 10.0 },
            QualityPoint { p: 0.1, score: 80.0 },
        ];
        let t = Trajectory::new("s", "m", "swap", 90.0, pts).unwrap();
        assert_eq!(t.points()[0].p, 0.1);
        assert!(Trajectory::new("s", "m", "swap", 90.0, vec![
            QualityPoint { p: 0.2, score: 1.0 },
            QualityPoint { p: 0.2, score: 2.0 },
        ])
        .is_err());
        assert!(Trajectory::new("s", "m", "swap", 90.0, vec![QualityPoint { p: 0.0, score: 1.0 }])
            .is_err());
        // permuted input order yields an identical trajectory
        let a = Trajectory::new("s", "m", "swap", 1.0, vec![
            QualityPoint { p: 0.1, score: 1.0 },
            QualityPoint { p: 0.2, score: 2.0 },
        ])
        .unwrap();
        let b = Trajectory::new("s", "m", "swap", 1.0, vec![
            QualityPoint { p: 0.2, score: 2.0 },
            QualityPoint { p: 0.1, score: 1.0 },
        ])
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn build_trajectory_from_score_files() {
        let clean = ScoreFile::new("s", "m", vec![(0, 1.0), (1, 0.8)]).unwrap();
        let ladder = vec![
            (0.5, ScoreFile::new("s", "m", vec![(0, 0.6), (1, 0.4)]).unwrap()),
            (0.1, ScoreFile::new("s", "m", vec![(0, 0.9), (1, 0.7)]).unwrap()),
        ];
        let t = build_trajectory("s", "m", "drop", &clean, &ladder).unwrap();
        assert_eq!(t.clean_score, 0.9);
        assert_eq!(t.points()[0], QualityPoint { p: 0.1, score: 0.8 });
        assert_eq!(t.points()[1], QualityPoint { p: 0.5, score: 0.5 });

        let misaligned = vec![(0.5, ScoreFile::new("s", "m", vec![(0, 0.6), (2, 0.4)]).unwrap())];
        assert!(build_trajectory("s", "m", "drop", &clean, &misaligned).is_err());
        // empty ladder → trajectory with zero points
        let t = build_trajectory("s", "m", "drop", &clean, &[]).unwrap();
        assert!(t.points().is_empty());
    }

    #[test]
    fn win_loss_counts() {
        let base = ScoreFile::new("a", "m", vec![(0, 1.0), (1, 2.0), (2, 3.0)]).unwrap();
        let same = win_loss(0.3, &base, &base, 0.0).unwrap();
        assert_eq!((same.improved, same.harmed, same.tied), (0.0, 0.0, 1.0));

        let better = ScoreFile::new("b", "m", vec![(0, 2.0), (1, 3.0), (2, 4.0)]).unwrap();
        let all_up = win_loss(0.3, &base, &better, 0.0).unwrap();
        assert_eq!((all_up.improved, all_up.harmed, all_up.tied), (1.0, 0.0, 0.0));

        let mixed = ScoreFile::new("b", "m", vec![(0, 2.0), (1, 1.0), (2, 3.0)]).unwrap();
        let w = win_loss(0.3, &base, &mixed, 0.0).unwrap();
        assert!((w.improved + w.harmed + w.tied - 1.0).abs() < 1e-12);
        assert_eq!(w.n_segments, 3);

        // epsilon band turns small gaps into ties
        let w = win_loss(0.3, &base, &better, 1.5).unwrap();
        assert_eq!(w.tied, 1.0);

        assert!(win_loss(0.3, &base, &better, -0.1).is_err());
    }

    #[test]
    fn report_csv_shape() {
        assert_eq!(render_report_csv(&[]), format!("{REPORT_CSV_HEADER}\n"));
        let entries = vec![
            ReportEntry { trajectory: linear_trajectory(-20.0), fit: SlopeFit { slope: -20.0, n_points: 10, rss: 0.0 } },
            ReportEntry {
                trajectory: Trajectory::new("another", "chrf", "swap", 88.0, vec![]).unwrap(),
                fit: SlopeFit { slope: -1.5, n_points: 1, rss: 0.25 },
            },
        ];
        let csv = render_report_csv(&entries);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "another,chrf,swap,88,-1.5,1,0.25");
        assert_eq!(lines[2], "sys,chrf,swap,90,-20,10,0");
    }

    #[test]
    fn emit_report_writes_deterministic_files() {
        let dir = tempfile::tempdir().unwrap();
        let entries = vec![ReportEntry {
            trajectory: linear_trajectory(-12.5),
            fit: fit_slope(&linear_trajectory(-12.5)).unwrap(),
        }];
        let wl = vec![("sys".to_string(), WinLossBreakdown {
            p: 0.5,
            improved: 0.25,
            harmed: 0.25,
            tied: 0.5,
            n_segments: 4,
        })];
        let first = emit_report(dir.path(), &entries, &wl).unwrap();
        let bytes: Vec<Vec<u8>> =
            first.iter().map(|p| std::fs::read(p).unwrap()).collect();
        let second = emit_report(dir.path(), &entries, &wl).unwrap();
        assert_eq!(first, second);
        for (path, expect) in second.iter().zip(&bytes) {
            assert_eq!(&std::fs::read(path).unwrap(), expect);
        }
        assert!(first.iter().any(|p| p.file_name().unwrap() == "chrf-swap.svg"));
        assert!(first.iter().any(|p| p.file_name().unwrap() == "winloss.csv"));
    }
}
