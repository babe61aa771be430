//! Sweep reports: `sweep.csv`, `sweep_k.csv`, `summary.json` and an SVG
//! chart of accuracy against window size.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::SweepResult;
use crate::error::{Error, Result};
use crate::fsutil;

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_K_CSV: &str = "sweep_k.csv";
pub const SWEEP_SVG: &str = "sweep.svg";
pub const SUMMARY_JSON: &str = "summary.json";

pub const SWEEP_CSV_HEADER: &str = "window_seconds,accuracy,tn,fa,fn,ta,seconds_elapsed";

/// Inclusive window-size band over which the headline mean is taken.
pub const PLATEAU_BAND: (f64, f64) = (2.0, 10.0);
pub const LATE_BAND: (f64, f64) = (11.0, 20.0);

/// Mean accuracy over records whose window lies in `band` (inclusive).
pub fn band_mean(points: &[(f64, f64)], band: (f64, f64)) -> Option<f64> {
    let inside: Vec<f64> = points
        .iter()
        .filter(|(w, _)| *w >= band.0 && *w <= band.1)
        .map(|(_, a)| *a)
        .collect();
    (!inside.is_empty()).then(|| inside.iter().sum::<f64>() / inside.len() as f64)
}

/// `(window, accuracy)` of the best point; ties go to the smallest window.
pub fn peak(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    points.iter().fold(None, |best, &(w, a)| match best {
        Some((_, ba)) if a <= ba => best,
        _ => Some((w, a)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub k: usize,
    pub mean_accuracy_2_to_10: Option<f64>,
    pub mean_accuracy_11_to_20: Option<f64>,
    pub peak_window_seconds: f64,
    pub peak_accuracy: f64,
}

impl CurveSummary {
    fn from_points(k: usize, points: &[(f64, f64)]) -> Option<Self> {
        let (peak_window_seconds, peak_accuracy) = peak(points)?;
        Some(CurveSummary {
            k,
            mean_accuracy_2_to_10: band_mean(points, PLATEAU_BAND),
            mean_accuracy_11_to_20: band_mean(points, LATE_BAND),
            peak_window_seconds,
            peak_accuracy,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub num_records: usize,
    pub samples_evaluated: usize,
    /// Curve for the configured k.
    pub primary: CurveSummary,
    /// One curve per evaluated k, including the configured one.
    pub k_sweep: Vec<CurveSummary>,
}

pub fn summarize_sweep(result: &SweepResult) -> Result<Summary> {
    let first = result
        .records
        .first()
        .ok_or_else(|| Error::Domain("sweep result has no records".into()))?;
    let primary_points: Vec<(f64, f64)> = result
        .records
        .iter()
        .map(|r| (r.window_seconds, r.eval.accuracy))
        .collect();
    let k = result.config.knn.k;
    let primary = CurveSummary::from_points(k, &primary_points).expect("non-empty");
    let k_sweep = first
        .k_accuracies
        .iter()
        .filter_map(|ka| {
            let points: Vec<(f64, f64)> = result
                .records
                .iter()
                .filter_map(|r| {
                    r.k_accuracies
                        .iter()
                        .find(|x| x.k == ka.k)
                        .map(|x| (r.window_seconds, x.accuracy))
                })
                .collect();
            CurveSummary::from_points(ka.k, &points)
        })
        .collect();
    Ok(Summary {
        num_records: result.records.len(),
        samples_evaluated: first.samples_evaluated,
        primary,
        k_sweep,
    })
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &result.records {
        let c = &r.eval.confusion;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.window_seconds,
            r.eval.accuracy,
            c.true_normal,
            c.false_abnormal,
            c.false_normal,
            c.true_abnormal,
            r.seconds_elapsed
        );
    }
    out
}

pub fn sweep_k_csv(result: &SweepResult) -> String {
    let mut out = String::from("window_seconds,k,accuracy\n");
    for r in &result.records {
        for ka in &r.k_accuracies {
            let _ = writeln!(out, "{},{},{}", r.window_seconds, ka.k, ka.accuracy);
        }
    }
    out
}

/// One parsed `sweep.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCsvRow {
    pub window_seconds: f64,
    pub accuracy: f64,
    pub tn: usize,
    pub fa: usize,
    pub fn_: usize,
    pub ta: usize,
    pub seconds_elapsed: f64,
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepCsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_CSV_HEADER) {
        return Err(Error::Domain("sweep.csv header mismatch".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |m: String| Error::Domain(format!("sweep.csv line {}: {m}", i + 2));
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 7 {
                return Err(bad(format!("expected 7 columns, found {}", cells.len())));
            }
            let f = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            let u = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
            Ok(SweepCsvRow {
                window_seconds: f(cells[0])?,
                accuracy: f(cells[1])?,
                tn: u(cells[2])?,
                fa: u(cells[3])?,
                fn_: u(cells[4])?,
                ta: u(cells[5])?,
                seconds_elapsed: f(cells[6])?,
            })
        })
        .collect()
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

fn nice_step(span: f64) -> f64 {
    let raw = span / 10.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Line chart of accuracy (%) against window size (s). The y axis always
/// spans 0-100%; the x axis is linear from 0 to the largest window.
pub fn render_svg(points: &[(f64, f64)], title: &str) -> String {
    let x_max = points
        .iter()
        .map(|p| p.0)
        .fold(0.0, f64::max)
        .max(1.0)
        .ceil();
    let step = nice_step(x_max);
    let x_max = (x_max / step).ceil() * step;
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let sx = |w: f64| MARGIN_L + w / x_max * plot_w;
    let sy = |acc: f64| MARGIN_T + (1.0 - acc) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        SVG_W / 2.0,
        xml_escape(title)
    );

    for pct in (0..=100).step_by(20) {
        let y = sy(pct as f64 / 100.0);
        let _ = writeln!(
            s,
            r##"<line class="grid" x1="{MARGIN_L:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text class="y-tick" x="{:.1}" y="{:.1}" text-anchor="end">{pct}%</text>"#,
            MARGIN_L - 6.0,
            y + 4.0
        );
    }
    let mut tick = 0.0;
    while tick <= x_max + 1e-9 {
        let x = sx(tick);
        let _ = writeln!(
            s,
            r#"<text class="x-tick" x="{x:.1}" y="{:.1}" text-anchor="middle">{tick}</text>"#,
            MARGIN_T + plot_h + 16.0
        );
        tick += step;
    }
    let _ = writeln!(
        s,
        r#"<path class="axes" d="M{MARGIN_L:.1},{MARGIN_T:.1} V{:.1} H{:.1}" fill="none" stroke="black"/>"#,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w
    );
    let _ = writeln!(
        s,
        r#"<text class="x-label" x="{:.1}" y="{:.1}" text-anchor="middle">Window size (s)</text>"#,
        MARGIN_L + plot_w / 2.0,
        SVG_H - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text class="y-label" x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">Accuracy (%)</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    let coords: Vec<String> = points
        .iter()
        .map(|&(w, a)| format!("{:.2},{:.2}", sx(w), sy(a)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline class="curve" points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        coords.join(" ")
    );
    for &(w, a) in points {
        let _ = writeln!(
            s,
            r##"<circle class="point" cx="{:.2}" cy="{:.2}" r="3.5" fill="#1f77b4"><title>{w} s: {:.2}%</title></circle>"##,
            sx(w),
            sy(a),
            a * 100.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes every report file into `out_dir` and returns their paths.
pub fn emit_report(result: &SweepResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let summary = summarize_sweep(result)?;
    fsutil::create_dir_all(out_dir)?;
    let points: Vec<(f64, f64)> = result
        .records
        .iter()
        .map(|r| (r.window_seconds, r.eval.accuracy))
        .collect();
    let title = format!(
        "LOOCV accuracy vs window size (k = {})",
        result.config.knn.k
    );
    let files = [
        (SWEEP_CSV, sweep_csv(result)),
        (SWEEP_K_CSV, sweep_k_csv(result)),
        (SWEEP_SVG, render_svg(&points, &title)),
        (
            SUMMARY_JSON,
            serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
        ),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = out_dir.join(name);
        fsutil::write_atomic(&path, body.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
