//! Rendering of saved results as CSV tables and minimal SVG charts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{Dimension, Evaluation, StratifiedReport, StratumKey, ThresholdSweepResult};
use crate::error::{Error, Result};
use crate::metrics::{fmt_coef, MetricsReport};

/// Any result the command line writes as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedReport {
    Evaluate(Evaluation),
    Sweep(ThresholdSweepResult),
    Strata(StratifiedReport),
}

impl SavedReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialize(format!("not a saved report: {e}")))
    }
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(header).map_err(ser)?;
    for row in rows {
        w.write_record(row).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

/// System × metric table, one row per evaluation.
pub fn evaluations_csv(evals: &[Evaluation]) -> Result<String> {
    let rows: Vec<_> = evals
        .iter()
        .map(|e| e.metrics.csv_row(&e.system, &format!("skipped={}", e.recordings_skipped)))
        .collect();
    csv_string(&MetricsReport::CSV_HEADER, &rows)
}

/// Two columns, threshold and kappa (or MCC for an MCC sweep).
pub fn sweep_csv(sweep: &ThresholdSweepResult) -> Result<String> {
    let column = match sweep.objective {
        crate::analysis::Objective::Kappa => "kappa",
        crate::analysis::Objective::Mcc => "mcc",
    };
    let rows: Vec<_> = sweep
        .points
        .iter()
        .map(|p| {
            let v = match sweep.objective {
                crate::analysis::Objective::Kappa => p.kappa,
                crate::analysis::Objective::Mcc => p.mcc,
            };
            vec![p.threshold.to_string(), v.map_or_else(|| "null".into(), |x| format!("{x:.6}"))]
        })
        .collect();
    csv_string(&["threshold", column], &rows)
}

/// One row per stratum, including empty ones.
pub fn strata_csv(report: &StratifiedReport) -> Result<String> {
    let header = [
        "system", "dimension", "stratum", "words", "kappa", "mcc", "ca_pct", "cr_pct", "fa_pct", "fr_pct",
    ];
    let dim = dimension_name(report.dimension);
    let mut rows = Vec::new();
    for s in &report.strata {
        let mut row = vec![report.system.clone(), dim.into(), s.key.value().into(), s.words.to_string()];
        match &s.metrics {
            Some(m) => row.extend(m.csv_row("", "")[1..7].iter().cloned()),
            None => row.extend(std::iter::repeat_n("null".to_string(), 6)),
        }
        rows.push(row);
    }
    let mut all = vec![report.system.clone(), dim.into(), "all".into(), report.overall.words.to_string()];
    all.extend(report.overall.csv_row("", "")[1..7].iter().cloned());
    rows.push(all);
    csv_string(&header, &rows)
}

/// System × stratum table: kappa per stratum, then MCC per stratum.
pub fn strata_wide_csv(reports: &[StratifiedReport]) -> Result<String> {
    let Some(first) = reports.first() else {
        return csv_string(&["system"], &[]);
    };
    if reports.iter().any(|r| r.dimension != first.dimension) {
        return Err(Error::InvalidArgument("stratified reports mix dimensions".into()));
    }
    let keys = StratumKey::all(first.dimension);
    let mut header = vec!["system".to_string()];
    header.extend(keys.iter().map(|k| format!("kappa_{}", k.value())));
    header.extend(keys.iter().map(|k| format!("mcc_{}", k.value())));
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let metric = |k: &StratumKey, f: fn(&MetricsReport) -> Option<f64>| {
                fmt_coef(r.stratum(*k).and_then(|s| s.metrics.as_ref()).and_then(f))
            };
            let mut row = vec![r.system.clone()];
            row.extend(keys.iter().map(|k| metric(k, |m| m.kappa)));
            row.extend(keys.iter().map(|k| metric(k, |m| m.mcc)));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_string(&header, &rows)
}

fn dimension_name(d: Dimension) -> &'static str {
    match d {
        Dimension::Task => "task",
        Dimension::WordCategory => "word_category",
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, y_lo: f64, y_hi: f64, x_label: &str, y_label: &str) {
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2.0, MARGIN);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for (v, y) in [(y_lo, y0), (y_hi, y1)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{v:.2}</text>"#,
            x0 - 4.0,
            y + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="11" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

/// Line chart of `(x, y)` points; undefined values break the line.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, points: &[(f64, Option<f64>)], mark: Option<f64>) -> String {
    let defined: Vec<f64> = points.iter().filter_map(|p| p.1).collect();
    let y_lo = defined.iter().copied().fold(0.0f64, f64::min).min(0.0);
    let y_hi = defined.iter().copied().fold(1.0f64, f64::max);
    let x_lo = points.first().map_or(0.0, |p| p.0);
    let x_hi = points.last().map_or(1.0, |p| p.0).max(x_lo + 1e-9);
    let px = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 1.5 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut s = svg_open(title);
    axes(&mut s, y_lo, y_hi, x_label, y_label);
    let mut segment: Vec<String> = Vec::new();
    let flush = |seg: &mut Vec<String>, s: &mut String| {
        if seg.len() > 1 {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#, seg.join(" "));
        }
        seg.clear();
    };
    for &(x, y) in points {
        match y {
            Some(y) => segment.push(format!("{:.2},{:.2}", px(x), py(y))),
            None => flush(&mut segment, &mut s),
        }
    }
    flush(&mut segment, &mut s);
    if let Some(m) = mark {
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="firebrick" stroke-dasharray="4 3"/>"#,
            MARGIN,
            HEIGHT - MARGIN,
            x = px(m)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" fill="firebrick">{m}</text>"#,
            px(m) + 3.0,
            MARGIN + 10.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped bar chart; each group holds `(series, value)` bars.
/// A labelled group of bars; `None` values are drawn as gaps.
pub type BarGroup = (String, Vec<(String, Option<f64>)>);

pub fn bar_chart_svg(title: &str, groups: &[BarGroup]) -> String {
    let values: Vec<f64> = groups.iter().flat_map(|g| g.1.iter().filter_map(|b| b.1)).collect();
    let y_lo = values.iter().copied().fold(0.0f64, f64::min);
    let y_hi = values.iter().copied().fold(1.0f64, f64::max);
    let py = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);
    let palette = ["steelblue", "darkorange", "seagreen", "firebrick"];

    let mut s = svg_open(title);
    axes(&mut s, y_lo, y_hi, "", "");
    let slot = (WIDTH - 1.5 * MARGIN) / groups.len().max(1) as f64;
    for (gi, (label, bars)) in groups.iter().enumerate() {
        let bar_w = slot * 0.8 / bars.len().max(1) as f64;
        let gx = MARGIN + gi as f64 * slot + slot * 0.1;
        for (bi, (_, v)) in bars.iter().enumerate() {
            let Some(v) = v else { continue };
            let (top, base) = (py(v.max(0.0)), py(v.min(0.0)));
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                gx + bi as f64 * bar_w,
                bar_w,
                base - top,
                palette[bi % palette.len()]
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            gx + slot * 0.4,
            HEIGHT - MARGIN + 14.0,
            escape(label)
        );
    }
    if let Some((_, bars)) = groups.first() {
        for (bi, (series, _)) in bars.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" fill="{}">{}</text>"#,
                WIDTH - 120.0,
                44.0 + 12.0 * bi as f64,
                palette[bi % palette.len()],
                escape(series)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn sweep_svg(sweep: &ThresholdSweepResult) -> String {
    let (label, pick): (&str, fn(&crate::analysis::SweepPoint) -> Option<f64>) = match sweep.objective {
        crate::analysis::Objective::Kappa => ("kappa", |p| p.kappa),
        crate::analysis::Objective::Mcc => ("mcc", |p| p.mcc),
    };
    let points: Vec<_> = sweep.points.iter().map(|p| (p.threshold, pick(p))).collect();
    line_chart_svg(&format!("{label} by threshold"), "threshold", label, &points, Some(sweep.best_threshold))
}

pub fn evaluations_svg(evals: &[Evaluation]) -> String {
    let groups: Vec<_> = evals
        .iter()
        .map(|e| {
            (
                e.system.clone(),
                vec![("kappa".to_string(), e.metrics.kappa), ("mcc".to_string(), e.metrics.mcc)],
            )
        })
        .collect();
    bar_chart_svg("agreement with human judgment", &groups)
}

pub fn strata_svg(report: &StratifiedReport) -> String {
    let groups: Vec<_> = report
        .strata
        .iter()
        .map(|s| {
            let m = s.metrics.as_ref();
            (
                s.key.value().to_string(),
                vec![
                    ("kappa".to_string(), m.and_then(|m| m.kappa)),
                    ("mcc".to_string(), m.and_then(|m| m.mcc)),
                ],
            )
        })
        .collect();
    bar_chart_svg(&format!("{} by {}", report.system, dimension_name(report.dimension)), &groups)
}
