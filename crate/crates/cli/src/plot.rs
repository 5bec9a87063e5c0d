//! Static SVG charts of per-episode metrics.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use sbpg_core::trainer::{aggregate, read_trace_csv, EpisodeSummary, WindowRecord};

use crate::run::{CliError, CliResult, MANIFEST_FILE, TRACE_FILE};

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub struct Series {
    pub name: String,
    pub episodes: Vec<EpisodeSummary>,
}

struct Metric {
    file: &'static str,
    title: &'static str,
    unit: &'static str,
    get: fn(&EpisodeSummary) -> f64,
}

const METRICS: [Metric; 4] = [
    Metric { file: "demand", title: "Demand fulfillment", unit: "fraction", get: |s| s.demand_fulfillment },
    Metric { file: "overflow", title: "Overflow", unit: "L", get: |s| s.overflow },
    Metric { file: "power", title: "Mean power", unit: "W", get: |s| s.mean_power },
    Metric { file: "potential", title: "Mean potential", unit: "", get: |s| s.mean_potential },
];

/// Splits a trace into episodes in file order and summarizes each.
pub fn summarize(trace: &[WindowRecord]) -> Vec<EpisodeSummary> {
    trace
        .chunk_by(|a, b| a.episode == b.episode && a.eval == b.eval)
        .map(|chunk| aggregate(chunk[0].episode, chunk[0].eval, chunk))
        .collect()
}

fn series_name(dir: &Path) -> String {
    fs::read_to_string(dir.join(MANIFEST_FILE))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| v.get("variant").and_then(|v| v.as_str()).map(String::from))
        .unwrap_or_else(|| dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into()))
}

fn metric_dirs(path: &Path) -> CliResult<Vec<PathBuf>> {
    if path.join(TRACE_FILE).is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = fs::read_dir(path)
        .map_err(|e| CliError::Runtime(format!("cannot read metrics directory {}: {e}", path.display())))?;
    let mut dirs: Vec<PathBuf> =
        entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.join(TRACE_FILE).is_file()).collect();
    dirs.sort();
    Ok(dirs)
}

pub fn load_series(paths: &[PathBuf]) -> CliResult<Vec<Series>> {
    let mut out = Vec::new();
    for path in paths {
        for dir in metric_dirs(path)? {
            let file = dir.join(TRACE_FILE);
            let trace = read_trace_csv(File::open(&file)?)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", file.display())))?;
            if trace.is_empty() {
                return Err(CliError::Runtime(format!("{}: no metrics rows", file.display())));
            }
            out.push(Series { name: series_name(&dir), episodes: summarize(&trace) });
        }
    }
    if out.is_empty() {
        return Err(CliError::Runtime("no metrics found".into()));
    }
    Ok(out)
}

pub fn plot(paths: &[PathBuf], out: &Path) -> CliResult<Vec<PathBuf>> {
    let series = load_series(paths)?;
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for m in &METRICS {
        let path = out.join(format!("{}.svg", m.file));
        fs::write(&path, line_chart(m, &series))?;
        written.push(path);
    }
    if series.len() > 1 {
        let path = out.join("comparison.svg");
        fs::write(&path, bar_chart(&series))?;
        written.push(path);
    }
    for p in &written {
        println!("{}", p.display());
    }
    Ok(written)
}

fn range(values: impl Iterator<Item = f64>, include_zero: bool) -> (f64, f64) {
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if include_zero {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (if include_zero && lo == 0.0 { 0.0 } else { lo - pad }, hi + pad)
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(svg: &mut String, title: &str, unit: &str, (lo, hi): (f64, f64)) -> impl Fn(f64) -> f64 {
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        LEFT + pw / 2.0,
        esc(title)
    );
    let y = move |v: f64| TOP + ph * (1.0 - (v - lo) / (hi - lo));
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y(v) + 4.0,
            label(v),
            y = y(v)
        );
    }
    if !unit.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            esc(unit)
        );
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    y
}

fn legend(svg: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 18.0,
            y,
            esc(name)
        );
    }
}

fn line_chart(m: &Metric, series: &[Series]) -> String {
    let mut svg = String::new();
    let yr = range(series.iter().flat_map(|s| s.episodes.iter().map(m.get)), false);
    let y = header(&mut svg, &format!("{} per episode", m.title), m.unit, yr);
    let n = series.iter().map(|s| s.episodes.len()).max().unwrap_or(1).max(2);
    let pw = W - LEFT - RIGHT;
    let x = |i: usize| LEFT + pw * i as f64 / (n - 1) as f64;

    let longest = series.iter().max_by_key(|s| s.episodes.len()).expect("at least one series");
    for (i, e) in longest.episodes.iter().enumerate() {
        let text = if e.eval { "eval".to_string() } else { (e.episode + 1).to_string() };
        let _ =
            writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">{text}</text>"#, x(i), H - BOTTOM + 18.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">episode</text>"#, LEFT + pw / 2.0, H - 10.0);

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> =
            s.episodes.iter().enumerate().map(|(i, e)| format!("{:.2},{:.2}", x(i), y((m.get)(e)))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        for p in &pts {
            let (px, py) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(svg, r#"<circle cx="{px}" cy="{py}" r="3" fill="{color}"/>"#);
        }
    }
    let names: Vec<&str> = series.iter().map(|s| s.name.as_str()).collect();
    legend(&mut svg, &names);
    svg.push_str("</svg>\n");
    svg
}

/// One panel per metric with a bar per series, from the last episode of
/// each series (the evaluation episode when present).
fn bar_chart(series: &[Series]) -> String {
    let panel_w = 220.0;
    let width = 40.0 + panel_w * METRICS.len() as f64;
    let (top, ph) = (50.0, 220.0);
    let height = top + ph + 70.0;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">
<rect width="{width}" height="{height}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">Evaluation episode by variant</text>
"#,
        width / 2.0
    );
    for (j, m) in METRICS.iter().enumerate() {
        let x0 = 40.0 + panel_w * j as f64 + 30.0;
        let inner = panel_w - 50.0;
        let values: Vec<f64> = series.iter().map(|s| s.episodes.last().map_or(0.0, m.get)).collect();
        let (lo, hi) = range(values.iter().copied(), true);
        let y = |v: f64| top + ph * (1.0 - (v - lo) / (hi - lo));
        let title = if m.unit.is_empty() { m.title.to_string() } else { format!("{} ({})", m.title, m.unit) };
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{}" text-anchor="middle">{}</text><line x1="{x0}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#444"/>"##,
            x0 + inner / 2.0,
            top - 10.0,
            esc(&title),
            x0 + inner,
            y(0.0),
            y(0.0)
        );
        let bw = inner / values.len() as f64;
        for (k, v) in values.iter().enumerate() {
            let (a, b) = (y(*v).min(y(0.0)), y(*v).max(y(0.0)));
            let bx = x0 + bw * k as f64 + bw * 0.1;
            let _ = writeln!(
                svg,
                r#"<rect x="{bx:.2}" y="{a:.2}" width="{:.2}" height="{:.2}" fill="{}"/><text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                bw * 0.8,
                (b - a).max(0.5),
                PALETTE[k % PALETTE.len()],
                bx + bw * 0.4,
                a - 4.0,
                label(*v)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                bx + bw * 0.4,
                top + ph + 18.0,
                esc(&series[k].name)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
