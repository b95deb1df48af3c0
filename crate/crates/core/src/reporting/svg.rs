//! Minimal static SVG charts: grouped bars and lines with error bars.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{scheme_label, SchemeSummary};
use crate::error::{QaoaError, Result};
use crate::experiments::{RunRecord, SchemeKind};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Points of one series keyed by scheme.
type BySchemeLayers = BTreeMap<(SchemeKind, Vec<usize>), Vec<(f64, f64, f64)>>;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub(crate) struct Series {
    pub name: String,
    /// `(x, y, error)`; for bar charts `x` is the category index.
    pub points: Vec<(f64, f64, f64)>,
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Padded `[lo, hi]` containing every `y ± err`.
pub(crate) fn y_range(series: &[Series]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(_, y, e) in series.iter().flat_map(|s| &s.points) {
        lo = lo.min(y - e);
        hi = hi.max(y + e);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = if hi > lo { hi - lo } else { hi.abs().max(1.0) };
    (lo - 0.08 * span, hi + 0.08 * span)
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn open(out: &mut String, title: &str, y_label: &str, x_label: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text transform="translate(20 {}) rotate(-90)" text-anchor="middle">{}</text>
"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        escape(title),
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 15.0,
        escape(x_label),
        (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
        escape(y_label),
    );
}

fn y_axis(out: &mut String, f: &Frame) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    for t in nice_ticks(f.y_lo, f.y_hi, 6) {
        let y = f.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x0}" x2="{x1}" y1="{y:.2}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let bottom = HEIGHT - MARGIN_BOTTOM;
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" x2="{x0}" y1="{MARGIN_TOP}" y2="{bottom}" stroke="black"/><line x1="{x0}" x2="{x1}" y1="{bottom}" y2="{bottom}" stroke="black"/>"#
    );
}

fn legend(out: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 18.0 * i as f64;
        let x = WIDTH - MARGIN_RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y,
            PALETTE[i % PALETTE.len()],
            x + 18.0,
            y + 10.0,
            escape(&s.name)
        );
    }
}

pub(crate) fn bar_chart(title: &str, y_label: &str, x_label: &str, categories: &[String], series: &[Series]) -> String {
    let (y_lo, y_hi) = y_range(series);
    let f = Frame { x_lo: 0.0, x_hi: categories.len().max(1) as f64, y_lo, y_hi };
    let mut out = String::new();
    open(&mut out, title, y_label, x_label);
    y_axis(&mut out, &f);
    let slot = f.px(1.0) - f.px(0.0);
    let bar = 0.8 * slot / series.len().max(1) as f64;
    for (c, name) in categories.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            f.px(c as f64 + 0.5),
            HEIGHT - MARGIN_BOTTOM + 16.0,
            escape(name)
        );
    }
    let base = f.py(y_lo);
    for (i, s) in series.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="series" data-name="{}" fill="{}">"#, escape(&s.name), PALETTE[i % PALETTE.len()]);
        for &(x, y, _) in &s.points {
            let left = f.px(x) + 0.1 * slot + bar * i as f64;
            let top = f.py(y);
            let _ = writeln!(
                out,
                r#"<rect class="mark" x="{left:.2}" y="{top:.2}" width="{bar:.2}" height="{:.2}"/>"#,
                base - top
            );
        }
        out.push_str("</g>\n");
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

pub(crate) fn line_chart(title: &str, y_label: &str, x_label: &str, series: &[Series]) -> String {
    let (y_lo, y_hi) = y_range(series);
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let (mut x_lo, mut x_hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    let pad = if x_hi > x_lo { 0.05 * (x_hi - x_lo) } else { 1.0 };
    let f = Frame { x_lo: x_lo - pad, x_hi: x_hi + pad, y_lo, y_hi };

    let mut out = String::new();
    open(&mut out, title, y_label, x_label);
    y_axis(&mut out, &f);
    let distinct: BTreeSet<u64> = xs.iter().map(|x| x.to_bits()).collect();
    for x in distinct.into_iter().map(f64::from_bits) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            f.px(x),
            HEIGHT - MARGIN_BOTTOM + 16.0,
            tick_label(x)
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(out, r#"<g class="series" data-name="{}" stroke="{color}" fill="{color}">"#, escape(&s.name));
        let path: Vec<String> = s.points.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" points="{}"/>"#, path.join(" "));
        for &(x, y, e) in &s.points {
            let (cx, cy) = (f.px(x), f.py(y));
            let _ = writeln!(
                out,
                r#"<line x1="{cx:.2}" x2="{cx:.2}" y1="{:.2}" y2="{:.2}"/><circle class="mark" cx="{cx:.2}" cy="{cy:.2}" r="3.5"/>"#,
                f.py(y - e),
                f.py(y + e)
            );
        }
        out.push_str("</g>\n");
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

/// Writes per-seed ratio bar charts (one per donor and acceptor size) and
/// the three size-sweep line charts: mean ratio, mean iterations and mean
/// `delta_r / tau`, each with one-standard-deviation error bars.
pub fn render_figures(
    summaries: &[SchemeSummary],
    records: &[RunRecord],
    output_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = output_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| QaoaError::io(dir, e))?;
    let mut written = Vec::new();
    let mut emit = |name: String, svg: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| QaoaError::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    // Per-seed bars, grouped by (donor, n).
    let mut panels: BTreeMap<(u64, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        panels.entry((r.donor_seed, r.acceptor_n)).or_default().push(r);
    }
    for ((donor, n), recs) in panels {
        let seeds: BTreeSet<u64> = recs.iter().map(|r| r.acceptor_seed).collect();
        let seed_index: BTreeMap<u64, usize> = seeds.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut by_scheme = BySchemeLayers::new();
        for r in &recs {
            by_scheme
                .entry((r.scheme, r.free_layers.clone()))
                .or_default()
                .push((seed_index[&r.acceptor_seed] as f64, r.r_final, 0.0));
        }
        let series: Vec<Series> = by_scheme
            .into_iter()
            .map(|((kind, layers), mut points)| {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series { name: scheme_label(kind, &layers), points }
            })
            .collect();
        let categories: Vec<String> = seeds.iter().map(u64::to_string).collect();
        let title = format!("Approximation ratio per acceptor, n = {n}, donor seed {donor}");
        emit(
            format!("ratio_per_seed_n{n}_donor{donor}.svg"),
            bar_chart(&title, "r", "acceptor seed", &categories, &series),
        )?;
    }

    // Size sweeps.
    type Pick = fn(&SchemeSummary) -> Option<(f64, f64)>;
    let sweeps: [(&str, &str, &str, Pick); 3] = [
        ("sweep_mean_r.svg", "Mean approximation ratio", "mean r", |s| Some((s.mean_r, s.std_r))),
        ("sweep_mean_tau.svg", "Mean optimisation iterations", "mean tau", |s| Some((s.mean_tau, s.std_tau))),
        ("sweep_mean_dr_over_tau.svg", "Mean delta r / tau", "mean delta r / tau", |s| {
            s.mean_dr_over_tau.zip(s.std_dr_over_tau)
        }),
    ];
    for (file, title, y_label, pick) in sweeps {
        let mut by_scheme = BySchemeLayers::new();
        for s in summaries {
            match pick(s) {
                Some((m, sd)) => by_scheme
                    .entry((s.scheme, s.free_layers.clone()))
                    .or_default()
                    .push((s.n_nodes as f64, m, sd)),
                None => log::info!("{file}: no value for {} at n = {}, series omitted", s.label(), s.n_nodes),
            }
        }
        let series: Vec<Series> = by_scheme
            .into_iter()
            .map(|((kind, layers), points)| Series { name: scheme_label(kind, &layers), points })
            .collect();
        emit(file.to_string(), line_chart(title, y_label, "number of nodes", &series))?;
    }
    Ok(written)
}
