//! Vector plots of convergence and sweep CSVs.
//!
//! Each input `<stem>.csv` yields `<stem>.svg`, the plotted points in
//! `<stem>.dat` (one gnuplot data block per series) and `<stem>.gp`, a gnuplot
//! script that redraws the figure from the data file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::ExperimentError;
use crate::experiment::{CONVERGENCE_HEADER, SWEEP_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Convergence,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct PlotOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn schema_error(path: &Path, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Schema { path: path.display().to_string(), message: message.into() }
}

fn io_error(path: &Path, source: std::io::Error) -> ExperimentError {
    ExperimentError::Io { path: path.display().to_string(), source }
}

fn read_rows(path: &Path) -> Result<(CsvKind, Vec<csv::StringRecord>), ExperimentError> {
    let file = std::fs::File::open(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let kind = if header == CONVERGENCE_HEADER {
        CsvKind::Convergence
    } else if header == SWEEP_HEADER {
        CsvKind::Sweep
    } else {
        return Err(schema_error(path, format!("unrecognized header {header:?}")));
    };
    let rows = reader.records().collect::<Result<Vec<_>, _>>()?;
    Ok((kind, rows))
}

fn field<T: std::str::FromStr>(path: &Path, row: &csv::StringRecord, i: usize) -> Result<T, ExperimentError> {
    let text = row.get(i).ok_or_else(|| schema_error(path, format!("row {row:?} lacks column {i}")))?;
    text.parse()
        .map_err(|_| schema_error(path, format!("cannot parse `{text}` in column {i}")))
}

/// Mean trace per budget; shorter traces are held at their final value.
fn convergence_figure(path: &Path, rows: &[csv::StringRecord]) -> Result<Figure, ExperimentError> {
    // budget label -> trial -> trace
    let mut traces: BTreeMap<String, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    let mut order: Vec<(f64, String)> = Vec::new();
    for row in rows {
        let pmax: f64 = field(path, row, 0)?;
        let trial: u64 = field(path, row, 1)?;
        let iteration: usize = field(path, row, 2)?;
        let objective: f64 = field(path, row, 3)?;
        let key = row[0].to_string();
        if !order.iter().any(|(_, k)| *k == key) {
            order.push((pmax, key.clone()));
        }
        let trace = traces.entry(key).or_default().entry(trial).or_default();
        if iteration != trace.len() {
            return Err(schema_error(path, format!("trial {trial} iteration {iteration} out of sequence")));
        }
        trace.push(objective);
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let series = order
        .into_iter()
        .map(|(pmax, key)| {
            let trials = &traces[&key];
            let len = trials.values().map(Vec::len).max().unwrap_or(0);
            let points = (0..len)
                .map(|i| {
                    let sum: f64 = trials.values().map(|t| t[i.min(t.len() - 1)]).sum();
                    (i as f64, sum / trials.len() as f64)
                })
                .collect();
            Series { label: format!("P_max = {} dBm", trim(pmax)), points }
        })
        .collect();
    Ok(Figure {
        title: "SCA convergence".into(),
        x_label: "iteration".into(),
        y_label: "sum of log secrecy rates".into(),
        series,
    })
}

/// Mean objective over feasible trials per scheme and threshold.
fn sweep_figure(path: &Path, rows: &[csv::StringRecord]) -> Result<Figure, ExperimentError> {
    let mut acc: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        let varpi: f64 = field(path, row, 0)?;
        let feasible: bool = field(path, row, 3)?;
        let objective: f64 = field(path, row, 4)?;
        let scheme = row[2].to_string();
        let entry = acc.entry(scheme).or_default();
        if feasible && objective.is_finite() {
            entry.push((varpi, objective));
        }
    }
    let series = acc
        .into_iter()
        .map(|(label, samples)| {
            let mut by_x: Vec<(f64, f64, usize)> = Vec::new();
            for (x, y) in samples {
                match by_x.iter_mut().find(|p| p.0 == x) {
                    Some(p) => {
                        p.1 += y;
                        p.2 += 1;
                    }
                    None => by_x.push((x, y, 1)),
                }
            }
            by_x.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label, points: by_x.into_iter().map(|(x, s, n)| (x, s / n as f64)).collect() }
        })
        .collect();
    Ok(Figure {
        title: "Harvesting threshold sweep".into(),
        x_label: "varpi (mW)".into(),
        y_label: "mean sum of log secrecy rates".into(),
        series,
    })
}

fn trim(x: f64) -> String {
    let s = format!("{x:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Up to about six round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(fig: &Figure) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 50.0;
    let points = || fig.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = range(points().map(|p| p.0));
    let (y0, y1) = range(points().map(|p| p.1));
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(&fig.title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    for t in ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, H - BOTTOM, H - BOTTOM + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, H - BOTTOM + 18.0, trim(t));
    }
    for t in ticks(y0, y1) {
        let y = py(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, trim(t));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (LEFT + W - RIGHT) / 2.0, H - 12.0, escape(&fig.x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        escape(&fig.y_label)
    );
    for (i, series) in fig.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        for &(x, y) in &series.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx = W - RIGHT - 150.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Data blocks separated by two blank lines, addressable with `index i`.
pub fn render_data(fig: &Figure) -> String {
    let mut s = String::new();
    for (i, series) in fig.series.iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# {}", series.label);
        for &(x, y) in &series.points {
            let _ = writeln!(s, "{x:.14e} {y:.14e}");
        }
    }
    s
}

pub fn render_gnuplot(fig: &Figure, data_file: &str, svg_file: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set terminal svg size 640,420");
    let _ = writeln!(s, "set output '{svg_file}'");
    let _ = writeln!(s, "set title \"{}\"", fig.title);
    let _ = writeln!(s, "set xlabel \"{}\"", fig.x_label);
    let _ = writeln!(s, "set ylabel \"{}\"", fig.y_label);
    let _ = writeln!(s, "set key bottom right");
    let _ = writeln!(s, "set grid");
    if fig.series.is_empty() {
        let _ = writeln!(s, "set xrange [0:1]\nset yrange [0:1]\nplot NaN notitle");
        return s;
    }
    let plots: Vec<String> = fig
        .series
        .iter()
        .enumerate()
        .map(|(i, series)| format!("'{data_file}' index {i} using 1:2 with linespoints title \"{}\"", series.label))
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

pub fn figure_from_csv(path: &Path) -> Result<(CsvKind, Figure), ExperimentError> {
    let (kind, rows) = read_rows(path)?;
    let fig = match kind {
        CsvKind::Convergence => convergence_figure(path, &rows)?,
        CsvKind::Sweep => sweep_figure(path, &rows)?,
    };
    Ok((kind, fig))
}

/// Writes the SVG, data file and gnuplot script of every CSV into `out_dir`.
/// A CSV without data rows still yields empty axes, plus a warning.
pub fn emit_plots(csv_paths: &[PathBuf], out_dir: &Path) -> Result<PlotOutput, ExperimentError> {
    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
    let mut output = PlotOutput::default();
    for path in csv_paths {
        let (_, fig) = figure_from_csv(path)?;
        if fig.series.iter().all(|s| s.points.is_empty()) {
            output.warnings.push(format!("{}: no data rows, emitting empty axes", path.display()));
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
        let svg = format!("{stem}.svg");
        let dat = format!("{stem}.dat");
        let files = [
            (svg.clone(), render_svg(&fig)),
            (dat.clone(), render_data(&fig)),
            (format!("{stem}.gp"), render_gnuplot(&fig, &dat, &format!("{stem}_gnuplot.svg"))),
        ];
        for (name, content) in files {
            let target = out_dir.join(name);
            std::fs::write(&target, content).map_err(|e| io_error(&target, e))?;
            output.files.push(target);
        }
    }
    Ok(output)
}
