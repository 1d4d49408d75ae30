use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::runner::{ExperimentResult, PlotSource, PlotSpec};
use super::table::Table;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
}

/// Writes a table as RFC-4180 CSV with a header row.
pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(table.columns.iter().map(|c| c.name.as_str()))?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Schema<'a> {
    experiment: &'a str,
    seed: u64,
    files: Vec<SchemaFile<'a>>,
    notes: &'a [String],
}

#[derive(Serialize)]
struct SchemaFile<'a> {
    file: String,
    rows: usize,
    columns: &'a [super::table::Column],
}

fn file_stem(result: &ExperimentResult, suffix: &str) -> String {
    format!("{}{}_{}", result.id, suffix, result.seed)
}

/// Writes `<experiment>_<seed>.csv` (per-trial rows),
/// `<experiment>-aggregate_<seed>.csv`, the `<experiment>_<seed>.schema.json`
/// sidecar and, when requested, `<experiment>_<seed>.svg`.
pub fn emit(result: &ExperimentResult, dir: &Path, formats: &[OutputFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if formats.contains(&OutputFormat::Csv) {
        let trials = dir.join(format!("{}.csv", file_stem(result, "")));
        write_csv(&result.trials, std::fs::File::create(&trials)?)?;
        let aggregates = dir.join(format!("{}.csv", file_stem(result, "-aggregate")));
        write_csv(&result.aggregates, std::fs::File::create(&aggregates)?)?;

        let schema = Schema {
            experiment: &result.id,
            seed: result.seed,
            files: vec![
                SchemaFile {
                    file: file_name(&trials),
                    rows: result.trials.rows.len(),
                    columns: &result.trials.columns,
                },
                SchemaFile {
                    file: file_name(&aggregates),
                    rows: result.aggregates.rows.len(),
                    columns: &result.aggregates.columns,
                },
            ],
            notes: &result.notes,
        };
        let schema_path = dir.join(format!("{}.schema.json", file_stem(result, "")));
        std::fs::write(&schema_path, serde_json::to_string_pretty(&schema)? + "\n")?;
        written.extend([trials, aggregates, schema_path]);
    }
    if formats.contains(&OutputFormat::Svg) {
        if let Some(plot) = &result.plot {
            let path = dir.join(format!("{}.svg", file_stem(result, "")));
            std::fs::write(&path, render_svg(result, plot))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Standalone SVG line plot of `plot.ys` against `plot.x`.
pub fn render_svg(result: &ExperimentResult, plot: &PlotSpec) -> String {
    let table = match plot.source {
        PlotSource::Trials => &result.trials,
        PlotSource::Aggregates => &result.aggregates,
    };
    let xs = table.numeric(&plot.x);
    let series: Vec<(String, Vec<f64>)> = plot.ys.iter().map(|y| (y.clone(), table.numeric(y))).collect();
    let (x0, x1) = bounds(xs.iter().copied());
    let (y0, y1) = bounds(series.iter().flat_map(|(_, v)| v.iter().copied()).chain([0.0]));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(&plot.title)
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<path d="M {l} {t} L {l} {b} L {r} {b}" fill="none" stroke="black"/>"#,
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h,
        r = MARGIN_LEFT + plot_w
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(xv),
            MARGIN_TOP + plot_h + 18.0,
            format_tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            sy(yv) + 4.0,
            format_tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 16.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        escape(&plot.y_label)
    );
    for (i, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN_TOP + 16.0 * i as f64 + 8.0;
        let lx = MARGIN_LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}
