//! Minimal, dependency-free SVG convergence plots.
//!
//! One polyline per seed, effective data passes on the x axis, the chosen
//! metric on the y axis (log scale for metrics that live on a positive
//! range). The output is deterministic text, so plots are diffable.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;

use super::{LogRow, RunRecord};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 25.0;
const MARGIN_TOP: f64 = 45.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f6fb2", "#d1495b", "#2e933c", "#8f2d56", "#e08d2e", "#5c5470",
];

/// Which column of the log a plot shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    /// Optimality gap `F - F*` (log scale).
    Gap,
    /// Raw objective value (linear scale).
    F,
    /// Squared gradient norm (log scale).
    GradNormSq,
    /// Step size (log scale).
    Eta,
}

impl PlotMetric {
    pub fn name(&self) -> &'static str {
        match self {
            PlotMetric::Gap => "optimality gap",
            PlotMetric::F => "objective value",
            PlotMetric::GradNormSq => "squared gradient norm",
            PlotMetric::Eta => "step size",
        }
    }

    fn log_scale(&self) -> bool {
        !matches!(self, PlotMetric::F)
    }

    fn extract(&self, row: &LogRow) -> f64 {
        match self {
            PlotMetric::Gap => row.gap,
            PlotMetric::F => row.f,
            PlotMetric::GradNormSq => row.grad_norm_sq,
            PlotMetric::Eta => row.eta,
        }
    }

    /// Parse a metric name as used on the command line.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "gap" => Some(PlotMetric::Gap),
            "f" => Some(PlotMetric::F),
            "grad_norm_sq" => Some(PlotMetric::GradNormSq),
            "eta" => Some(PlotMetric::Eta),
            _ => None,
        }
    }
}

fn fmt_coord(x: f64) -> String {
    format!("{x:.2}")
}

fn fmt_tick(value: f64) -> String {
    if value == 0.0 {
        "0".to_string()
    } else if value.abs() >= 1e-3 && value.abs() < 1e4 {
        format!("{value:.4}")
    } else {
        format!("{value:.2e}")
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Render the records as an SVG document.
pub fn plot_svg(records: &[RunRecord], metric: PlotMetric, title: &str) -> String {
    // Collect the plottable points per record: finite passes, finite metric,
    // and strictly positive metric when the axis is logarithmic.
    let series: Vec<Vec<(f64, f64)>> = records
        .iter()
        .map(|rec| {
            rec.rows
                .iter()
                .filter_map(|row| {
                    let y = metric.extract(row);
                    let keep =
                        row.passes.is_finite() && y.is_finite() && (!metric.log_scale() || y > 0.0);
                    keep.then(|| {
                        let y = if metric.log_scale() { y.log10() } else { y };
                        (row.passes, y)
                    })
                })
                .collect()
        })
        .collect();

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">"
    )
    .unwrap();
    writeln!(
        out,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{}\" y=\"26\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        escape_xml(title)
    )
    .unwrap();

    let points: Vec<(f64, f64)> = series.iter().flatten().copied().collect();
    if points.is_empty() {
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no plottable data</text>",
            WIDTH / 2.0,
            HEIGHT / 2.0
        )
        .unwrap();
        out.push_str("</svg>\n");
        return out;
    }

    let (mut x_lo, mut x_hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        });
    let (mut y_lo, mut y_hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    if x_hi - x_lo < 1e-12 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi - y_lo < 1e-12 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w,
            MARGIN_TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h,
        )
    };

    // Frame and axis labels.
    writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>",
        fmt_coord(MARGIN_LEFT),
        fmt_coord(MARGIN_TOP),
        fmt_coord(plot_w),
        fmt_coord(plot_h)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">effective passes</text>",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        fmt_coord(HEIGHT - 12.0)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}{}</text>",
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        escape_xml(metric.name()),
        if metric.log_scale() { " (log10)" } else { "" }
    )
    .unwrap();

    // Ticks: ends plus midpoint on each axis.
    for frac in [0.0, 0.5, 1.0] {
        let xv = x_lo + frac * (x_hi - x_lo);
        let (px, _) = to_px(xv, y_lo);
        writeln!(
            out,
            "<line x1=\"{px}\" y1=\"{y1}\" x2=\"{px}\" y2=\"{y2}\" stroke=\"#444\"/>",
            px = fmt_coord(px),
            y1 = fmt_coord(MARGIN_TOP + plot_h),
            y2 = fmt_coord(MARGIN_TOP + plot_h + 6.0)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            fmt_coord(px),
            fmt_coord(MARGIN_TOP + plot_h + 22.0),
            fmt_tick(xv)
        )
        .unwrap();
        let yv = y_lo + frac * (y_hi - y_lo);
        let (_, py) = to_px(x_lo, yv);
        writeln!(
            out,
            "<line x1=\"{x1}\" y1=\"{py}\" x2=\"{x2}\" y2=\"{py}\" stroke=\"#444\"/>",
            x1 = fmt_coord(MARGIN_LEFT - 6.0),
            x2 = fmt_coord(MARGIN_LEFT),
            py = fmt_coord(py)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            fmt_coord(MARGIN_LEFT - 10.0),
            fmt_coord(py + 4.0),
            fmt_tick(yv)
        )
        .unwrap();
    }

    // One polyline per record plus a legend entry.
    for (idx, (rec, pts)) in records.iter().zip(&series).enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        if pts.len() >= 2 {
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = to_px(x, y);
                    format!("{},{}", fmt_coord(px), fmt_coord(py))
                })
                .collect();
            writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\"{}\"/>",
                path.join(" ")
            )
            .unwrap();
        }
        writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">seed {}{}</text>",
            fmt_coord(MARGIN_LEFT + 8.0),
            fmt_coord(MARGIN_TOP + 16.0 + 16.0 * idx as f64),
            rec.seed,
            if rec.aborted { " (aborted)" } else { "" }
        )
        .unwrap();
    }

    out.push_str("</svg>\n");
    out
}

/// Render and write the plot to a file.
pub fn plot_svg_file(
    records: &[RunRecord],
    metric: PlotMetric,
    title: &str,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, plot_svg(records, metric, title))?;
    Ok(())
}
