//! SVG rendering of sweep CSVs: outage on a logarithmic axis, one series
//! per (file, method) pair. Nothing is recomputed.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};
use crate::sweep::{read_csv, SweepRow};

/// Outage values below this are drawn at the floor of the log axis.
pub const OP_FLOOR: f64 = 1e-8;

const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(23, 190, 207),
];

/// A labelled curve ready to draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Splits the rows of one CSV into curves by method, labelled
/// `<stem>/<method>` when `stem` is given.
pub fn curves_from_rows(stem: Option<&str>, rows: &[SweepRow]) -> Vec<Curve> {
    let mut curves: Vec<Curve> = Vec::new();
    for row in rows {
        let label = match stem {
            Some(s) => format!("{s}/{}", row.method),
            None => row.method.clone(),
        };
        match curves.iter_mut().find(|c| c.label == label) {
            Some(c) => c.points.push((row.value, row.op)),
            None => curves.push(Curve {
                label,
                points: vec![(row.value, row.op)],
            }),
        }
    }
    for c in &mut curves {
        c.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    curves
}

fn draw_error(out: &Path, e: impl std::fmt::Display) -> Error {
    Error::Output {
        path: out.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Draws `curves` into an SVG at `out`.
pub fn render_svg(curves: &[Curve], x_label: &str, out: &Path) -> Result<()> {
    let points = curves.iter().flat_map(|c| c.points.iter());
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y_lo = 1.0f64;
    for &(x, y) in points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y.max(OP_FLOOR));
    }
    if !x_lo.is_finite() {
        return Err(draw_error(out, "nothing to plot"));
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    let y_lo = 10f64.powf(y_lo.log10().floor().min(-1.0));

    let root = SVGBackend::new(out, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| draw_error(out, e))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(64)
        .build_cartesian_2d(x_lo..x_hi, (y_lo..1.5).log_scale())
        .map_err(|e| draw_error(out, e))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc("outage probability")
        .draw()
        .map_err(|e| draw_error(out, e))?;
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = curve.points.iter().map(|&(x, y)| (x, y.max(OP_FLOOR))).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(|e| draw_error(out, e))?
            .label(curve.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        chart
            .draw_series(pts.into_iter().map(|p| Circle::new(p, 3, color.filled())))
            .map_err(|e| draw_error(out, e))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::LowerLeft)
        .draw()
        .map_err(|e| draw_error(out, e))?;
    root.present().map_err(|e| draw_error(out, e))?;
    Ok(())
}

/// Reads every CSV, checks they share an x variable and renders them
/// together.
pub fn emit_plot(csvs: &[PathBuf], out: &Path) -> Result<()> {
    let mut curves = Vec::new();
    let mut variable: Option<String> = None;
    let label_files = csvs.len() > 1;
    for path in csvs {
        let rows = read_csv(path)?;
        if let Some((line, row)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| variable.as_ref().is_some_and(|v| *v != r.variable))
        {
            return Err(Error::MalformedCsv {
                path: path.clone(),
                line: line as u64 + 2,
                reason: format!("variable `{}` differs from `{}`", row.variable, variable.unwrap_or_default()),
            });
        }
        variable.get_or_insert_with(|| rows[0].variable.clone());
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("csv");
        curves.extend(curves_from_rows(label_files.then_some(stem), &rows));
    }
    render_svg(&curves, variable.as_deref().unwrap_or(""), out)
}
