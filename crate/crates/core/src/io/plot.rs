//! SVG line plots. Output depends only on the data, so reruns are byte-identical.

use std::path::Path;

use plotters::prelude::*;

use super::IoError;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw markers only, no line (for reference data).
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            markers: false,
        }
    }

    pub fn markers(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            markers: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub size: (u32, u32),
}

impl PlotSpec {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        PlotSpec {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_y: false,
            size: (800, 560),
        }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }
}

const COLORS: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(127, 127, 127),
];

fn bounds(series: &[Series], log_y: bool) -> Option<((f64, f64), (f64, f64))> {
    let pts = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0));
    let mut b: Option<((f64, f64), (f64, f64))> = None;
    for &(x, y) in pts {
        b = Some(match b {
            None => ((x, x), (y, y)),
            Some(((x0, x1), (y0, y1))) => ((x0.min(x), x1.max(x)), (y0.min(y), y1.max(y))),
        });
    }
    b.map(|((x0, x1), (y0, y1))| {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5 * a.abs().max(1e-12), b + 0.5 * b.abs().max(1e-12)) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = if log_y {
            if y1 > y0 { (y0, y1) } else { (y0 * 0.5, y1 * 2.0) }
        } else {
            let (a, b) = pad(y0, y1);
            let m = 0.05 * (b - a);
            (a - m, b + m)
        };
        ((x0, x1), (y0, y1))
    })
}

/// SVG document for a set of series.
pub fn render_svg(spec: &PlotSpec, series: &[Series]) -> Result<String, IoError> {
    let ((x0, x1), (y0, y1)) = bounds(series, spec.log_y).ok_or_else(|| IoError::Format("plot: no finite data".into()))?;
    let err = |e: &dyn std::fmt::Display| IoError::Format(format!("plot: {e}"));
    let mut buf = String::new();
    {
        let root = SVGBackend::with_string(&mut buf, spec.size).into_drawing_area();
        root.fill(&WHITE).map_err(|e| err(&e))?;
        let mut builder = ChartBuilder::on(&root);
        builder
            .caption(&spec.title, ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(44)
            .y_label_area_size(72);
        macro_rules! draw {
            ($chart:expr) => {{
                let mut chart = $chart;
                chart
                    .configure_mesh()
                    .x_desc(spec.x_label.as_str())
                    .y_desc(spec.y_label.as_str())
                    .draw()
                    .map_err(|e| err(&e))?;
                for (i, s) in series.iter().enumerate() {
                    let c = COLORS[i % COLORS.len()];
                    let pts: Vec<(f64, f64)> = s
                        .points
                        .iter()
                        .copied()
                        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!spec.log_y || *y > 0.0))
                        .collect();
                    if s.markers {
                        chart
                            .draw_series(pts.iter().map(|&p| Circle::new(p, 3, c.stroke_width(1))))
                            .map_err(|e| err(&e))?
                            .label(s.label.as_str())
                            .legend(move |(x, y)| Circle::new((x + 10, y), 3, c.stroke_width(1)));
                    } else {
                        chart
                            .draw_series(LineSeries::new(pts, c.stroke_width(2)))
                            .map_err(|e| err(&e))?
                            .label(s.label.as_str())
                            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c.stroke_width(2)));
                    }
                }
                chart
                    .configure_series_labels()
                    .background_style(WHITE.mix(0.85))
                    .border_style(BLACK)
                    .position(SeriesLabelPosition::LowerRight)
                    .draw()
                    .map_err(|e| err(&e))?;
            }};
        }
        if spec.log_y {
            draw!(builder.build_cartesian_2d(x0..x1, (y0..y1).log_scale()).map_err(|e| err(&e))?);
        } else {
            draw!(builder.build_cartesian_2d(x0..x1, y0..y1).map_err(|e| err(&e))?);
        }
        root.present().map_err(|e| err(&e))?;
    }
    Ok(buf)
}

pub fn save_svg(path: &Path, spec: &PlotSpec, series: &[Series]) -> Result<(), IoError> {
    let svg = render_svg(spec, series)?;
    std::fs::write(path, svg).map_err(|e| IoError::file(path, e))
}
