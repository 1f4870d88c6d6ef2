//! Dependency-free SVG line charts for the standard run figures.
//!
//! Five figures: parameter estimates against the true values, image-plane
//! coordinates for both controller presets, the prediction error over the
//! first ten seconds, and the image vertical coordinate with detected event
//! boundaries marked.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::Preset;
use crate::error::Error;
use crate::sim::{EventLog, TraceRecord};
use crate::Result;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
/// Cap on points per polyline; buckets are reduced by peak magnitude so
/// short spikes survive decimation.
const MAX_POINTS: usize = 2500;

struct Series {
    label: String,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
    vlines: Vec<f64>,
}

impl Chart {
    fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Chart {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
            vlines: Vec::new(),
        }
    }

    fn add_series(&mut self, label: &str, dashed: bool, points: Vec<(f64, f64)>) {
        let color = PALETTE[self.series.len() % PALETTE.len()];
        self.series.push(Series {
            label: label.to_string(),
            color,
            dashed,
            points: decimate(points),
        });
    }

    fn render(&self) -> String {
        let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for &(x, y) in &s.points {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        for &x in &self.vlines {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        if !x_min.is_finite() {
            (x_min, x_max) = (0.0, 1.0);
        }
        if !y_min.is_finite() {
            (y_min, y_max) = (0.0, 1.0);
        }
        if x_max - x_min < 1e-300 {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if y_max - y_min < 1e-300 {
            y_min -= 0.5;
            y_max += 0.5;
        } else {
            let pad = 0.05 * (y_max - y_min);
            y_min -= pad;
            y_max += pad;
        }
        let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| {
            HEIGHT - MARGIN_B - (y - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
        };

        let mut svg = String::new();
        let _ = write!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            WIDTH / 2.0,
            self.title
        );
        // Axes box and ticks.
        let _ = writeln!(
            svg,
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" \
             fill=\"none\" stroke=\"#333\"/>",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        );
        for i in 0..=5 {
            let fx = x_min + (x_max - x_min) * i as f64 / 5.0;
            let fy = y_min + (y_max - y_min) * i as f64 / 5.0;
            let _ = write!(
                svg,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ccc\"/>\n\
                 <text x=\"{0}\" y=\"{3}\" text-anchor=\"middle\">{4}</text>\n",
                px(fx),
                MARGIN_T,
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 16.0,
                tick_label(fx)
            );
            let _ = write!(
                svg,
                "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#ccc\"/>\n\
                 <text x=\"{3}\" y=\"{4}\" text-anchor=\"end\">{5}</text>\n",
                MARGIN_L,
                WIDTH - MARGIN_R,
                py(fy),
                MARGIN_L - 6.0,
                py(fy) + 4.0,
                tick_label(fy)
            );
        }
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 10.0,
            self.x_label,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            self.y_label
        );
        for &x in &self.vlines {
            let _ = writeln!(
                svg,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#d62728\" \
                 stroke-dasharray=\"4 3\" stroke-width=\"1.5\"/>",
                px(x),
                MARGIN_T,
                HEIGHT - MARGIN_B
            );
        }
        for s in &self.series {
            let mut d = String::with_capacity(s.points.len() * 14);
            for &(x, y) in &s.points {
                let _ = write!(d, "{:.2},{:.2} ", px(x), py(y));
            }
            let dash = if s.dashed {
                " stroke-dasharray=\"6 4\""
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.3\"{} points=\"{}\"/>",
                s.color,
                dash,
                d.trim_end()
            );
        }
        // Legend, top-right inside the plot box.
        for (i, s) in self.series.iter().enumerate() {
            let ly = MARGIN_T + 16.0 + 16.0 * i as f64;
            let _ = write!(
                svg,
                "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n\
                 <text x=\"{4}\" y=\"{5}\">{6}</text>\n",
                WIDTH - MARGIN_R - 150.0,
                ly,
                WIDTH - MARGIN_R - 126.0,
                s.color,
                WIDTH - MARGIN_R - 120.0,
                ly + 4.0,
                s.label
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 1e-3 && v.abs() < 1e6 {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Reduce to at most MAX_POINTS by keeping each bucket's largest-magnitude
/// sample, plus the endpoints.
fn decimate(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points;
    }
    let bucket = points.len().div_ceil(MAX_POINTS);
    let mut out = Vec::with_capacity(MAX_POINTS + 2);
    out.push(points[0]);
    for chunk in points.chunks(bucket) {
        let peak = chunk
            .iter()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        out.push(*peak);
    }
    if let Some(last) = points.last() {
        if out.last() != Some(last) {
            out.push(*last);
        }
    }
    out
}

fn write_svg(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn image_figure(trace: &[TraceRecord], preset: Preset, outdir: &Path) -> Result<PathBuf> {
    let name = match preset {
        Preset::Full => "image_full.svg",
        Preset::NoAnticipation => "image_no_anticipation.svg",
    };
    let title = match preset {
        Preset::Full => "Image-plane ball coordinates, full architecture",
        Preset::NoAnticipation => "Image-plane ball coordinates, no anticipation",
    };
    let mut chart = Chart::new(title, "t [s]", "position [m]");
    chart.add_series("x_p1", false, trace.iter().map(|r| (r.t, r.x[2])).collect());
    chart.add_series("x_p2", false, trace.iter().map(|r| (r.t, r.x[3])).collect());
    let path = outdir.join(name);
    write_svg(&path, &chart.render())?;
    Ok(path)
}

/// Emit the standard figures for a run; returns the files written.
///
/// `preset` names the architecture that produced `trace`; `companion`, when
/// given, is a trace of the opposite preset used for the comparison figure.
/// An empty trace emits nothing.
pub fn emit_plots(
    trace: &[TraceRecord],
    events: &EventLog,
    preset: Preset,
    companion: Option<&[TraceRecord]>,
    outdir: &Path,
) -> Result<Vec<PathBuf>> {
    if trace.is_empty() {
        return Ok(Vec::new());
    }
    let mut written = Vec::new();

    let mut alpha = Chart::new("Parameter estimates", "t [s]", "parameter [m/s^2]");
    alpha.add_series(
        "alpha_1",
        false,
        trace.iter().map(|r| (r.t, r.alpha[0])).collect(),
    );
    alpha.add_series(
        "alpha_2",
        false,
        trace.iter().map(|r| (r.t, r.alpha[1])).collect(),
    );
    alpha.add_series(
        "theta_1",
        true,
        trace.iter().map(|r| (r.t, r.theta_true[0])).collect(),
    );
    alpha.add_series(
        "theta_2",
        true,
        trace.iter().map(|r| (r.t, r.theta_true[1])).collect(),
    );
    let path = outdir.join("alpha_params.svg");
    write_svg(&path, &alpha.render())?;
    written.push(path);

    written.push(image_figure(trace, preset, outdir)?);
    if let Some(other) = companion {
        if !other.is_empty() {
            written.push(image_figure(other, preset.flipped(), outdir)?);
        }
    }

    let mut verr = Chart::new("Prediction error, first 10 s", "t [s]", "V");
    verr.add_series(
        "V",
        false,
        trace
            .iter()
            .take_while(|r| r.t < 10.0)
            .map(|r| (r.t, r.v))
            .collect(),
    );
    let path = outdir.join("prediction_error.svg");
    write_svg(&path, &verr.render())?;
    written.push(path);

    let mut ev = Chart::new("Detected event boundaries", "t [s]", "image vertical [m]");
    ev.add_series("x_p2", false, trace.iter().map(|r| (r.t, r.x[3])).collect());
    ev.vlines = events.iter().map(|e| e.time).collect();
    let path = outdir.join("events.svg");
    write_svg(&path, &ev.render())?;
    written.push(path);

    Ok(written)
}
