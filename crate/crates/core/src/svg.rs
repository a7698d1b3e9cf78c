//! Small deterministic SVG plotter.
//!
//! Just enough for the experiment figures: line/scatter/bar series on a
//! linear or log-y axis, reference lines, a legend. Output depends only on
//! the input data — coordinates are rounded to fixed precision — so figure
//! files are reproducible byte for byte.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = [
    "#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed", "#0891b2",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SeriesKind {
    Line,
    Scatter,
    Bars,
}

#[derive(Debug, Clone)]
struct Series {
    name: String,
    kind: SeriesKind,
    points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
struct RefLine {
    vertical: bool,
    at: f64,
    label: String,
}

/// Builder for one figure.
#[derive(Debug, Clone)]
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    width: f64,
    height: f64,
    log_y: bool,
    series: Vec<Series>,
    ref_lines: Vec<RefLine>,
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            width: 640.0,
            height: 420.0,
            log_y: false,
            series: Vec::new(),
            ref_lines: Vec::new(),
        }
    }

    pub fn size(mut self, width: f64, height: f64) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    /// Log-scale the y axis. Non-positive y values are dropped from
    /// rendering (they have no log position).
    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn line(mut self, name: &str, points: &[(f64, f64)]) -> Self {
        self.series.push(Series {
            name: name.to_string(),
            kind: SeriesKind::Line,
            points: points.to_vec(),
        });
        self
    }

    pub fn scatter(mut self, name: &str, points: &[(f64, f64)]) -> Self {
        self.series.push(Series {
            name: name.to_string(),
            kind: SeriesKind::Scatter,
            points: points.to_vec(),
        });
        self
    }

    pub fn bars(mut self, name: &str, points: &[(f64, f64)]) -> Self {
        self.series.push(Series {
            name: name.to_string(),
            kind: SeriesKind::Bars,
            points: points.to_vec(),
        });
        self
    }

    pub fn vline(mut self, x: f64, label: &str) -> Self {
        self.ref_lines.push(RefLine { vertical: true, at: x, label: label.to_string() });
        self
    }

    pub fn hline(mut self, y: f64, label: &str) -> Self {
        self.ref_lines.push(RefLine { vertical: false, at: y, label: label.to_string() });
        self
    }

    /// Renders the figure.
    pub fn render(&self) -> String {
        let (ml, mr, mt, mb) = (64.0, 18.0, 40.0, 50.0);
        let pw = (self.width - ml - mr).max(1.0);
        let ph = (self.height - mt - mb).max(1.0);

        let usable = |y: f64| !self.log_y || y > 0.0;
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() && usable(y) {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        for r in &self.ref_lines {
            if r.vertical {
                xs.push(r.at);
            } else if usable(r.at) {
                ys.push(r.at);
            }
        }
        let (x_min, x_max) = padded_range(&xs, false);
        let (y_min, y_max) = if self.log_y {
            let logs: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
            padded_range(&logs, true)
        } else {
            padded_range(&ys, false)
        };

        let to_px = |x: f64| ml + (x - x_min) / (x_max - x_min) * pw;
        let to_py = |y: f64| {
            let v = if self.log_y { y.log10() } else { y };
            mt + ph - (v - y_min) / (y_max - y_min) * ph
        };

        let mut s = String::new();
        let _ = write!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {:.0} {:.0}\" \
             font-family=\"system-ui, sans-serif\" font-size=\"12\">\n",
            self.width, self.height
        );
        let _ = writeln!(
            s,
            "<rect width=\"{:.0}\" height=\"{:.0}\" fill=\"#ffffff\"/>",
            self.width, self.height
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\" \
             fill=\"#111827\">{}</text>",
            ml + pw / 2.0,
            escape(&self.title)
        );

        // Gridlines and ticks.
        for t in linear_ticks(x_min, x_max) {
            let px = to_px(t);
            let _ = writeln!(
                s,
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
                 stroke=\"#e5e7eb\"/>",
                mt,
                mt + ph
            );
            let _ = writeln!(
                s,
                "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
                 fill=\"#374151\">{}</text>",
                mt + ph + 16.0,
                tick_label(t)
            );
        }
        let y_ticks = if self.log_y {
            log_ticks(y_min, y_max)
        } else {
            linear_ticks(y_min, y_max)
        };
        for t in y_ticks {
            let py = if self.log_y {
                mt + ph - (t - y_min) / (y_max - y_min) * ph
            } else {
                to_py(t)
            };
            let label = if self.log_y {
                format!("1e{}", t.round() as i64)
            } else {
                tick_label(t)
            };
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" \
                 stroke=\"#e5e7eb\"/>",
                ml,
                ml + pw
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" \
                 fill=\"#374151\">{label}</text>",
                ml - 6.0,
                py + 4.0
            );
        }

        // Frame and axis labels.
        let _ = writeln!(
            s,
            "<rect x=\"{ml:.2}\" y=\"{mt:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" \
             fill=\"none\" stroke=\"#9ca3af\"/>"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
             fill=\"#111827\">{}</text>",
            ml + pw / 2.0,
            self.height - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#111827\" \
             transform=\"rotate(-90 16 {:.2})\">{}</text>",
            mt + ph / 2.0,
            mt + ph / 2.0,
            escape(&self.y_label)
        );

        // Reference lines.
        for r in &self.ref_lines {
            if r.vertical {
                let px = to_px(r.at);
                let _ = writeln!(
                    s,
                    "<line x1=\"{px:.2}\" y1=\"{mt:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
                     stroke=\"#6b7280\" stroke-dasharray=\"4 3\"/>",
                    mt + ph
                );
                if !r.label.is_empty() {
                    let _ = writeln!(
                        s,
                        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#6b7280\">{}</text>",
                        px + 4.0,
                        mt + 12.0,
                        escape(&r.label)
                    );
                }
            } else if usable(r.at) {
                let py = to_py(r.at);
                let _ = writeln!(
                    s,
                    "<line x1=\"{ml:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" \
                     stroke=\"#6b7280\" stroke-dasharray=\"4 3\"/>",
                    ml + pw
                );
                if !r.label.is_empty() {
                    let _ = writeln!(
                        s,
                        "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#6b7280\">{}</text>",
                        ml + 6.0,
                        py - 5.0,
                        escape(&r.label)
                    );
                }
            }
        }

        // Series.
        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && usable(*y))
                .map(|&(x, y)| (to_px(x), to_py(y)))
                .collect();
            match series.kind {
                SeriesKind::Line => {
                    if pts.len() >= 2 {
                        let path: Vec<String> =
                            pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                        let _ = writeln!(
                            s,
                            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                             stroke-width=\"1.8\"/>",
                            path.join(" ")
                        );
                    } else if pts.len() == 1 {
                        let _ = writeln!(
                            s,
                            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                            pts[0].0, pts[0].1
                        );
                    }
                }
                SeriesKind::Scatter => {
                    for (x, y) in &pts {
                        let _ = writeln!(
                            s,
                            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"{color}\"/>"
                        );
                    }
                }
                SeriesKind::Bars => {
                    let spacing = min_spacing(&series.points).map(|d| {
                        (to_px(x_min + d) - to_px(x_min)).abs()
                    });
                    let bw = spacing.unwrap_or(pw / 10.0).max(1.0) * 0.8;
                    let base_val = if self.log_y { 10f64.powf(y_min) } else { y_min.max(0.0) };
                    let base = to_py(base_val);
                    for (x, y) in &pts {
                        let top = y.min(base);
                        let h = (base - y).abs();
                        let _ = writeln!(
                            s,
                            "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{bw:.2}\" \
                             height=\"{h:.2}\" fill=\"{color}\" fill-opacity=\"0.75\"/>",
                            x - bw / 2.0
                        );
                    }
                }
            }
        }

        // Legend (skipped for a single unnamed series).
        let named: Vec<(usize, &Series)> = self
            .series
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.name.is_empty())
            .collect();
        if named.len() > 1 || (named.len() == 1 && self.series.len() > 1) {
            let mut ly = mt + 8.0;
            for (idx, series) in &named {
                let color = PALETTE[idx % PALETTE.len()];
                let lx = ml + pw - 130.0;
                let _ = writeln!(
                    s,
                    "<rect x=\"{lx:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" \
                     fill=\"{color}\"/>",
                    ly - 9.0
                );
                let _ = writeln!(
                    s,
                    "<text x=\"{:.2}\" y=\"{ly:.2}\" fill=\"#111827\">{}</text>",
                    lx + 14.0,
                    escape(&series.name)
                );
                ly += 16.0;
            }
        }

        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Data range with 4% padding; falls back to a unit range around the data
/// (or zero) when degenerate. For log axes the inputs are already log10.
fn padded_range(values: &[f64], log: bool) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return if log { (-1.0, 1.0) } else { (0.0, 1.0) };
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.04;
    (lo - pad, hi + pad)
}

/// Round tick positions covering a range: steps of 1, 2 or 5 × 10^k.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    } * mag;
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 && out.len() < 32 {
        // Snap values that should be round numbers.
        let snapped = (t / step).round() * step;
        out.push(if snapped == 0.0 { 0.0 } else { snapped });
        t += step;
    }
    out
}

/// Integer powers of ten inside a log10 range.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let first = lo.ceil() as i64;
    let last = hi.floor() as i64;
    if last < first {
        return vec![lo, hi];
    }
    let step = (((last - first) as usize / 10) + 1) as i64;
    (first..=last).step_by(step as usize).map(|e| e as f64).collect()
}

fn tick_label(t: f64) -> String {
    if t == 0.0 {
        return "0".to_string();
    }
    let a = t.abs();
    if a >= 1e5 || a < 1e-3 {
        format!("{t:.0e}")
    } else if a >= 10.0 {
        let s = format!("{t:.1}");
        s.strip_suffix(".0").unwrap_or(&s).to_string()
    } else {
        let s = format!("{t:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn min_spacing(points: &[(f64, f64)]) -> Option<f64> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_a_line_plot_with_ticks_and_labels() {
        let svg = Plot::new("response", "width (ns)", "level")
            .line("measured", &[(5.0, 0.24), (25.0, 0.75), (45.0, 0.92)])
            .render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("response"));
        assert!(svg.contains("width (ns)"));
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn output_is_deterministic() {
        let build = || {
            Plot::new("t", "x", "y")
                .scatter("a", &[(0.0, 1.0), (1.0, 2.0)])
                .bars("b", &[(0.0, 0.5), (1.0, 1.5)])
                .vline(0.5, "mark")
                .render()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn log_axis_uses_decade_ticks_and_drops_non_positive_points() {
        let svg = Plot::new("convergence", "iteration", "residual")
            .log_y()
            .line("run", &[(0.0, 1.0), (1.0, 1e-3), (2.0, 1e-6), (3.0, 0.0)])
            .render();
        assert!(svg.contains("1e-3"), "decade tick labels expected");
        // The zero point cannot appear on a log axis; polyline has 3 points.
        let poly = svg.split("<polyline points=\"").nth(1).unwrap();
        let coords = poly.split('"').next().unwrap();
        assert_eq!(coords.split(' ').count(), 3);
    }

    #[test]
    fn degenerate_inputs_do_not_panic() {
        let empty = Plot::new("empty", "x", "y").render();
        assert!(empty.contains("</svg>"));
        let single = Plot::new("one", "x", "y").line("s", &[(1.0, 1.0)]).render();
        assert!(single.contains("<circle"));
        let flat = Plot::new("flat", "x", "y")
            .line("s", &[(0.0, 2.0), (1.0, 2.0)])
            .render();
        assert!(flat.contains("<polyline"));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = Plot::new("a < b & c", "x", "y").render();
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(!svg.contains("a < b"));
    }
}
