//! Minimal SVG line plots: axes with ticks, optional log scales, a legend.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f4e9c", "#c0392b", "#7d3c98", "#1e8449"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            (lo, hi) = (lo.floor(), hi.ceil());
        } else {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`, or `None` off-scale.
    fn unit(&self, v: f64) -> Option<f64> {
        let t = if self.log {
            if !(v > 0.0) {
                return None;
            }
            v.log10()
        } else {
            v
        };
        t.is_finite().then(|| (t - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0);
            let mut e = self.lo;
            let mut out = Vec::new();
            while e <= self.hi + 1e-9 {
                out.push((10f64.powf(e), format!("1e{}", e as i64)));
                e += step;
            }
            return out;
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let mut v = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while v <= self.hi + 1e-9 * step {
            let shown = if v.abs() < 1e-9 * step { 0.0 } else { v };
            out.push((shown, format!("{}", (shown * 1e6).round() / 1e6)));
            v += step;
        }
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Plot {
    pub fn render(&self) -> String {
        let x_axis = Axis::fit(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.0)),
            self.log_x,
        );
        let y_axis = Axis::fit(
            self.series
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.1)),
            self.log_y,
        );
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = |u: f64| MARGIN_LEFT + u * plot_w;
        let py = |u: f64| MARGIN_TOP + (1.0 - u) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for (v, label) in x_axis.ticks() {
            if let Some(u) = x_axis.unit(v).filter(|u| (-1e-9..=1.0 + 1e-9).contains(u)) {
                let x = px(u);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                    py(0.0),
                    py(1.0),
                    py(0.0) + 18.0
                );
            }
        }
        for (v, label) in y_axis.ticks() {
            if let Some(u) = y_axis.unit(v).filter(|u| (-1e-9..=1.0 + 1e-9).contains(u)) {
                let y = py(u);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
                    px(0.0),
                    px(1.0),
                    px(0.0) - 6.0,
                    y + 4.0
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(0.5),
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            py(0.5),
            py(0.5),
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let mut path = String::new();
            for &(x, y) in &s.points {
                let (Some(u), Some(v)) = (x_axis.unit(x), y_axis.unit(y)) else {
                    continue;
                };
                let _ = write!(path, "{:.2},{:.2} ", px(u), py(v.clamp(-0.02, 1.02)));
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.trim_end()
            );
            let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
            let lx = px(1.0) - 180.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 24.0,
                lx + 30.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_two_series_with_log_axis() {
        let plot = Plot {
            title: "k & k~".into(),
            x_label: "x".into(),
            y_label: "density".into(),
            log_x: true,
            log_y: false,
            series: vec![
                Series::new(
                    "a",
                    (1..50).map(|i| (i as f64 * 0.1, 1.0 / i as f64)).collect(),
                ),
                Series::new("b", vec![(0.1, 0.5), (5.0, 0.5)]),
            ],
        };
        let svg = plot.render();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("k &amp; k~"));
        assert!(svg.contains("1e-1"));
    }

    #[test]
    fn linear_ticks_are_round() {
        let axis = Axis::fit([0.0, 0.93].into_iter(), false);
        let ticks = axis.ticks();
        assert!(
            ticks.iter().any(|(v, l)| *v == 0.2 && l == "0.2"),
            "{:?}",
            ticks
        );
    }

    #[test]
    fn empty_series_still_renders() {
        let svg = Plot::default().render();
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
