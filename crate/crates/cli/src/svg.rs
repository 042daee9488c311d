//! Minimal SVG line/band charts. CSV output is the source of truth;
//! these files exist so results can be eyeballed without extra tooling.

use edcast_core::decompose::Decomposition;
use edcast_core::sarima::Forecast;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 160.0;
const MARGIN: f64 = 40.0;

struct Scale {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    top: f64,
}

impl Scale {
    fn new(xs: (f64, f64), ys: (f64, f64), top: f64) -> Self {
        let pad = ((ys.1 - ys.0).abs()).max(1e-9) * 0.05;
        Scale {
            x0: xs.0,
            x1: xs.1.max(xs.0 + 1e-9),
            y0: ys.0 - pad,
            y1: ys.1 + pad,
            top,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        self.top + PANEL_HEIGHT - (v - self.y0) / (self.y1 - self.y0) * PANEL_HEIGHT
    }
}

fn polyline(scale: &Scale, points: &[(f64, f64)], color: &str) -> String {
    if points.is_empty() {
        return String::new();
    }
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{:.2},{:.2}", scale.x(*x), scale.y(*y)))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

fn band(scale: &Scale, points: &[(f64, f64, f64)], color: &str, opacity: f64) -> String {
    if points.is_empty() {
        return String::new();
    }
    let mut coords = Vec::with_capacity(points.len() * 2);
    for (x, lo, _) in points {
        coords.push(format!("{:.2},{:.2}", scale.x(*x), scale.y(*lo)));
    }
    for (x, _, hi) in points.iter().rev() {
        coords.push(format!("{:.2},{:.2}", scale.x(*x), scale.y(*hi)));
    }
    format!(
        "<polygon fill=\"{color}\" fill-opacity=\"{opacity:.3}\" stroke=\"none\" points=\"{}\"/>\n",
        coords.join(" ")
    )
}

fn label(x: f64, y: f64, text: &str) -> String {
    format!("<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"12\">{text}</text>\n")
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

fn document(height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" \
         fill=\"white\"/>\n{body}</svg>\n"
    )
}

/// Four stacked panels: observed, trend, seasonal, remainder.
pub fn decomposition_svg(d: &Decomposition) -> String {
    let n = d.observed.len();
    let xs = (0.0, (n.max(2) - 1) as f64);
    let mut body = String::new();
    let gap = 30.0;

    let panels: [(&str, Vec<(f64, f64)>); 4] = [
        (
            "observed",
            d.observed
                .iter()
                .enumerate()
                .map(|(i, v)| (i as f64, *v))
                .collect(),
        ),
        (
            "trend",
            d.trend
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (i as f64, v)))
                .collect(),
        ),
        (
            "seasonal",
            d.seasonal
                .iter()
                .enumerate()
                .map(|(i, v)| (i as f64, *v))
                .collect(),
        ),
        (
            "remainder",
            d.remainder
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (i as f64, v)))
                .collect(),
        ),
    ];

    for (idx, (name, points)) in panels.iter().enumerate() {
        let top = gap + idx as f64 * (PANEL_HEIGHT + gap);
        let ys = min_max(points.iter().map(|(_, y)| *y));
        let scale = Scale::new(xs, ys, top);
        body.push_str(&label(MARGIN, top - 8.0, name));
        body.push_str(&polyline(&scale, points, "#1f77b4"));
    }

    let height = gap + 4.0 * (PANEL_HEIGHT + gap);
    document(height, &body)
}

/// Recent history, point forecast, and nested interval bands.
pub fn forecast_svg(history_tail: &[f64], forecast: &Forecast) -> String {
    let n_hist = history_tail.len();
    let h = forecast.horizon;
    let xs = (0.0, (n_hist + h).max(2) as f64 - 1.0);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in history_tail.iter().chain(&forecast.points) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    for level_row in forecast.lower.iter().chain(&forecast.upper) {
        for v in level_row {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    let scale = Scale::new(xs, (lo, hi), 30.0);

    let mut body = String::new();
    // Widest band first so narrower levels stay visible.
    for li in (0..forecast.levels.len()).rev() {
        let pts: Vec<(f64, f64, f64)> = (0..h)
            .map(|j| {
                (
                    (n_hist + j) as f64,
                    forecast.lower[li][j],
                    forecast.upper[li][j],
                )
            })
            .collect();
        body.push_str(&band(&scale, &pts, "#1f77b4", 0.12));
    }
    let hist_pts: Vec<(f64, f64)> = history_tail
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64, *v))
        .collect();
    body.push_str(&polyline(&scale, &hist_pts, "#555555"));
    let fc_pts: Vec<(f64, f64)> = forecast
        .points
        .iter()
        .enumerate()
        .map(|(j, v)| ((n_hist + j) as f64, *v))
        .collect();
    body.push_str(&polyline(&scale, &fc_pts, "#d62728"));
    body.push_str(&label(MARGIN, 18.0, "history (grey), forecast (red), interval bands"));

    document(30.0 + PANEL_HEIGHT + 30.0, &body)
}
