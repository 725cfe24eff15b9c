//! Minimal static SVG plots: grouped box plots and labelled 2-D scatters.
//! Output is plain deterministic markup; no external renderer involved.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

pub const FAKE_COLOR: &str = "#c0392b";
pub const REAL_COLOR: &str = "#2471a3";

/// Five-number summary of one box.
#[derive(Debug, Clone)]
pub struct BoxGroup {
    pub label: String,
    pub color: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxGroup {
    /// Builds the five-number summary from raw values (must be non-empty).
    pub fn from_values(label: &str, color: &str, values: &[f64]) -> Option<BoxGroup> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let quantile = |q: f64| -> f64 {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        };
        Some(BoxGroup {
            label: label.to_string(),
            color: color.to_string(),
            min: sorted[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: *sorted.last().expect("non-empty"),
        })
    }
}

fn header(title: &str) -> String {
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}">"#,
            "\n",
            r#"<rect width="{w}" height="{h}" fill="white"/>"#,
            "\n",
            r#"<text x="{tx}" y="24" font-family="sans-serif" font-size="16" "#,
            r#"text-anchor="middle">{title}</text>"#,
            "\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = escape(title),
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn value_range(lo: f64, hi: f64) -> (f64, f64) {
    if (hi - lo).abs() < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.08;
        (lo - pad, hi + pad)
    }
}

/// Grouped vertical box plot.
pub fn box_plot(title: &str, y_label: &str, groups: &[BoxGroup]) -> String {
    let mut svg = header(title);
    if groups.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let lo = groups.iter().map(|g| g.min).fold(f64::INFINITY, f64::min);
    let hi = groups.iter().map(|g| g.max).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = value_range(lo, hi);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    // Axis and ticks.
    let _ = write!(
        svg,
        r#"<line x1="{x}" y1="{y1}" x2="{x}" y2="{y2}" stroke="black"/>"#,
        x = MARGIN_LEFT,
        y1 = MARGIN_TOP,
        y2 = MARGIN_TOP + plot_h
    );
    svg.push('\n');
    for tick in 0..=4 {
        let v = lo + (hi - lo) * tick as f64 / 4.0;
        let y = y_of(v);
        let _ = write!(
            svg,
            concat!(
                r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/>"##,
                r#"<text x="{tx}" y="{ty:.2}" font-family="sans-serif" font-size="11" "#,
                r#"text-anchor="end">{v:.4}</text>"#,
                "\n"
            ),
            x0 = MARGIN_LEFT,
            x1 = MARGIN_LEFT + plot_w,
            y = y,
            tx = MARGIN_LEFT - 6.0,
            ty = y + 4.0,
            v = v,
        );
    }
    let _ = write!(
        svg,
        concat!(
            r#"<text x="16" y="{y:.2}" font-family="sans-serif" font-size="12" "#,
            r#"text-anchor="middle" transform="rotate(-90 16 {y:.2})">{label}</text>"#,
            "\n"
        ),
        y = MARGIN_TOP + plot_h / 2.0,
        label = escape(y_label),
    );

    let slot = plot_w / groups.len() as f64;
    let box_w = (slot * 0.5).min(48.0);
    for (i, g) in groups.iter().enumerate() {
        let cx = MARGIN_LEFT + slot * (i as f64 + 0.5);
        let (x0, x1) = (cx - box_w / 2.0, cx + box_w / 2.0);
        // Whiskers.
        let _ = write!(
            svg,
            concat!(
                r#"<line x1="{cx:.2}" y1="{ymin:.2}" x2="{cx:.2}" y2="{yq1:.2}" stroke="black"/>"#,
                r#"<line x1="{cx:.2}" y1="{yq3:.2}" x2="{cx:.2}" y2="{ymax:.2}" stroke="black"/>"#,
                r#"<line x1="{wx0:.2}" y1="{ymin:.2}" x2="{wx1:.2}" y2="{ymin:.2}" stroke="black"/>"#,
                r#"<line x1="{wx0:.2}" y1="{ymax:.2}" x2="{wx1:.2}" y2="{ymax:.2}" stroke="black"/>"#,
                "\n"
            ),
            cx = cx,
            ymin = y_of(g.min),
            yq1 = y_of(g.q1),
            yq3 = y_of(g.q3),
            ymax = y_of(g.max),
            wx0 = cx - box_w / 4.0,
            wx1 = cx + box_w / 4.0,
        );
        // Box and median.
        let _ = write!(
            svg,
            concat!(
                r#"<rect x="{x0:.2}" y="{yq3:.2}" width="{w:.2}" height="{h:.2}" "#,
                r#"fill="{color}" fill-opacity="0.35" stroke="{color}"/>"#,
                r#"<line x1="{x0:.2}" y1="{ymed:.2}" x2="{x1:.2}" y2="{ymed:.2}" "#,
                r#"stroke="{color}" stroke-width="2"/>"#,
                "\n"
            ),
            x0 = x0,
            x1 = x1,
            w = box_w,
            yq3 = y_of(g.q3),
            h = (y_of(g.q1) - y_of(g.q3)).max(0.5),
            ymed = y_of(g.median),
            color = g.color,
        );
        let _ = write!(
            svg,
            concat!(
                r#"<text x="{cx:.2}" y="{ty}" font-family="sans-serif" font-size="11" "#,
                r#"text-anchor="middle">{label}</text>"#,
                "\n"
            ),
            cx = cx,
            ty = MARGIN_TOP + plot_h + 18.0,
            label = escape(&g.label),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// 2-D scatter, one circle per point, colored by class label.
pub fn scatter_2d(title: &str, points: &[(f64, f64, String)]) -> String {
    let mut svg = header(title);
    if points.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y, _) in points {
        x_lo = x_lo.min(*x);
        x_hi = x_hi.max(*x);
        y_lo = y_lo.min(*y);
        y_hi = y_hi.max(*y);
    }
    let (x_lo, x_hi) = value_range(x_lo, x_hi);
    let (y_lo, y_hi) = value_range(y_lo, y_hi);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

    let color_of = |label: &str| -> &str {
        match label {
            "fake" | "rumour" => FAKE_COLOR,
            "real" | "nonrumour" => REAL_COLOR,
            _ => "#7f8c8d",
        }
    };
    let _ = write!(
        svg,
        concat!(
            r##"<rect x="{x}" y="{y}" width="{w:.2}" height="{h:.2}" fill="none" stroke="#aaa"/>"##,
            "\n"
        ),
        x = MARGIN_LEFT,
        y = MARGIN_TOP,
        w = plot_w,
        h = plot_h,
    );
    for (x, y, label) in points {
        let px = MARGIN_LEFT + plot_w * (x - x_lo) / (x_hi - x_lo);
        let py = MARGIN_TOP + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo));
        let _ = write!(
            svg,
            concat!(
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}" fill-opacity="0.7"/>"#,
                "\n"
            ),
            px = px,
            py = py,
            color = color_of(label),
        );
    }
    // Legend.
    let mut labels: Vec<&str> = points.iter().map(|(_, _, l)| l.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 * i as f64;
        let _ = write!(
            svg,
            concat!(
                r#"<circle cx="{cx}" cy="{cy:.2}" r="4" fill="{color}"/>"#,
                r#"<text x="{tx}" y="{ty:.2}" font-family="sans-serif" font-size="11">{label}</text>"#,
                "\n"
            ),
            cx = MARGIN_LEFT + plot_w - 70.0,
            cy = y,
            color = color_of(label),
            tx = MARGIN_LEFT + plot_w - 60.0,
            ty = y + 4.0,
            label = escape(label),
        );
    }
    svg.push_str("</svg>\n");
    svg
}
