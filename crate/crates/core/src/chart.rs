//! Standalone SVG charts for the analysis products: scatter plots for
//! dependence/interaction extracts, line-with-band for cohort curves,
//! horizontal bars for importance tables, and grids for heatmaps.
//!
//! Output is plain SVG text built with deterministic formatting, so chart
//! bytes are reproducible.

use crate::analysis::{CohortCurve, DependenceExtract, HeatmapMatrix, ImportanceRanking};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 120.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 58.0;

fn fmt(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{v:.3}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Frame {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        for x in xs {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for y in ys {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        if !x_min.is_finite() {
            x_min = 0.0;
            x_max = 1.0;
        }
        if !y_min.is_finite() {
            y_min = 0.0;
            y_max = 1.0;
        }
        if x_min == x_max {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if y_min == y_max {
            y_min -= 0.5;
            y_max += 0.5;
        }
        Frame { x_min, x_max, y_min, y_max }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(title: &str) -> String {
    let mut svg = format!(
        r#"<svg version="1.1" width="{WIDTH}" height="{HEIGHT}" xmlns="http://www.w3.org/2000/svg">"#
    );
    svg.push_str(&format!(
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="26" text-anchor="middle" font-family="sans-serif" font-size="16" font-weight="bold">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    ));
    svg
}

fn axes(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    svg.push_str(&format!(
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let px = frame.px(xv);
        let py = frame.py(yv);
        svg.push_str(&format!(
            r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            y0 + 4.0,
            y0 + 18.0,
            fmt(xv)
        ));
        svg.push_str(&format!(
            r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/><text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 4.0,
            x0 - 8.0,
            py + 4.0,
            fmt(yv)
        ));
    }
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    ));
}

/// Blue-to-red colour ramp over [0, 1].
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let red = (40.0 + t * 182.0).round() as u8;
    let green = (70.0 + (1.0 - (2.0 * t - 1.0).abs()) * 90.0).round() as u8;
    let blue = (200.0 - t * 160.0).round() as u8;
    format!("rgb({red},{green},{blue})")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter plot of a dependence or interaction extract, coloured by the
/// extract's colour feature.
pub fn scatter_chart(title: &str, extract: &DependenceExtract) -> String {
    let frame = Frame::new(
        extract.rows.iter().map(|r| r.feature_value),
        extract.rows.iter().map(|r| r.value),
    );
    let (c_min, c_max) = extract
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.color_value), hi.max(r.color_value))
        });
    let c_span = if c_max > c_min { c_max - c_min } else { 1.0 };

    let mut svg = open_svg(title);
    axes(&mut svg, &frame, &extract.feature, "attribution (log-odds)");
    for row in &extract.rows {
        let t = (row.color_value - c_min) / c_span;
        svg.push_str(&format!(
            r#"<circle cx="{}" cy="{}" r="2" fill="{}" fill-opacity="0.55"/>"#,
            fmt(frame.px(row.feature_value)),
            fmt(frame.py(row.value)),
            ramp(t)
        ));
    }
    // Colour legend.
    let legend_x = WIDTH - MARGIN_RIGHT + 24.0;
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        let y = frame.py(frame.y_min + t * (frame.y_max - frame.y_min));
        svg.push_str(&format!(
            r#"<rect x="{legend_x}" y="{}" width="14" height="{}" fill="{}"/>"#,
            fmt(y - 10.0),
            fmt(11.0),
            ramp(t)
        ));
    }
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{} {}</text>"#,
        legend_x - 6.0,
        MARGIN_TOP - 6.0,
        escape(&extract.color_feature),
        fmt(c_max)
    ));
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
        legend_x - 6.0,
        HEIGHT - MARGIN_BOTTOM + 14.0,
        fmt(c_min)
    ));
    svg.push_str("</svg>");
    svg
}

/// Cohort curve as a line with its confidence band.
pub fn cohort_chart(title: &str, curve: &CohortCurve) -> String {
    let frame = Frame::new(
        curve.points.iter().map(|p| p.cohort_value as f64),
        curve.points.iter().flat_map(|p| [p.ci_low, p.ci_high]),
    );
    let mut svg = open_svg(title);
    axes(&mut svg, &frame, &curve.cohort_key, &format!("mean |phi({})|", curve.feature));

    if curve.points.len() > 1 {
        let mut band = String::from("M");
        for p in &curve.points {
            band.push_str(&format!(
                "{} {} L",
                fmt(frame.px(p.cohort_value as f64)),
                fmt(frame.py(p.ci_high))
            ));
        }
        for p in curve.points.iter().rev() {
            band.push_str(&format!(
                "{} {} L",
                fmt(frame.px(p.cohort_value as f64)),
                fmt(frame.py(p.ci_low))
            ));
        }
        band.pop();
        svg.push_str(&format!(
            r#"<path d="{band}Z" fill="steelblue" fill-opacity="0.25" stroke="none"/>"#
        ));
    }

    let mut line = String::from("M");
    for (i, p) in curve.points.iter().enumerate() {
        if i > 0 {
            line.push_str(" L");
        }
        line.push_str(&format!(
            "{} {}",
            fmt(frame.px(p.cohort_value as f64)),
            fmt(frame.py(p.mean_abs))
        ));
    }
    svg.push_str(&format!(
        r#"<path d="{line}" stroke="steelblue" stroke-width="2" fill="none"/>"#
    ));
    svg.push_str("</svg>");
    svg
}

/// Horizontal bar chart for importance rankings and group tables.
pub fn bar_chart(title: &str, labels: &[String], values: &[f64], value_label: &str) -> String {
    assert_eq!(labels.len(), values.len());
    let max = values.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
    let mut svg = open_svg(title);
    let inner_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT - 90.0;
    let row_h = ((HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / labels.len() as f64).min(30.0);
    for (i, (label, &v)) in labels.iter().zip(values).enumerate() {
        let y = MARGIN_TOP + i as f64 * row_h;
        let w = v / max * inner_w;
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            MARGIN_LEFT + 86.0,
            fmt(y + row_h * 0.62),
            escape(label)
        ));
        svg.push_str(&format!(
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="steelblue"/>"#,
            MARGIN_LEFT + 92.0,
            fmt(y + row_h * 0.18),
            fmt(w.max(0.0)),
            fmt(row_h * 0.62)
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{}</text>"#,
            MARGIN_LEFT + 96.0 + w.max(0.0),
            fmt(y + row_h * 0.62),
            fmt(v)
        ));
    }
    svg.push_str(&format!(
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(value_label)
    ));
    svg.push_str("</svg>");
    svg
}

/// Importance ranking bar chart, strongest feature on top.
pub fn importance_chart(title: &str, ranking: &ImportanceRanking) -> String {
    let labels: Vec<String> = ranking.entries.iter().map(|(n, _)| n.clone()).collect();
    let values: Vec<f64> = ranking.entries.iter().map(|(_, v)| *v).collect();
    bar_chart(title, &labels, &values, "mean |phi| (log-odds)")
}

/// Cool-to-warm grid of a symmetric matrix.
pub fn heatmap_chart(title: &str, heatmap: &HeatmapMatrix) -> String {
    let m = heatmap.feature_names.len();
    let mut svg = open_svg(title);
    let grid = (WIDTH.min(HEIGHT) - MARGIN_TOP - MARGIN_BOTTOM - 60.0).max(100.0);
    let cell = grid / m as f64;
    let x0 = MARGIN_LEFT + 120.0;
    let y0 = MARGIN_TOP + 30.0;
    let max = heatmap
        .values
        .iter()
        .flatten()
        .cloned()
        .fold(0.0f64, f64::max)
        .max(1e-12);
    for (j, row) in heatmap.values.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            svg.push_str(&format!(
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{} x {}: {}</title></rect>"#,
                fmt(x0 + k as f64 * cell),
                fmt(y0 + j as f64 * cell),
                fmt(cell),
                fmt(cell),
                ramp(v / max),
                escape(&heatmap.feature_names[j]),
                escape(&heatmap.feature_names[k]),
                fmt(v)
            ));
        }
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="9">{}</text>"#,
            fmt(x0 - 4.0),
            fmt(y0 + j as f64 * cell + cell * 0.7),
            escape(&heatmap.feature_names[j])
        ));
        svg.push_str(&format!(
            r#"<text x="{}" y="{}" text-anchor="start" font-family="sans-serif" font-size="9" transform="rotate(45 {} {})">{}</text>"#,
            fmt(x0 + j as f64 * cell + cell * 0.4),
            fmt(y0 + grid + 10.0),
            fmt(x0 + j as f64 * cell + cell * 0.4),
            fmt(y0 + grid + 10.0),
            escape(&heatmap.feature_names[j])
        ));
    }
    svg.push_str("</svg>");
    svg
}
