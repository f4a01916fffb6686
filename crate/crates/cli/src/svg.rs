//! Minimal SVG line chart of a metric against the arrival rate.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

pub struct Point {
    pub x: f64,
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], style: &str) {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, coords.join(" "));
}

/// Mean curve with dashed confidence bounds.
pub fn line_chart(title: &str, x_label: &str, points: &[Point]) -> String {
    let (x0, x1) = bounds(points.iter().map(|p| p.x));
    let (y0, y1) = bounds(points.iter().flat_map(|p| [p.low, p.high, p.mean]));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    for (value, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{value}</text>"#,
            sx(value),
            bottom + 15.0
        );
    }
    for value in [y0, y1] {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{value:.4}</text>"#,
            left - 5.0,
            sy(value) + 4.0
        );
    }
    let dashed = r#"stroke="steelblue" stroke-dasharray="4 3""#;
    polyline(&mut out, &points.iter().map(|p| (sx(p.x), sy(p.low))).collect::<Vec<_>>(), dashed);
    polyline(&mut out, &points.iter().map(|p| (sx(p.x), sy(p.high))).collect::<Vec<_>>(), dashed);
    let mean: Vec<(f64, f64)> = points.iter().map(|p| (sx(p.x), sy(p.mean))).collect();
    polyline(&mut out, &mean, r#"stroke="black" stroke-width="2""#);
    for (x, y) in mean {
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
    }
    out.push_str("</svg>\n");
    out
}
