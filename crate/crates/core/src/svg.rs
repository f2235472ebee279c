//! Minimal static SVG renderers for time series and sweep grids.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn finite_range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        None
    } else if lo == hi {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#);
    let text = |out: &mut String, px: f64, py: f64, anchor: &str, s: &str| {
        let _ = writeln!(
            out,
            r#"<text x="{px}" y="{py}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
            escape(s)
        );
    };
    text(out, l, b + 15.0, "middle", &format!("{:.3}", x.0));
    text(out, r, b + 15.0, "middle", &format!("{:.3}", x.1));
    text(out, l - 5.0, b, "end", &format!("{:.3}", y.0));
    text(out, l - 5.0, t + 4.0, "end", &format!("{:.3}", y.1));
    text(out, (l + r) / 2.0, HEIGHT - 12.0, "middle", x_label);
    text(out, 12.0, (t + b) / 2.0, "start", y_label);
}

/// Polyline of `(x, y)`; non-finite points break the line.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let xr = finite_range(points.iter().map(|p| p.0)).unwrap_or((0.0, 1.0));
    let yr = finite_range(points.iter().map(|p| p.1)).unwrap_or((0.0, 1.0));
    axis_labels(&mut out, x_label, y_label, xr, yr);
    let sx = |x: f64| MARGIN + (x - xr.0) / (xr.1 - xr.0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - 2.0 * MARGIN);
    let mut path = String::new();
    let mut pen_down = false;
    for &(x, y) in points {
        if x.is_finite() && y.is_finite() {
            let _ = write!(path, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
            pen_down = true;
        } else {
            pen_down = false;
        }
    }
    let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, path.trim_end());
    out.push_str("</svg>\n");
    out
}

/// Grey-scale heatmap; `values[i][j]` is drawn at column `i`, row `j` (row 0
/// at the bottom). Missing cells are red.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    x_range: (f64, f64),
    y_range: (f64, f64),
    values: &[Vec<Option<f64>>],
) -> String {
    let mut out = String::new();
    header(&mut out, title);
    axis_labels(&mut out, x_label, y_label, x_range, y_range);
    let nx = values.len();
    let ny = values.first().map_or(0, Vec::len);
    if nx == 0 || ny == 0 {
        out.push_str("</svg>\n");
        return out;
    }
    let (lo, hi) = finite_range(values.iter().flatten().flatten().copied()).unwrap_or((0.0, 1.0));
    let cw = (WIDTH - 2.0 * MARGIN) / nx as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / ny as f64;
    for (i, column) in values.iter().enumerate() {
        for (j, v) in column.iter().enumerate() {
            let fill = match v {
                Some(v) if v.is_finite() => {
                    let level = (255.0 * (1.0 - (v - lo) / (hi - lo))).round().clamp(0.0, 255.0) as u8;
                    format!("rgb({level},{level},{level})")
                }
                _ => "red".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                MARGIN + i as f64 * cw,
                HEIGHT - MARGIN - (j + 1) as f64 * ch,
                cw,
                ch
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">black = {hi:.4}, white = {lo:.4}</text>"#,
        WIDTH - MARGIN,
        MARGIN - 8.0
    );
    out.push_str("</svg>\n");
    out
}
