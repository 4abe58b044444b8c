//! Minimal SVG output: complex-plane scatter plots and grid heatmaps.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::compare::DistanceField;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Cross,
    Square,
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [Complex64],
    pub marker: Marker,
}

const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

fn marker_svg(out: &mut String, marker: Marker, x: f64, y: f64, color: &str) {
    let r = 5.0;
    match marker {
        Marker::Circle => {
            let _ = write!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            );
        }
        Marker::Cross => {
            let _ = write!(
                out,
                r#"<path d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}" stroke="{color}" stroke-width="1.5"/>"#,
                x - r,
                y - r,
                x + r,
                y + r,
                x - r,
                y + r,
                x + r,
                y - r
            );
        }
        Marker::Square => {
            let _ = write!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{}" height="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                x - r,
                y - r,
                2.0 * r,
                2.0 * r
            );
        }
    }
    out.push('\n');
}

/// Eigenvalues of several spectra over the unit circle.
pub fn spectrum_scatter(title: &str, series: &[Series<'_>]) -> String {
    let extent = series
        .iter()
        .flat_map(|s| s.points.iter())
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(1.0f64, f64::max)
        * 1.15;
    let scale = (SIZE - 2.0 * MARGIN) / (2.0 * extent);
    let cx = SIZE / 2.0;
    let cy = SIZE / 2.0;
    let px = |z: &Complex64| (cx + z.re * scale, cy - z.im * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{cx}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<line x1="{MARGIN}" y1="{cy}" x2="{:.2}" y2="{cy}" stroke="#999"/>"##,
        SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r##"<line x1="{cx}" y1="{MARGIN}" x2="{cx}" y2="{:.2}" stroke="#999"/>"##,
        SIZE - MARGIN
    );
    let _ = writeln!(
        out,
        r##"<circle cx="{cx}" cy="{cy}" r="{scale:.2}" fill="none" stroke="#555" stroke-dasharray="4 3"/>"##
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        for z in s.points {
            let (x, y) = px(z);
            marker_svg(&mut out, s.marker, x, y, color);
        }
        let ly = SIZE - MARGIN / 2.0 - 16.0 * (series.len() - 1 - k) as f64;
        marker_svg(&mut out, s.marker, MARGIN, ly - 4.0, color);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            MARGIN + 12.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn color_ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.8).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of `log10` distance over the sweep grid; failed cells are grey.
pub fn distance_heatmap(title: &str, field: &DistanceField) -> String {
    let (nx, ny) = (field.nx(), field.ny());
    let logs: Vec<f64> = field
        .values
        .iter()
        .map(|v| if v.is_finite() { v.max(1e-300).log10() } else { f64::NAN })
        .collect();
    let lo = logs.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let w = (SIZE - 2.0 * MARGIN) / nx as f64;
    let h = (SIZE - 2.0 * MARGIN) / ny as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    for i in 0..nx {
        for j in 0..ny {
            let v = logs[i * ny + j];
            let fill = if v.is_finite() {
                color_ramp((v - lo) / span)
            } else {
                "#bbbbbb".to_string()
            };
            // j grows upwards
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                MARGIN + i as f64 * w,
                SIZE - MARGIN - (j + 1) as f64 * h,
                w + 0.01,
                h + 0.01
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.2}" font-family="sans-serif" font-size="11">log10 distance: {lo:.2} (blue) to {hi:.2} (red)</text>"#,
        SIZE - MARGIN / 3.0
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
