//! Standalone SVG log-log plots with an embedded provenance comment.

use std::fs;
use std::path::Path;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 56.0;

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

/// Plot `ln norm` against `ln t` with a dashed guide line of the predicted
/// slope anchored at the first data point.
pub fn write_loglog_plot(
    path: &Path,
    title: &str,
    series: &[(f64, f64)],
    guide_slope: f64,
    config_hash: &str,
) -> std::io::Result<()> {
    let pts: Vec<(f64, f64)> =
        series.iter().filter(|(t, v)| *t > 0.0 && *v > 0.0).map(|(t, v)| (t.ln(), v.ln())).collect();
    if pts.len() < 2 {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "too few points"));
    }
    let x_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let guide_end = pts[0].1 + guide_slope * (x_max - x_min);
    let y_min = pts.iter().map(|p| p.1).fold(guide_end, f64::min);
    let y_max = pts.iter().map(|p| p.1).fold(pts[0].1, f64::max);
    let pad_y = 0.05 * (y_max - y_min).max(1e-9);
    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| {
        HEIGHT - MARGIN
            - (y - (y_min - pad_y)) / ((y_max + pad_y) - (y_min - pad_y))
                * (HEIGHT - 2.0 * MARGIN)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!("<!-- config: {config_hash} -->\n"));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\">{title}</text>\n",
        MARGIN
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(HEIGHT - MARGIN),
        fmt(WIDTH - MARGIN),
        fmt(HEIGHT - MARGIN)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(HEIGHT - MARGIN)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">ln t</text>\n",
        fmt(WIDTH / 2.0),
        fmt(HEIGHT - MARGIN / 3.0)
    ));
    svg.push_str(&format!(
        "<text x=\"12\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 12 {})\">ln norm</text>\n",
        fmt(HEIGHT / 2.0),
        fmt(HEIGHT / 2.0)
    ));
    // Guide line of the predicted slope.
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888888\" stroke-dasharray=\"6 4\"/>\n",
        fmt(sx(x_min)),
        fmt(sy(pts[0].1)),
        fmt(sx(x_max)),
        fmt(sy(guide_end))
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"#888888\">slope {guide_slope:.4}</text>\n",
        fmt(sx(x_max) - 120.0),
        fmt(sy(guide_end) - 8.0)
    ));
    // Data polyline.
    let coords: Vec<String> =
        pts.iter().map(|&(x, y)| format!("{},{}", fmt(sx(x)), fmt(sy(y)))).collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    ));
    for &(x, y) in &pts {
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.2\" fill=\"#1f5fbf\"/>\n",
            fmt(sx(x)),
            fmt(sy(y))
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)
}
