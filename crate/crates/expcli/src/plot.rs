//! Minimal log-log SVG plot of median |deviation| against dimension.

use std::fmt::Write as _;
use std::path::Path;

use crate::experiments::median_abs_deviation_by_dim;
use crate::record::RunRecord;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;

pub fn render_svg(records: &[RunRecord]) -> Result<String, CliError> {
    let first = records
        .first()
        .ok_or_else(|| CliError::Config("cannot plot an empty record list".into()))?;
    let experiment = first.experiment.as_str();
    let points: Vec<(f64, f64)> = median_abs_deviation_by_dim(records, experiment)
        .into_iter()
        .filter(|&(d, y)| d > 0 && y > 0.0)
        .map(|(d, y)| ((d as f64).log10(), y.log10()))
        .collect();
    if points.is_empty() {
        return Err(CliError::Config(format!(
            "no positive deviations to plot for {experiment}"
        )));
    }

    // guides through the first point with slopes −1 and −2
    let (x0, y0) = points[0];
    let x_last = points[points.len() - 1].0;
    let (x_min, x_max) = if x_last > x0 {
        (x0, x_last)
    } else {
        (x0 - 0.5, x0 + 0.5)
    };
    let guides = [("1/N", -1.0), ("1/N\u{b2}", -2.0)];
    let mut y_lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut y_hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    for (_, slope) in guides {
        y_lo = y_lo.min(y0 + slope * (x_max - x0));
        y_hi = y_hi.max(y0);
    }
    if y_hi - y_lo < 1e-9 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }

    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        w,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">log10(dimension)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="20" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {})">log10(median |deviation|)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )
    .unwrap();
    writeln!(
        w,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        xml_escape(experiment)
    )
    .unwrap();
    for (x, anchor) in [(x_min, "start"), (x_max, "end")] {
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}" font-size="12">{:.2}</text>"#,
            sx(x),
            HEIGHT - MARGIN + 16.0,
            x
        )
        .unwrap();
    }
    for y in [y_lo, y_hi] {
        writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{:.2}</text>"#,
            MARGIN - 6.0,
            sy(y) + 4.0,
            y
        )
        .unwrap();
    }
    for (i, (label, slope)) in guides.iter().enumerate() {
        let y1 = y0 + slope * (x_max - x0);
        writeln!(
            w,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="{}"/>"##,
            sx(x_min),
            sy(y0 + slope * (x_min - x0)),
            sx(x_max),
            sy(y1),
            if i == 0 { "6 4" } else { "2 3" }
        )
        .unwrap();
        writeln!(
            w,
            r##"<text x="{:.2}" y="{:.2}" font-size="12" fill="#555">{}</text>"##,
            sx(x_max) + 4.0,
            sy(y1),
            label
        )
        .unwrap();
    }
    let poly: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    writeln!(
        w,
        r##"<polyline points="{}" fill="none" stroke="#1f5fbf" stroke-width="2"/>"##,
        poly.join(" ")
    )
    .unwrap();
    for &(x, y) in &points {
        writeln!(
            w,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f5fbf"/>"##,
            sx(x),
            sy(y)
        )
        .unwrap();
    }
    writeln!(w, "</svg>").unwrap();
    Ok(svg)
}

/// Renders and writes; nothing is written on error.
pub fn emit_plot(records: &[RunRecord], path: &Path) -> Result<(), CliError> {
    let svg = render_svg(records)?;
    std::fs::write(path, svg).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truncated() -> Vec<RunRecord> {
        [7usize, 21, 101, 1001]
            .iter()
            .map(|&n| {
                let v = freebell::bell::truncated_chsh_norm(n).unwrap();
                RunRecord::new("chsh-truncated", n, 0, 0, v, 2.0 * std::f64::consts::SQRT_2)
            })
            .collect()
    }

    #[test]
    fn empty_records_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.svg");
        assert!(emit_plot(&[], &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn deterministic_and_well_formed() {
        let a = render_svg(&truncated()).unwrap();
        let b = render_svg(&truncated()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(r#"version="1.1""#));
        assert!(a.contains("<polyline"));
        assert!(a.contains("1/N"));
        assert_eq!(a.matches("<line").count(), 2);
        assert!(a.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_plot(&truncated(), Path::new("/nonexistent-dir/x/plot.svg")).unwrap_err();
        assert!(matches!(err, CliError::Io(_)));
    }
}
