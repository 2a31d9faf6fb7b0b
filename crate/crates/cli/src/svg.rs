//! Minimal scatter-plot SVG for section and strobe output.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (-1.0, 1.0)
    } else if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Scatter of `points` with axis labels and the data range in the corners.
pub fn scatter(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (x0, x1) = span(points.iter().map(|p| p.0));
    let (y0, y1) = span(points.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, body: &str| {
        writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{body}</text>"#
        )
        .unwrap();
    };
    text(&mut s, WIDTH / 2.0, HEIGHT - 12.0, "middle", x_label);
    text(&mut s, 12.0, HEIGHT / 2.0, "start", y_label);
    text(
        &mut s,
        MARGIN,
        HEIGHT - MARGIN + 16.0,
        "start",
        &format!("{x0:.4}"),
    );
    text(
        &mut s,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        "end",
        &format!("{x1:.4}"),
    );
    text(
        &mut s,
        MARGIN - 4.0,
        HEIGHT - MARGIN,
        "end",
        &format!("{y0:.4}"),
    );
    text(
        &mut s,
        MARGIN - 4.0,
        MARGIN + 4.0,
        "end",
        &format!("{y1:.4}"),
    );
    writeln!(s, r#"<g fill="steelblue">"#).unwrap();
    for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1"/>"#, sx(x), sy(y)).unwrap();
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_circle_per_finite_point() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (f64::NAN, 1.0)];
        let svg = scatter(&pts, "x", "y");
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_ranges() {
        assert_eq!(span([3.0, 3.0].into_iter()), (2.0, 4.0));
        assert_eq!(span(std::iter::empty()), (-1.0, 1.0));
        assert!(scatter(&[], "x", "y").contains("</svg>"));
    }
}
