use std::fmt::Write as _;

use nodalgraph::nodal::NodalReport;

use crate::format::fmt_g;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

/// Scatter of `ν_n / n` against `n` with a dashed line per candidate ratio.
pub fn ratio_plot(series: &[NodalReport], candidates: &[f64]) -> String {
    let n_max = series.len().max(1) as f64;
    let y_max = series
        .iter()
        .map(|r| r.ratio)
        .chain(candidates.iter().copied())
        .fold(1.0f64, f64::max)
        * 1.05;
    let x = |n: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * n / n_max;
    let y = |r: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * r / y_max;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (x(0.0), x(n_max), y(0.0), y(y_max));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2} {y1:.2} L{x0:.2} {y0:.2} L{x1:.2} {y0:.2}" stroke="black" fill="none"/>"#
    );
    for &c in candidates {
        let yc = y(c);
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.2}" y1="{yc:.2}" x2="{x1:.2}" y2="{yc:.2}" stroke="#c44" stroke-dasharray="4 3" stroke-width="0.8"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" font-family="sans-serif">{}</text>"#,
            x1 + 4.0,
            yc + 3.0,
            fmt_g(c)
        );
    }
    for r in series {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="#246"/>"##,
            x(r.n as f64),
            y(r.ratio)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" font-family="sans-serif" text-anchor="middle">n</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="12" font-family="sans-serif" transform="rotate(-90 15 {:.2})" text-anchor="middle">nu_n / n</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{x0:.2}" y="{:.2}" font-size="10" font-family="sans-serif">1</text>"#,
        y0 + 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{x1:.2}" y="{:.2}" font-size="10" font-family="sans-serif" text-anchor="end">{}</text>"#,
        y0 + 14.0,
        series.len()
    );
    s.push_str("</svg>\n");
    s
}
