use std::fmt::Write as _;

use super::trace_file::TraceFile;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

fn column<'a>(trace: &'a TraceFile, name: &str) -> Result<&'a [f64]> {
    trace.column(name).ok_or_else(|| Error::validation(format!("trace has no column `{name}`")))
}

/// Line plot of the trace's solid/dashed pair with the threshold guide.
///
/// The y range runs from min(0, data) to twice the threshold, so a curve
/// that grows without bound is clipped at the top of the frame.
pub fn emit_svg(trace: &TraceFile) -> Result<String> {
    let plot = trace.plot.as_ref().ok_or_else(|| Error::validation("trace carries no plot layout"))?;
    if trace.rows() < 2 {
        return Err(Error::validation("a plot needs at least two points"));
    }
    let x = column(trace, &plot.x)?;
    let solid = column(trace, &plot.solid)?;
    let dashed = column(trace, &plot.dashed)?;

    let (x0, x1) = (x[0], x[x.len() - 1]);
    if !(x1 > x0) {
        return Err(Error::validation("plot x range is empty"));
    }
    let finite_min = solid.iter().chain(dashed).copied().filter(|v| v.is_finite()).fold(0.0, f64::min);
    let (y0, y1) = (finite_min, 2.0 * plot.threshold);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| {
        let v = if v.is_finite() { v.clamp(y0, y1) } else { y1 };
        TOP + (y1 - v) / (y1 - y0) * ph
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            TOP + ph,
            TOP + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            TOP + ph + 20.0,
            tick_label(xv)
        );
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        plot.x_label
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        plot.y_label
    );
    let ty = sy(plot.threshold);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{ty:.2}" x2="{:.2}" y2="{ty:.2}" stroke="gray" stroke-width="1" stroke-dasharray="2,3"/>"#,
        LEFT + pw
    );
    for (values, dash) in [(solid, None), (dashed, Some("8,5"))] {
        let pts: Vec<String> = x.iter().zip(values).map(|(&a, &b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
        let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" stroke-width="1.5"{dash} points="{}"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::parse_config;
    use crate::io::trace_file::{Column, PlotHint};

    fn trace(n: usize) -> TraceFile {
        let cfg = parse_config("scenario = single-mode\n").unwrap();
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
        TraceFile::new(
            "t.csv",
            &cfg,
            vec![
                Column::real("u", x.clone()),
                Column::real("a", x.iter().map(|v| 0.25 * (-2.0 * v).exp()).collect()),
                Column::real("b", x.iter().map(|v| 0.25 + v).collect()),
            ],
        )
        .with_plot(PlotHint {
            x: "u".into(),
            solid: "b".into(),
            dashed: "a".into(),
            threshold: 0.25,
            x_label: "u".into(),
            y_label: "variance".into(),
        })
    }

    #[test]
    fn deterministic_bytes() {
        let t = trace(20);
        let a = emit_svg(&t).unwrap();
        assert_eq!(a, emit_svg(&t).unwrap());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<polyline").count(), 2);
        assert!(a.contains("stroke-dasharray=\"8,5\""));
    }

    #[test]
    fn single_point_rejected() {
        assert!(matches!(emit_svg(&trace(1)), Err(Error::Validation(_))));
    }

    #[test]
    fn labels() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(0.25), "0.25");
        assert_eq!(tick_label(3.0), "3");
        assert_eq!(tick_label(2e-5), "2.0e-5");
    }
}
