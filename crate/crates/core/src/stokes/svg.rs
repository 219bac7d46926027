use std::fmt::Write;

use num_complex::Complex64;

use super::trace::{LineEnd, StokesTrace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    pub size: f64,
    /// Plot `λ/(1+|λ|)` so the whole complex fits in the unit disk.
    pub compactified: bool,
    /// Half-width of the plotted window (ignored when compactified).
    pub window: Option<f64>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            size: 600.0,
            compactified: false,
            window: None,
        }
    }
}

/// Polylines of the traced lines, turning points as dots, ray labels on the
/// boundary.
pub fn to_svg(trace: &StokesTrace, title: &str, opts: &SvgOptions) -> String {
    let half = if opts.compactified {
        1.05
    } else {
        opts.window
            .unwrap_or_else(|| 2.5 * (0.5 + trace.turning_points.max_modulus()))
    };
    let map = |z: Complex64| -> (f64, f64) {
        let w = if opts.compactified { z / (1.0 + z.norm()) } else { z };
        let s = opts.size / (2.0 * half);
        (opts.size / 2.0 + w.re * s, opts.size / 2.0 - w.im * s)
    };
    let mut out = String::new();
    let sz = opts.size;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{sz}" height="{sz}" viewBox="0 0 {sz} {sz}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, "<title>{}</title>", escape(title)).unwrap();
    if opts.compactified {
        let (cx, cy) = map(Complex64::new(0.0, 0.0));
        let r = sz / (2.0 * half);
        writeln!(
            out,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="none" stroke="#bbb"/>"##
        )
        .unwrap();
    }
    for line in &trace.lines {
        let color = match line.end {
            LineEnd::TurningPoint(_) => "#c0392b",
            LineEnd::Ray(_) => "#1f4e79",
        };
        let pts: Vec<String> = line
            .points
            .iter()
            .map(|&z| {
                let (x, y) = map(z);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }
    for (i, r) in trace.turning_points.roots.iter().enumerate() {
        let (x, y) = map(r.value);
        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="black"/>"#).unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">t{i}</text>"#,
            x + 6.0,
            y - 6.0
        )
        .unwrap();
    }
    for k in 0..5 {
        let ang = if trace.anti_stokes {
            2.0 * k as f64 * std::f64::consts::PI / 5.0
        } else {
            super::ray_angle(k)
        };
        let z = Complex64::from_polar(if opts.compactified { 1e6 } else { 0.92 * half }, ang);
        let (x, y) = map(z);
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="13" fill="gray">{}</text>"#,
            super::centered(k)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::CubicPotential;
    use crate::stokes::{trace_stokes_lines, TraceOptions};

    #[test]
    fn one_polyline_per_line() {
        let tr = trace_stokes_lines(&CubicPotential::real(1.0, 0.0), &TraceOptions::default()).unwrap();
        let svg = to_svg(&tr, "a=1 b=0", &SvgOptions::default());
        assert_eq!(svg.matches("<polyline").count(), 9);
        assert!(svg.starts_with("<svg"));
        let disk = to_svg(
            &tr,
            "x",
            &SvgOptions {
                compactified: true,
                ..Default::default()
            },
        );
        assert!(disk.contains("<circle cx=\"300.00\""));
    }
}
