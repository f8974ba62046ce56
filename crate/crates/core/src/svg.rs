//! SVG drawing of a curve and the pegs of a report.

use std::fmt::Write;

use num_complex::Complex64;

use crate::curve::FourierCurve;
use crate::solver::SolveReport;

const WIDTH: f64 = 800.0;
const CURVE_SAMPLES: usize = 512;

fn sign_color(sign: Option<i8>) -> &'static str {
    match sign {
        Some(1) => "#c0392b",
        Some(-1) => "#2471a3",
        _ => "#7d3c98",
    }
}

fn sign_label(sign: Option<i8>) -> &'static str {
    match sign {
        Some(1) => "+",
        Some(-1) => "-",
        _ => "+/-",
    }
}

struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(curve: &FourierCurve) -> Self {
        let (x0, y0, x1, y1) = curve.bounding_box(CURVE_SAMPLES);
        let (mx, my) = (0.1 * (x1 - x0), 0.1 * (y1 - y0));
        let (min_x, max_x, min_y, max_y) = (x0 - mx, x1 + mx, y0 - my, y1 + my);
        let span_x = (max_x - min_x).max(1e-12);
        let span_y = (max_y - min_y).max(1e-12);
        let scale = WIDTH / span_x;
        Self { min_x, max_y, scale, width: WIDTH, height: span_y * scale }
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        ((z.re - self.min_x) * self.scale, (self.max_y - z.im) * self.scale)
    }
}

/// Draws the curve as one `<path>`, each orbit's peg as one `<polygon>`
/// with its diagonals and a sign label, and the vertex locus of a
/// degenerate family as dots.
pub fn render(curve: &FourierCurve, report: &SolveReport) -> String {
    let f = Frame::new(curve);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}">"#,
        f.width, f.height, f.width, f.height
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{:.1}" height="{:.1}" fill="white"/>"#, f.width, f.height);

    let mut d = String::new();
    for (i, z) in curve.samples(CURVE_SAMPLES).into_iter().enumerate() {
        let (x, y) = f.map(z);
        let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
    }
    d.push('Z');
    let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="black" stroke-width="2"/>"#);

    if report.degenerate_family {
        let _ = writeln!(out, r#"<g fill="{}" fill-opacity="0.35">"#, sign_color(None));
        for q in &report.degeneracy.chain {
            for t in q.angles() {
                let (x, y) = f.map(curve.eval(t));
                let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3"/>"#);
            }
        }
        let _ = writeln!(out, "</g>");
    }

    for (k, orbit) in report.orbits.iter().enumerate() {
        let color = sign_color(orbit.orbit_sign);
        let v = orbit.peg.vertices.map(|z| f.map(z));
        let pts: Vec<String> = v.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.08" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        for (a, b) in [(0, 2), (1, 3)] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-dasharray="4 3"/>"#,
                v[a].0, v[a].1, v[b].0, v[b].1
            );
        }
        let (x, y) = f.map(orbit.peg.diag_point);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14" fill="{color}">{k} ({})</text>"#,
            x + 4.0,
            y - 4.0 - 16.0 * k as f64,
            sign_label(orbit.orbit_sign)
        );
    }
    out.push_str("</svg>\n");
    out
}
