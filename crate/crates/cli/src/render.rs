//! Deterministic SVG drawings of planar frameworks.
//!
//! Edges are `<line>` elements (the free edge dashed), vertices are labelled
//! dots and flex arrows are `<path class="arrow">` elements. The `y` axis
//! points up. Coordinates are printed with a fixed number of decimals, so the
//! same input always gives the same bytes.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use framesaddle::fixtures::vertex_label;
use framesaddle::Framework64;
use nalgebra::DVector;

/// Displacement drawn at a vertex, in framework units before scaling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrow {
    pub vertex: usize,
    pub dx: f64,
    pub dy: f64,
}

const WIDTH_PX: f64 = 600.0;
/// Longest arrow as a fraction of the framework's extent.
const ARROW_FRACTION: f64 = 0.25;
/// Vertices moving less than this fraction of the fastest one get no arrow.
const ARROW_CUTOFF: f64 = 1e-3;

/// Arrows for a planar velocity `u`, one per vertex that visibly moves.
pub fn flex_arrows(u: &DVector<f64>) -> Vec<Arrow> {
    let speeds: Vec<f64> = (0..u.len() / 2)
        .map(|v| u[2 * v].hypot(u[2 * v + 1]))
        .collect();
    let fastest = speeds.iter().copied().fold(0.0, f64::max);
    if fastest == 0.0 || fastest.is_nan() {
        return Vec::new();
    }
    speeds
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > ARROW_CUTOFF * fastest)
        .map(|(v, _)| Arrow {
            vertex: v,
            dx: u[2 * v],
            dy: u[2 * v + 1],
        })
        .collect()
}

struct Bounds {
    lo_x: f64,
    lo_y: f64,
    hi_x: f64,
    hi_y: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            lo_x: f64::INFINITY,
            lo_y: f64::INFINITY,
            hi_x: f64::NEG_INFINITY,
            hi_y: f64::NEG_INFINITY,
        }
    }
}

impl Bounds {
    fn grow(&mut self, (x, y): (f64, f64)) {
        self.lo_x = self.lo_x.min(x);
        self.hi_x = self.hi_x.max(x);
        self.lo_y = self.lo_y.min(y);
        self.hi_y = self.hi_y.max(y);
    }

    fn extent(&self) -> f64 {
        (self.hi_x - self.lo_x).max(self.hi_y - self.lo_y)
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

/// Draws `fw`'s topology at `coords` (defaults to the framework's own
/// configuration) with optional arrows.
pub fn render_svg(
    fw: &Framework64,
    coords: Option<&DVector<f64>>,
    arrows: &[Arrow],
) -> Result<String> {
    if fw.dim() != 2 {
        bail!(
            "rendering needs a planar framework (dim = 2, got {}); 3D rendering is unsupported",
            fw.dim()
        );
    }
    let x = coords.unwrap_or(fw.config().coords());
    if x.len() != fw.n_coords() {
        bail!(
            "{} coordinates for a framework with {}",
            x.len(),
            fw.n_coords()
        );
    }
    let n = fw.n_vertices();
    // SVG's y axis points down
    let pt = |v: usize| (x[2 * v], -x[2 * v + 1]);

    let mut bounds = Bounds::default();
    (0..n).for_each(|v| bounds.grow(pt(v)));
    let extent = bounds.extent();
    let extent = if extent > 0.0 { extent } else { 1.0 };

    let longest = arrows.iter().map(|a| a.dx.hypot(a.dy)).fold(0.0, f64::max);
    let scale = if longest > 0.0 {
        ARROW_FRACTION * extent / longest
    } else {
        0.0
    };
    let tips: Vec<((f64, f64), (f64, f64))> = arrows
        .iter()
        .filter(|a| a.vertex < n)
        .map(|a| {
            let (px, py) = pt(a.vertex);
            ((px, py), (px + scale * a.dx, py - scale * a.dy))
        })
        .collect();
    tips.iter().for_each(|&(_, tip)| bounds.grow(tip));
    let Bounds {
        lo_x,
        lo_y,
        hi_x,
        hi_y,
    } = bounds;

    let w = (hi_x - lo_x).max(1e-3 * extent);
    let h = (hi_y - lo_y).max(1e-3 * extent);
    let margin = 0.1 * w.max(h);
    let (vx, vy, vw, vh) = (
        lo_x - margin,
        lo_y - margin,
        w + 2.0 * margin,
        h + 2.0 * margin,
    );
    let stroke = 0.006 * vw.max(vh);
    let radius = 2.0 * stroke;
    let font = 6.0 * stroke;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        num(vx),
        num(vy),
        num(vw),
        num(vh),
        num(WIDTH_PX),
        num(WIDTH_PX * vh / vw)
    );
    let _ = writeln!(
        s,
        r#"<defs><marker id="head" viewBox="0 0 10 10" refX="8" refY="5" markerWidth="6" markerHeight="6" orient="auto"><polygon points="0,0 10,5 0,10" fill="red"/></marker></defs>"#
    );
    let _ = writeln!(
        s,
        r#"<g class="edges" stroke="black" stroke-width="{}" stroke-linecap="round">"#,
        num(stroke)
    );
    let free = fw.topology().free_edge();
    for (i, e) in fw.topology().edges().iter().enumerate() {
        let (ax, ay) = pt(e.a);
        let (bx, by) = pt(e.b);
        let dash = if i == free {
            format!(
                r#" class="free" stroke-dasharray="{} {}""#,
                num(3.0 * stroke),
                num(2.0 * stroke)
            )
        } else {
            String::new()
        };
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"{dash}/>"#,
            num(ax),
            num(ay),
            num(bx),
            num(by)
        );
    }
    let _ = writeln!(s, "</g>");
    if !tips.is_empty() {
        let _ = writeln!(
            s,
            r#"<g class="arrows" stroke="red" stroke-width="{}" fill="none">"#,
            num(stroke)
        );
        for ((px, py), (tx, ty)) in &tips {
            let _ = writeln!(
                s,
                r#"<path class="arrow" d="M {} {} L {} {}" marker-end="url(#head)"/>"#,
                num(*px),
                num(*py),
                num(*tx),
                num(*ty)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(
        s,
        r#"<g class="vertices" font-size="{}" font-family="sans-serif">"#,
        num(font)
    );
    for v in 0..n {
        let (px, py) = pt(v);
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="{}"/>"#,
            num(px),
            num(py),
            num(radius)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            num(px + 1.5 * radius),
            num(py - 1.5 * radius),
            vertex_label(v)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}
