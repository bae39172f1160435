//! Static SVG of the Stokes rays.

use std::f64::consts::TAU;
use std::fmt::Write;

use crate::stokes::SectorLayout;

const SIZE: f64 = 480.0;
const RADIUS: f64 = 180.0;

fn point(angle: f64, r: f64) -> (f64, f64) {
    // SVG y grows downward
    (SIZE / 2.0 + r * angle.cos(), SIZE / 2.0 - r * angle.sin())
}

/// Rays d₁..d_{2l} labelled, Sect₀ shaded, and the log branch cut (along d₁) dashed.
pub fn plot_rays(layout: &SectorLayout) -> String {
    let mut s = String::new();
    let c = SIZE / 2.0;
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{RADIUS}" fill="none" stroke="#bbbbbb"/>"##);

    if !layout.rays.is_empty() {
        let (lo, hi) = layout.sect0();
        let (x0, y0) = point(lo, RADIUS);
        let (x1, y1) = point(hi, RADIUS);
        let large = if hi - lo > TAU / 2.0 { 1 } else { 0 };
        let _ = writeln!(
            s,
            r##"<path d="M {c} {c} L {x0:.2} {y0:.2} A {RADIUS} {RADIUS} 0 {large} 0 {x1:.2} {y1:.2} Z" fill="#cfe3ff" stroke="none"><title>Sect0</title></path>"##
        );
        let (lx, ly) = point(layout.bisector(0), RADIUS * 0.55);
        let _ = writeln!(s, r##"<text x="{lx:.2}" y="{ly:.2}" font-size="14" text-anchor="middle" fill="#1f4e8c">Sect0</text>"##);
    }

    for (k, &angle) in layout.rays.iter().enumerate() {
        let (x, y) = point(angle, RADIUS);
        let colour = if k < layout.l { "#2b6cb0" } else { "#718096" };
        let _ = writeln!(s, r#"<line x1="{c}" y1="{c}" x2="{x:.2}" y2="{y:.2}" stroke="{colour}" stroke-width="2"/>"#);
        let (tx, ty) = point(angle, RADIUS + 18.0);
        let _ = writeln!(s, r#"<text x="{tx:.2}" y="{ty:.2}" font-size="13" text-anchor="middle" dominant-baseline="middle">d{}</text>"#, k + 1);
    }

    if let Some(&d1) = layout.rays.first() {
        let (x, y) = point(d1, RADIUS + 40.0);
        let _ = writeln!(
            s,
            r##"<line x1="{c}" y1="{c}" x2="{x:.2}" y2="{y:.2}" stroke="#c53030" stroke-width="1.5" stroke-dasharray="6 4"><title>branch cut of log z</title></line>"##
        );
    }
    let (bx, by) = point(layout.base_direction, RADIUS);
    let _ = writeln!(s, r##"<line x1="{c}" y1="{c}" x2="{bx:.2}" y2="{by:.2}" stroke="#2f855a" stroke-width="1" stroke-dasharray="2 3"><title>base direction</title></line>"##);
    let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="3" fill="#000000"/>"##);
    s.push_str("</svg>\n");
    s
}
