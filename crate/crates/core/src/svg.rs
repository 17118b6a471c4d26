//! Deterministic SVG emission: one rect per occupied cell, punctures as
//! circles, a frame around the unit square.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::raster::Raster;
use crate::scene::Scene;

const CANVAS: f64 = 512.0;

fn svg_header(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">",
        CANVAS as u32
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{0}\" fill=\"white\" stroke=\"black\"/>",
        CANVAS as u32
    );
}

fn emit_raster(out: &mut String, raster: &Raster, fill: &str) {
    let s = CANVAS / raster.side() as f64;
    for (col, row) in raster.cells() {
        let _ = writeln!(
            out,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"{fill}\"/>",
            col as f64 * s,
            row as f64 * s,
            s,
            s
        );
    }
}

/// SVG for a bare raster.
pub fn raster_svg(raster: &Raster) -> String {
    let mut out = String::new();
    svg_header(&mut out);
    emit_raster(&mut out, raster, "black");
    out.push_str("</svg>\n");
    out
}

/// SVG for a scene: finest bad raster plus puncture circles.
pub fn scene_svg(scene: &Scene) -> String {
    let mut out = String::new();
    svg_header(&mut out);
    if let Some(finest) = scene.bad.last() {
        emit_raster(&mut out, finest, "black");
    }
    for p in scene.all_punctures() {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"2.0\" fill=\"red\"/>",
            p.x.to_f64() * CANVAS,
            p.y.to_f64() * CANVAS
        );
    }
    out.push_str("</svg>\n");
    out
}

/// SVG for a tiling: domains cycle through a fixed palette over the scene's
/// bad set.
pub fn tiling_svg(bad: &Raster, domains: &[Raster]) -> String {
    const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];
    let mut out = String::new();
    svg_header(&mut out);
    for (i, d) in domains.iter().enumerate() {
        emit_raster(&mut out, d, PALETTE[i % PALETTE.len()]);
    }
    emit_raster(&mut out, bad, "black");
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: &Path, svg: &str) -> io::Result<()> {
    std::fs::write(path, svg)
}
