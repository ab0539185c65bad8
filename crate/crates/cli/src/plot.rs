//! SVG scatter plot of a 2-D instance with optional cluster boxes.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use hrcp_core::{Clustering, Instance};

const SIZE: f64 = 640.0;
const PAD: f64 = 0.05;
const RADIUS: f64 = 3.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn new(instance: &Instance) -> Frame {
        let (lo, hi) = (instance.lo(), instance.hi());
        let axis = |t: usize| {
            let range = hi[t] - lo[t];
            let range = if range > 0.0 { range } else { 1.0 };
            let start = lo[t] - PAD * range;
            (start, SIZE / (range * (1.0 + 2.0 * PAD)))
        };
        let (x0, sx) = axis(0);
        let (y0, sy) = axis(1);
        Frame { x0, y0, sx, sy }
    }

    fn x(&self, v: f64) -> f64 {
        (v - self.x0) * self.sx
    }

    // SVG's y axis points down.
    fn y(&self, v: f64) -> f64 {
        SIZE - (v - self.y0) * self.sy
    }
}

/// Renders points as circles and each nonempty cluster box as an unfilled
/// rectangle. The viewport extends 5% beyond the data on every side.
pub fn plot_svg(instance: &Instance, clustering: Option<&Clustering>) -> Result<String> {
    if instance.dim() != 2 {
        bail!("plotting requires d = 2, instance has d = {}", instance.dim());
    }
    let frame = Frame::new(instance);
    let labels = clustering.map(|c| c.labels(instance.len()));
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    if let Some(c) = clustering {
        for (k, b) in c.boxes().iter().enumerate() {
            let Some(b) = b else { continue };
            if b.dim() != 2 {
                bail!("cluster {k} box has dimension {}", b.dim());
            }
            let (x, y) = (frame.x(b.lower[0]), frame.y(b.upper[1]));
            let (w, h) = (frame.x(b.upper[0]) - x, frame.y(b.lower[1]) - y);
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                PALETTE[k % PALETTE.len()]
            );
        }
    }
    for (i, p) in instance.points().enumerate() {
        let fill = match labels.as_ref().and_then(|l| l[i]) {
            Some(c) => PALETTE[c % PALETTE.len()],
            None => "#000000",
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{RADIUS}" fill="{fill}"/>"#,
            frame.x(p[0]),
            frame.y(p[1])
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
