//! SVG rendering of the image of a polar coordinate grid under a map.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polargrid::DiscreteMap;

/// Which grid lines to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureLayout {
    pub rings: usize,
    pub rays: usize,
}

impl FigureLayout {
    /// `n_r / 8` rings and `n_t / 16` rays (at least two of each).
    pub fn default_for(m: &DiscreteMap) -> Self {
        FigureLayout {
            rings: (m.grid.n_radial / 8).max(2),
            rays: (m.grid.n_angular / 16).max(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub kind: &'static str,
    pub index: usize,
    pub t: f64,
    pub tau: f64,
    pub u: f64,
    pub v: f64,
}

/// Rows drawn as rings and columns drawn as rays.
fn chosen_lines(m: &DiscreteMap, layout: FigureLayout) -> Result<(Vec<usize>, Vec<usize>)> {
    let (nr, nt) = (m.grid.n_radial, m.grid.n_angular);
    if layout.rings < 2 || layout.rings > nr || layout.rays < 1 || layout.rays > nt {
        return Err(Error::Config(format!(
            "cannot draw {} rings and {} rays from a {nr}x{nt} grid",
            layout.rings, layout.rays
        )));
    }
    let rings = (0..layout.rings)
        .map(|k| ((k * (nr - 1)) as f64 / (layout.rings - 1) as f64).round() as usize)
        .collect();
    let rays = (0..layout.rays).map(|k| k * nt / layout.rays).collect();
    Ok((rings, rays))
}

/// The image points of the drawn rings and rays, ring by ring then ray by ray.
pub fn curves(m: &DiscreteMap, layout: FigureLayout) -> Result<Vec<CurvePoint>> {
    let (rings, rays) = chosen_lines(m, layout)?;
    let g = &m.grid;
    let mut out = Vec::new();
    for &i in &rings {
        for k in 0..=g.n_angular {
            let k = k % g.n_angular;
            let w = m.at(i, k);
            out.push(CurvePoint {
                kind: "ring",
                index: i,
                t: g.radius(i),
                tau: g.angle(k),
                u: w.re,
                v: w.im,
            });
        }
    }
    for &k in &rays {
        for i in 0..g.n_radial {
            let w = m.at(i, k);
            out.push(CurvePoint {
                kind: "ray",
                index: k,
                t: g.radius(i),
                tau: g.angle(k),
                u: w.re,
                v: w.im,
            });
        }
    }
    Ok(out)
}

pub fn write_curves_csv<W: Write>(m: &DiscreteMap, layout: FigureLayout, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for p in curves(m, layout)? {
        wtr.serialize(p)?;
    }
    wtr.flush()?;
    Ok(())
}

/// SVG of the image grid, with the target circles `|w| = 1` and `|w| = R`
/// dashed for reference.
pub fn render_svg(m: &DiscreteMap, layout: FigureLayout) -> Result<String> {
    let points = curves(m, layout)?;
    let extent = points
        .iter()
        .map(|p| p.u.abs().max(p.v.abs()))
        .fold(m.target_r, f64::max)
        * 1.08;
    let size = 800.0;
    let scale = size / (2.0 * extent);
    let px = |u: f64| (u + extent) * scale;
    let py = |v: f64| (extent - v) * scale;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for radius in [1.0, m.target_r] {
        let _ = writeln!(
            svg,
            r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#c0392b" stroke-width="1" stroke-dasharray="6 4"/>"##,
            px(0.0),
            py(0.0),
            radius * scale
        );
    }
    let mut start = 0;
    while start < points.len() {
        let (kind, index) = (points[start].kind, points[start].index);
        let end = start
            + points[start..]
                .iter()
                .take_while(|p| p.kind == kind && p.index == index)
                .count();
        let colour = if kind == "ring" { "#1f4e79" } else { "#555555" };
        let mut path = String::new();
        for p in &points[start..end] {
            let _ = write!(path, "{:.3},{:.3} ", px(p.u), py(p.v));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1" points="{}"/>"#,
            path.trim_end()
        );
        start = end;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::ProblemSpec;
    use crate::optimizer::oracle_samples;
    use crate::polargrid::PolarGrid;

    #[test]
    fn conformal_rings_are_round() {
        let g = PolarGrid::new(1.0, 2.0, 33, 64).unwrap();
        let m = DiscreteMap::sample(|z| z * z, g, 4.0, 2).unwrap();
        for p in curves(&m, FigureLayout::default_for(&m)).unwrap() {
            if p.kind == "ring" {
                assert!(((p.u * p.u + p.v * p.v).sqrt() - p.t * p.t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn critical_rings_follow_the_profile() {
        let spec = ProblemSpec::normalized(2.0, 17.0 / 8.0, 2).unwrap();
        let m = oracle_samples(&spec, PolarGrid::new(1.0, 2.0, 33, 64).unwrap()).unwrap();
        for p in curves(&m, FigureLayout::default_for(&m)).unwrap() {
            let g = 0.5 * (p.t * p.t + 1.0 / (p.t * p.t));
            assert!(((p.u * p.u + p.v * p.v).sqrt() - g).abs() < 1e-9);
        }
    }

    #[test]
    fn squeezed_rings_collapse_onto_the_unit_circle() {
        let spec = ProblemSpec::normalized(4.0, 17.0 / 8.0, 2).unwrap();
        let (lo, hi) = spec.working_domain();
        let m = oracle_samples(&spec, PolarGrid::new(lo, hi, 65, 128).unwrap()).unwrap();
        let pts = curves(&m, FigureLayout::default_for(&m)).unwrap();
        let inner: Vec<_> = pts
            .iter()
            .filter(|p| p.kind == "ring" && p.t < 1.0)
            .collect();
        assert!(inner.len() >= 3 * 129);
        for p in inner {
            assert!(((p.u * p.u + p.v * p.v).sqrt() - 1.0).abs() < 1e-12);
        }
        let svg = render_svg(&m, FigureLayout::default_for(&m)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 8 + 8);
    }

    #[test]
    fn rejects_impossible_layouts() {
        let g = PolarGrid::new(1.0, 2.0, 9, 16).unwrap();
        let m = DiscreteMap::sample(|z| z, g, 2.0, 1).unwrap();
        assert!(curves(&m, FigureLayout { rings: 20, rays: 2 }).is_err());
    }
}
