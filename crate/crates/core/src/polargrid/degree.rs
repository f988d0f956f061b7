use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DiscreteMap;
use crate::error::{Error, Result};

/// Moduli below this are too close to the origin for a reliable argument.
const MIN_MODULUS: f64 = 1e-12;
/// Preimage triangles with smaller signed area (relative to the image scale)
/// make a sampled value non-regular.
const DEGENERATE_AREA: f64 = 1e-9;
const REGULAR_SAMPLES: usize = 4;
const MAX_DRAWS: usize = 64;

/// Winding number about the origin of grid row `row`, from the sum of
/// principal-branch argument increments.
pub fn winding_number(m: &DiscreteMap, row: usize) -> Result<i64> {
    let w = m.row(row);
    let scale = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut total = 0.0;
    for (k, &cur) in w.iter().enumerate() {
        if cur.norm() <= MIN_MODULUS * scale.max(1.0) {
            return Err(Error::IllConditionedWinding {
                row,
                modulus: cur.norm(),
            });
        }
        let next = w[(k + 1) % w.len()];
        total += (next * cur.conj()).arg();
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Degree of a grid map together with the regular values it was checked on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeEstimate {
    pub degree: i64,
    pub regular_values: Vec<[f64; 2]>,
    pub rejected: usize,
}

/// Degree from the row windings, cross-checked by signed preimage counts of a
/// few random regular values under the piecewise-linear interpolant (two
/// triangles per grid cell).
pub fn degree_estimate(m: &DiscreteMap) -> Result<DegreeEstimate> {
    let nr = m.grid.n_radial;
    let mut windings = Vec::with_capacity(nr);
    for i in 0..nr {
        windings.push(winding_number(m, i)?);
    }
    let degree = windings[0];
    if let Some(i) = windings.iter().position(|&w| w != degree) {
        return Err(Error::NonAdmissible(format!(
            "row {i} winds {} times, row 0 winds {degree} times",
            windings[i]
        )));
    }

    // Sample y where the inner row cannot wind around it and the outer row
    // winds around it exactly as around the origin.
    let inner_max = m.row(0).iter().map(|w| w.norm()).fold(0.0, f64::max);
    let outer = m.row(nr - 1);
    let outer_clearance = (0..outer.len())
        .map(|k| segment_distance(Complex64::default(), outer[k], outer[(k + 1) % outer.len()]))
        .fold(f64::INFINITY, f64::min);
    if outer_clearance <= inner_max {
        return Err(Error::NonAdmissible(format!(
            "no annulus of regular values: inner row reaches {inner_max}, outer row comes within {outer_clearance} of 0"
        )));
    }
    let (lo, hi) = (inner_max, outer_clearance);
    let pad = 0.05 * (hi - lo);
    let scale = hi * hi;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_dea1);
    let mut regular_values = Vec::new();
    let mut rejected = 0;
    for _ in 0..MAX_DRAWS {
        if regular_values.len() == REGULAR_SAMPLES {
            break;
        }
        let y = Complex64::from_polar(rng.gen_range(lo + pad..hi - pad), rng.gen_range(-PI..PI));
        match signed_preimage_count(m, y, scale) {
            Some(count) => {
                if count != degree {
                    return Err(Error::NonAdmissible(format!(
                        "regular value {y} has signed preimage count {count}, rows wind {degree} times"
                    )));
                }
                regular_values.push([y.re, y.im]);
            }
            None => rejected += 1,
        }
    }
    if regular_values.is_empty() {
        return Err(Error::NonAdmissible("no regular value found".into()));
    }
    Ok(DegreeEstimate {
        degree,
        regular_values,
        rejected,
    })
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Signed count of image triangles containing `y`; `None` if `y` is not a
/// regular value of the interpolant (degenerate containing triangle or `y` on
/// an edge).
fn signed_preimage_count(m: &DiscreteMap, y: Complex64, scale: f64) -> Option<i64> {
    let g = &m.grid;
    let nt = g.n_angular;
    let per_row: Vec<Option<i64>> = (0..g.n_radial - 1)
        .into_par_iter()
        .map(|i| {
            let mut count = 0i64;
            for k in 0..nt {
                let k1 = (k + 1) % nt;
                let a = m.at(i, k);
                let b = m.at(i + 1, k);
                let c = m.at(i + 1, k1);
                let d = m.at(i, k1);
                for tri in [[a, b, c], [a, c, d]] {
                    match triangle_sign(tri, y, scale) {
                        TriangleHit::Outside => {}
                        TriangleHit::Inside(s) => count += s,
                        TriangleHit::Singular => return None,
                    }
                }
            }
            Some(count)
        })
        .collect();
    per_row.into_iter().sum()
}

enum TriangleHit {
    Outside,
    Inside(i64),
    Singular,
}

fn triangle_sign([a, b, c]: [Complex64; 3], y: Complex64, scale: f64) -> TriangleHit {
    let min_re = a.re.min(b.re).min(c.re);
    let max_re = a.re.max(b.re).max(c.re);
    let min_im = a.im.min(b.im).min(c.im);
    let max_im = a.im.max(b.im).max(c.im);
    if y.re < min_re || y.re > max_re || y.im < min_im || y.im > max_im {
        return TriangleHit::Outside;
    }
    let area = cross(b - a, c - a);
    let s0 = cross(b - a, y - a);
    let s1 = cross(c - b, y - b);
    let s2 = cross(a - c, y - c);
    let edge_tol = 1e-14 * scale;
    let inside = (s0 >= -edge_tol && s1 >= -edge_tol && s2 >= -edge_tol)
        || (s0 <= edge_tol && s1 <= edge_tol && s2 <= edge_tol);
    if !inside {
        return TriangleHit::Outside;
    }
    if area.abs() < DEGENERATE_AREA * scale
        || s0.abs() <= edge_tol
        || s1.abs() <= edge_tol
        || s2.abs() <= edge_tol
    {
        return TriangleHit::Singular;
    }
    TriangleHit::Inside(if area > 0.0 { 1 } else { -1 })
}
