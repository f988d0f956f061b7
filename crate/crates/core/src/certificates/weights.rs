//! The four free Lagrangians: integrals whose value does not depend on the map
//! beyond its boundary behaviour and degree.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polargrid::{differentials, Differentials, DiscreteMap};

/// A weight function given by samples at increasing knots, interpolated
/// linearly and held constant beyond the end knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl WeightTable {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::Config(format!(
                "weight table needs >= 2 knots and one value per knot ({} knots, {} values)",
                knots.len(),
                values.len()
            )));
        }
        if knots.windows(2).any(|p| !(p[1] > p[0]))
            || values.iter().chain(&knots).any(|v| !v.is_finite())
        {
            return Err(Error::Config(
                "weight table knots must be finite and increasing".into(),
            ));
        }
        Ok(WeightTable { knots, values })
    }

    /// Samples `f` at `n` evenly spaced knots of `[lo, hi]`.
    pub fn sample(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let n = n.max(2);
        let knots: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        let values = knots.iter().map(|&x| f(x)).collect();
        WeightTable::new(knots, values)
    }

    pub fn constant(c: f64, lo: f64, hi: f64) -> Result<Self> {
        WeightTable::new(vec![lo, hi], vec![c, c])
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.knots.len();
        if x <= self.knots[0] {
            return self.values[0];
        }
        if x >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.knots.partition_point(|&k| k <= x).clamp(1, n - 1);
        let (x0, x1) = (self.knots[hi - 1], self.knots[hi]);
        let (f0, f1) = (self.values[hi - 1], self.values[hi]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// Exact `∫ x^p f(x) dx` over the table's domain for `p` in `{0, 1}`.
    pub fn moment(&self, p: u32) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, f)| {
                let h = x[1] - x[0];
                match p {
                    0 => 0.5 * h * (f[0] + f[1]),
                    1 => h / 6.0 * (x[0] * (2.0 * f[0] + f[1]) + x[1] * (f[0] + 2.0 * f[1])),
                    _ => unreachable!("only zeroth and first moments are used"),
                }
            })
            .sum()
    }

    /// Checks that the table spans exactly `[lo, hi]`.
    pub fn check_domain(&self, lo: f64, hi: f64, what: &str) -> Result<()> {
        let (a, b) = self.domain();
        let tol = 1e-9 * hi.abs().max(1.0);
        if (a - lo).abs() > tol || (b - hi).abs() > tol {
            return Err(Error::Config(format!(
                "{what} weight is tabulated on [{a}, {b}], expected [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Weights of the four free Lagrangians: `m` and `b` are functions of the
/// domain radius `t`, `n` and `a` of the image modulus `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianWeights {
    pub m: WeightTable,
    pub n: WeightTable,
    pub a: WeightTable,
    pub b: WeightTable,
}

/// Left- and right-hand side of one identity.
pub type Sides = (f64, f64);

fn image_range(m: &DiscreteMap) -> (f64, f64) {
    (1.0, m.target_r)
}

fn domain_range(m: &DiscreteMap) -> (f64, f64) {
    (m.grid.t_min, m.grid.t_max)
}

fn node_radii(m: &DiscreteMap) -> Vec<f64> {
    let nt = m.grid.n_angular;
    (0..m.values.len()).map(|n| m.grid.radius(n / nt)).collect()
}

/// `∫ M(|z|) dA` against `2π ∫ t M(t) dt` (the integrand ignores the map).
pub fn lagrangian_a(m: &DiscreteMap, weight: &WeightTable) -> Result<Sides> {
    let (lo, hi) = domain_range(m);
    weight.check_domain(lo, hi, "M")?;
    let field: Vec<f64> = node_radii(m).iter().map(|&t| weight.eval(t)).collect();
    Ok((m.grid.integrate(&field), 2.0 * PI * weight.moment(1)))
}

/// `∫ N(|g|) det Dg dA` against `2π j ∫ s N(s) ds`.
pub fn lagrangian_b(m: &DiscreteMap, weight: &WeightTable) -> Result<Sides> {
    lagrangian_b_with(m, &differentials(m), weight)
}

pub(crate) fn lagrangian_b_with(
    m: &DiscreteMap,
    d: &Differentials,
    weight: &WeightTable,
) -> Result<Sides> {
    let (lo, hi) = image_range(m);
    weight.check_domain(lo, hi, "N")?;
    let field: Vec<f64> = m
        .values
        .par_iter()
        .zip(d.normal.par_iter().zip(d.tangential.par_iter()))
        .map(|(w, (gn, gt))| weight.eval(w.norm()) * (gt * gn.conj()).im)
        .collect();
    Ok((
        m.grid.integrate(&field),
        2.0 * PI * m.degree as f64 * weight.moment(1),
    ))
}

/// `∫ A(|g|) ∂_t|g| / |z| dA` against `2π ∫ A(s) ds`.
pub fn lagrangian_c(m: &DiscreteMap, weight: &WeightTable) -> Result<Sides> {
    lagrangian_c_with(m, &differentials(m), weight)
}

pub(crate) fn lagrangian_c_with(
    m: &DiscreteMap,
    d: &Differentials,
    weight: &WeightTable,
) -> Result<Sides> {
    let (lo, hi) = image_range(m);
    weight.check_domain(lo, hi, "A")?;
    let radii = node_radii(m);
    let field: Vec<f64> = m
        .values
        .par_iter()
        .zip(d.normal.par_iter())
        .zip(radii.par_iter())
        .map(|((w, gn), &t)| {
            let s = w.norm();
            weight.eval(s) * (w.conj() * gn).re / s / t
        })
        .collect();
    Ok((m.grid.integrate(&field), 2.0 * PI * weight.moment(0)))
}

/// `∫ B(|z|) Im(g_T / g) dA` against `2π j ∫ B(t) dt`.
pub fn lagrangian_d(m: &DiscreteMap, weight: &WeightTable) -> Result<Sides> {
    lagrangian_d_with(m, &differentials(m), weight)
}

pub(crate) fn lagrangian_d_with(
    m: &DiscreteMap,
    d: &Differentials,
    weight: &WeightTable,
) -> Result<Sides> {
    let (lo, hi) = domain_range(m);
    weight.check_domain(lo, hi, "B")?;
    let scale = m.target_r;
    if let Some(n) = m.values.iter().position(|w| w.norm() <= 1e-12 * scale) {
        let nt = m.grid.n_angular;
        return Err(Error::IllConditionedWinding {
            row: n / nt,
            modulus: m.values[n].norm(),
        });
    }
    let radii = node_radii(m);
    let field: Vec<f64> = m
        .values
        .par_iter()
        .zip(d.tangential.par_iter())
        .zip(radii.par_iter())
        .map(|((w, gt), &t)| weight.eval(t) * (gt / w).im)
        .collect();
    Ok((
        m.grid.integrate(&field),
        2.0 * PI * m.degree as f64 * weight.moment(0),
    ))
}
