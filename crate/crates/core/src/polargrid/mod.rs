//! Grid maps on a log-polar discretization of an annulus.
//!
//! Nodes are `t_i e^{i tau_k}` with `t_i = t_min (t_max/t_min)^{i/(n_radial-1)}` and
//! `tau_k = 2 pi k / n_angular`. Values are stored radial-major: node `(i, k)` lives
//! at `i * n_angular + k`. The angular direction is periodic.

mod calculus;
mod degree;
pub mod io;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use calculus::jacobian_from;
pub use calculus::{differentials, dirichlet_energy, jacobian, Differentials};
pub use degree::{degree_estimate, winding_number, DegreeEstimate};

/// Tolerance on boundary-row moduli.
pub const BOUNDARY_TOL: f64 = 1e-9;
/// Slack allowed on interior moduli outside `[1, R]`.
pub const INTERIOR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl PolarGrid {
    pub fn new(t_min: f64, t_max: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n_radial < 3 || n_angular < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 x 8 nodes, got {n_radial} x {n_angular}"
            )));
        }
        Ok(PolarGrid {
            t_min,
            t_max,
            n_radial,
            n_angular,
        })
    }

    pub fn len(&self) -> usize {
        self.n_radial * self.n_angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n_angular + k
    }

    /// Spacing in `x = log t`.
    pub fn log_step(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.n_radial - 1) as f64
    }

    pub fn angle_step(&self) -> f64 {
        2.0 * PI / self.n_angular as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        if i == 0 {
            self.t_min
        } else if i == self.n_radial - 1 {
            self.t_max
        } else {
            self.t_min * (self.log_step() * i as f64).exp()
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_radial).map(|i| self.radius(i)).collect()
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.angle_step() * k as f64
    }

    pub fn node(&self, i: usize, k: usize) -> Complex64 {
        Complex64::from_polar(self.radius(i), self.angle(k))
    }

    /// Trapezoid weight of row `i` in `x = log t` (periodic trapezoid in `tau`).
    #[inline]
    pub fn row_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_radial - 1 {
            0.5
        } else {
            1.0
        }
    }

    /// Integral of a nodal field against area measure `t dt dtau`, by the
    /// trapezoid rule in `(log t, tau)`.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        assert_eq!(field.len(), self.len());
        let cell = self.log_step() * self.angle_step();
        (0..self.n_radial)
            .map(|i| {
                let t = self.radius(i);
                let row: f64 = field[i * self.n_angular..(i + 1) * self.n_angular]
                    .iter()
                    .sum();
                self.row_weight(i) * t * t * row
            })
            .sum::<f64>()
            * cell
    }

    /// Same grid with both dimensions doubled (node spacing halved).
    pub fn refined(&self) -> Self {
        PolarGrid {
            n_radial: 2 * self.n_radial - 1,
            n_angular: 2 * self.n_angular,
            ..*self
        }
    }
}

/// Image samples `w_{i,k}` of a candidate map.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMap {
    pub grid: PolarGrid,
    pub values: Vec<Complex64>,
    pub target_r: f64,
    pub degree: i32,
}

/// Outcome of the admissibility checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub inner_boundary_error: f64,
    pub outer_boundary_error: f64,
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub inner_winding: i64,
    pub outer_winding: i64,
    /// Fraction of modulus-argument histogram bins hit by image samples.
    pub coverage: f64,
}

impl Admissibility {
    pub fn is_admissible(&self, target_r: f64, degree: i32) -> bool {
        self.violation(target_r, degree).is_none()
    }

    fn violation(&self, target_r: f64, degree: i32) -> Option<String> {
        if self.inner_boundary_error > BOUNDARY_TOL {
            return Some(format!(
                "inner row off the unit circle by {:.3e}",
                self.inner_boundary_error
            ));
        }
        if self.outer_boundary_error > BOUNDARY_TOL * target_r {
            return Some(format!(
                "outer row off |w| = R by {:.3e}",
                self.outer_boundary_error
            ));
        }
        if self.min_modulus < 1.0 - INTERIOR_TOL || self.max_modulus > target_r + INTERIOR_TOL {
            return Some(format!(
                "image moduli [{:.6}, {:.6}] leave [1, {target_r}]",
                self.min_modulus, self.max_modulus
            ));
        }
        if self.inner_winding != degree as i64 || self.outer_winding != degree as i64 {
            return Some(format!(
                "boundary windings ({}, {}) differ from degree {degree}",
                self.inner_winding, self.outer_winding
            ));
        }
        None
    }
}

impl DiscreteMap {
    /// Samples `f` at every node without checking admissibility.
    pub fn sample<F>(f: F, grid: PolarGrid, target_r: f64, degree: i32) -> Result<Self>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_radial {
            for k in 0..grid.n_angular {
                let w = f(grid.node(i, k));
                if !(w.re.is_finite() && w.im.is_finite()) {
                    return Err(Error::Sampling {
                        row: i,
                        col: k,
                        reason: format!("non-finite value {w}"),
                    });
                }
                values.push(w);
            }
        }
        Ok(DiscreteMap {
            grid,
            values,
            target_r,
            degree,
        })
    }

    pub fn from_values(
        grid: PolarGrid,
        values: Vec<Complex64>,
        target_r: f64,
        degree: i32,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(DiscreteMap {
            grid,
            values,
            target_r,
            degree,
        })
    }

    #[inline]
    pub fn at(&self, i: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(i, k)]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n_angular;
        &self.values[i * n..(i + 1) * n]
    }

    /// Applies `w -> e^{i theta} w`.
    pub fn rotated(&self, theta: f64) -> Self {
        let e = Complex64::from_polar(1.0, theta);
        DiscreteMap {
            values: self.values.iter().map(|w| e * w).collect(),
            ..self.clone()
        }
    }

    pub fn admissibility(&self) -> Admissibility {
        let n = self.grid.n_radial;
        let inner_boundary_error = self
            .row(0)
            .iter()
            .map(|w| (w.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        let outer_boundary_error = self
            .row(n - 1)
            .iter()
            .map(|w| (w.norm() - self.target_r).abs())
            .fold(0.0, f64::max);
        let (min_modulus, max_modulus) = self
            .values
            .iter()
            .map(|w| w.norm())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), m| {
                (lo.min(m), hi.max(m))
            });
        let winding = |row| winding_number(self, row).unwrap_or(i64::MIN);
        Admissibility {
            inner_boundary_error,
            outer_boundary_error,
            min_modulus,
            max_modulus,
            inner_winding: winding(0),
            outer_winding: winding(n - 1),
            coverage: self.onto_coverage(
                (self.grid.n_radial / 2).clamp(2, 8),
                (self.grid.n_angular / (2 * self.degree.unsigned_abs().max(1) as usize))
                    .clamp(4, 32),
            ),
        }
    }

    pub fn check_admissible(&self) -> Result<Admissibility> {
        let report = self.admissibility();
        match report.violation(self.target_r, self.degree) {
            None => Ok(report),
            Some(msg) => Err(Error::NonAdmissible(msg)),
        }
    }

    /// Statistical surjectivity check: fraction of the `n_mod x n_arg` bins of
    /// `[1, R] x [-pi, pi)` containing at least one image sample.
    pub fn onto_coverage(&self, n_mod: usize, n_arg: usize) -> f64 {
        let mut hit = vec![false; n_mod * n_arg];
        let span = self.target_r - 1.0;
        for w in &self.values {
            let m = ((w.norm() - 1.0) / span * n_mod as f64).floor();
            let a = ((w.arg() + PI) / (2.0 * PI) * n_arg as f64).floor();
            if m >= 0.0 && (m as usize) < n_mod && a >= 0.0 {
                let a = (a as usize).min(n_arg - 1);
                hit[m as usize * n_arg + a] = true;
            }
        }
        // the outer row sits exactly on the top edge
        for w in self.row(self.grid.n_radial - 1) {
            let a = ((w.arg() + PI) / (2.0 * PI) * n_arg as f64).floor() as usize;
            hit[(n_mod - 1) * n_arg + a.min(n_arg - 1)] = true;
        }
        hit.iter().filter(|&&h| h).count() as f64 / hit.len() as f64
    }

    /// Root-mean-square distance to `other` after the best global rotation of
    /// `self`; returns `(rms, theta)`.
    pub fn rotation_fit(&self, other: &DiscreteMap) -> (f64, f64) {
        assert_eq!(self.values.len(), other.values.len());
        // maximizing Re(e^{i theta} <w, v>) gives theta = -arg(sum conj(v) w)
        let cross: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(w, v)| v.conj() * w)
            .sum();
        let theta = -cross.arg();
        let e = Complex64::from_polar(1.0, theta);
        let ss: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(w, v)| (e * w - v).norm_sqr())
            .sum();
        ((ss / self.values.len() as f64).sqrt(), theta)
    }
}

/// Samples `f` and checks the admissibility constraints.
pub fn sample_map<F>(f: F, grid: PolarGrid, target_r: f64, degree: i32) -> Result<DiscreteMap>
where
    F: Fn(Complex64) -> Complex64,
{
    let m = DiscreteMap::sample(f, grid, target_r, degree)?;
    let n = grid.n_radial;
    for (row, want) in [(0, 1.0), (n - 1, target_r)] {
        for (k, w) in m.row(row).iter().enumerate() {
            if (w.norm() - want).abs() > BOUNDARY_TOL * want {
                return Err(Error::Sampling {
                    row,
                    col: k,
                    reason: format!("boundary modulus {} should be {want}", w.norm()),
                });
            }
        }
    }
    for (idx, w) in m.values.iter().enumerate() {
        let s = w.norm();
        if s < 1.0 - INTERIOR_TOL || s > target_r + INTERIOR_TOL {
            return Err(Error::Sampling {
                row: idx / grid.n_angular,
                col: idx % grid.n_angular,
                reason: format!("modulus {s} outside [1, {target_r}]"),
            });
        }
    }
    m.check_admissible()?;
    Ok(m)
}
