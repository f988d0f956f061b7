//! The two half-steps of the minimization: an exact interior Laplace solve and
//! a projected gradient step that also moves the boundary rows along their
//! circles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::stencil::{solve_free, FastSolver, SolveStats, Stencil};
use super::OptimizerConfig;
use crate::error::{Error, Result};
use crate::polargrid::DiscreteMap;

/// Relative residual required of the interior Laplace solve.
pub const SOLVE_RTOL: f64 = 1e-10;
const SOLVE_MAX_ITER: usize = 5000;
/// Nodes within this distance of a constraint circle count as on it.
const PIN_TOL: f64 = 1e-9;
/// Sufficient-decrease constant of the Armijo test.
const ARMIJO: f64 = 1e-4;
/// Halvings tried by the harmonic-step safeguard before giving up.
const SAFEGUARD_HALVINGS: usize = 40;

/// Precomputed stencil and solver for one grid, reused across iterations.
pub struct Relaxer {
    stencil: Stencil,
    solver: FastSolver,
    /// Regularized inverse Schur complements per angular mode,
    /// `[inner, outer, cross]`.
    schur_inv: Vec<[f64; 3]>,
    target_r: f64,
    degree: i32,
}

/// Result of [`Relaxer::harmonic_step`].
#[derive(Debug, Clone)]
pub struct HarmonicStep {
    pub values: Vec<Complex64>,
    pub energy: f64,
    pub solve: SolveStats,
    /// Interior nodes held on a constraint circle during the solve.
    pub pinned: usize,
    /// Fraction of the full update that was kept (1 unless the safeguard cut it).
    pub fraction: f64,
}

/// Result of [`Relaxer::gradient_step`].
#[derive(Debug, Clone)]
pub struct GradientStep {
    pub values: Vec<Complex64>,
    pub energy: f64,
    /// Step length used; 0 when no decrease was found (stationarity signal).
    pub step_taken: f64,
    /// Suggested trial step for the next call.
    pub next_step: f64,
    /// Trial steps rejected because a row's winding changed.
    pub winding_rejections: usize,
}

impl Relaxer {
    pub fn new(m: &DiscreteMap) -> Self {
        let stencil = Stencil::new(&m.grid);
        let solver = FastSolver::new(stencil.clone());
        let schur = solver.boundary_schur();
        // mode 0 is singular (a common translation of both rows is free); shift
        // every mode by half the smallest nonzero eigenvalue
        let eig_min =
            |[a, b, c]: [f64; 3]| 0.5 * (a + b) - (0.25 * (a - b) * (a - b) + c * c).sqrt();
        let shift = 0.5
            * schur[1..]
                .iter()
                .map(|&s| eig_min(s))
                .fold(f64::INFINITY, f64::min);
        let schur_inv = schur
            .iter()
            .map(|&[a, b, c]| {
                let (a, b) = (a + shift, b + shift);
                let det = a * b - c * c;
                [b / det, a / det, -c / det]
            })
            .collect();
        Relaxer {
            solver,
            schur_inv,
            stencil,
            target_r: m.target_r,
            degree: m.degree,
        }
    }

    pub fn energy(&self, w: &[Complex64]) -> f64 {
        self.stencil.energy(w)
    }

    pub fn gradient(&self, w: &[Complex64]) -> Vec<Complex64> {
        self.stencil.gradient(w)
    }

    fn interior(&self) -> std::ops::Range<usize> {
        self.stencil.nt..(self.stencil.nr - 1) * self.stencil.nt
    }

    /// Interior nodes on a constraint circle whose local energy optimum lies
    /// beyond it: these stay fixed in the Laplace solve.
    fn pinned_mask(&self, w: &[Complex64]) -> Vec<bool> {
        let nt = self.stencil.nt;
        let nr = self.stencil.nr;
        let big_r = self.target_r;
        (0..w.len())
            .into_par_iter()
            .map(|idx| {
                let (i, k) = (idx / nt, idx % nt);
                if i == 0 || i == nr - 1 {
                    return true;
                }
                let v = w[idx];
                let s = v.norm();
                let inner = s <= 1.0 + PIN_TOL;
                let outer = s >= big_r - PIN_TOL;
                if !inner && !outer {
                    return false;
                }
                let u = v / s;
                let radial = (self.stencil.local_optimum(w, i, k) * u.conj()).re;
                (inner && radial < 1.0) || (outer && radial > big_r)
            })
            .collect()
    }

    fn clamp_interior(&self, w: &mut [Complex64], fallback: &[Complex64]) {
        let range = self.interior();
        let big_r = self.target_r;
        w[range.clone()]
            .par_iter_mut()
            .zip(fallback[range].par_iter())
            .for_each(|(v, old)| {
                let s = v.norm();
                if !(s > 0.0) || !s.is_finite() {
                    *v = *old;
                } else if s < 1.0 {
                    *v /= s;
                } else if s > big_r {
                    *v *= big_r / s;
                }
            });
    }

    /// True iff every row winds `degree` times around the origin.
    pub fn windings_ok(&self, w: &[Complex64]) -> bool {
        let nt = self.stencil.nt;
        let want = self.degree as f64;
        w.par_chunks(nt).all(|row| {
            let mut total = 0.0;
            for k in 0..nt {
                let (a, b) = (row[k], row[(k + 1) % nt]);
                if a.norm() == 0.0 {
                    return false;
                }
                total += (b * a.conj()).arg();
            }
            (total / (2.0 * PI) - want).abs() < 0.5
        })
    }

    /// Replaces the free interior values by the discrete harmonic extension of
    /// the boundary rows and pinned nodes, clamps moduli to `[1, R]`, and keeps
    /// the energy from increasing.
    pub fn harmonic_step(&self, w: &[Complex64]) -> Result<HarmonicStep> {
        let e_old = self.energy(w);
        let pinned = self.pinned_mask(w);
        let free: Vec<bool> = pinned.iter().map(|p| !p).collect();
        let n_pinned = pinned[self.interior()].iter().filter(|&&p| p).count();
        let mut solved = w.to_vec();
        let solve = solve_free(&self.solver, &mut solved, &free, SOLVE_RTOL, SOLVE_MAX_ITER)?;

        let mut fraction = 1.0;
        for _ in 0..SAFEGUARD_HALVINGS {
            let mut cand: Vec<Complex64> = if fraction == 1.0 {
                solved.clone()
            } else {
                w.iter()
                    .zip(&solved)
                    .map(|(a, b)| a + fraction * (b - a))
                    .collect()
            };
            self.clamp_interior(&mut cand, w);
            let e = self.energy(&cand);
            if e <= e_old && self.windings_ok(&cand) {
                return Ok(HarmonicStep {
                    values: cand,
                    energy: e,
                    solve,
                    pinned: n_pinned,
                    fraction,
                });
            }
            fraction *= 0.5;
        }
        Ok(HarmonicStep {
            values: w.to_vec(),
            energy: e_old,
            solve,
            pinned: n_pinned,
            fraction: 0.0,
        })
    }

    /// Gradient with the components blocked by the constraints removed:
    /// boundary rows keep only the tangential part, interior nodes on a
    /// constraint circle lose the radial part pointing out of the shell.
    pub fn projected_gradient(&self, w: &[Complex64]) -> Vec<Complex64> {
        let g = self.gradient(w);
        let nt = self.stencil.nt;
        let nr = self.stencil.nr;
        let big_r = self.target_r;
        g.par_iter()
            .zip(w.par_iter())
            .enumerate()
            .map(|(idx, (&gv, &v))| {
                let i = idx / nt;
                let s = v.norm();
                let u = v / s;
                let radial = (gv * u.conj()).re;
                let blocked = i == 0
                    || i == nr - 1
                    || (s <= 1.0 + PIN_TOL && radial > 0.0)
                    || (s >= big_r - PIN_TOL && radial < 0.0);
                if blocked {
                    gv - radial * u
                } else {
                    gv
                }
            })
            .collect()
    }

    pub fn projected_gradient_norm(&self, w: &[Complex64]) -> f64 {
        self.projected_gradient(w)
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `w - step * grad` followed by projection: boundary rows retract onto
    /// their circles, interior moduli clamp to `[1, R]`. `None` if a node lands
    /// on the origin, where the projection is undefined.
    fn project_step(&self, w: &[Complex64], g: &[Complex64], step: f64) -> Option<Vec<Complex64>> {
        let nt = self.stencil.nt;
        let nr = self.stencil.nr;
        let big_r = self.target_r;
        w.par_iter()
            .zip(g.par_iter())
            .enumerate()
            .map(|(idx, (&v, &gv))| {
                let i = idx / nt;
                let s = v.norm();
                let u = v / s;
                let boundary = i == 0 || i == nr - 1;
                let dir = if boundary {
                    gv - (gv * u.conj()).re * u
                } else {
                    gv
                };
                let moved = v - step * dir;
                let m = moved.norm();
                if !(m > 0.0) || !m.is_finite() {
                    return None;
                }
                Some(if i == 0 {
                    moved / m
                } else if i == nr - 1 {
                    moved * (big_r / m)
                } else if m < 1.0 {
                    moved / m
                } else if m > big_r {
                    moved * (big_r / m)
                } else {
                    moved
                })
            })
            .collect()
    }

    /// Boundary descent direction preconditioned by the inverse boundary Schur
    /// complement, tangential on both boundary rows and extended harmonically
    /// into the interior, so that a unit step minimizes the reduced quadratic.
    pub fn preconditioned_direction(&self, w: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        let (nr, nt) = (self.stencil.nr, self.stencil.nt);
        let last = (nr - 1) * nt;
        let tangential = |gv: Complex64, v: Complex64| {
            let u = v / v.norm();
            gv - (gv * u.conj()).re * u
        };
        let mut rows = vec![Complex64::default(); 2 * nt];
        for k in 0..nt {
            rows[k] = tangential(g[k], w[k]);
            rows[nt + k] = tangential(g[last + k], w[last + k]);
        }
        self.solver.transform_rows(&mut rows, true);
        for m in 0..nt {
            let [p11, p22, p12] = self.schur_inv[m];
            let (a, b) = (rows[m], rows[nt + m]);
            // gradient = 2 S b, so half of S^{-1} g is the Newton step
            rows[m] = 0.5 * (p11 * a + p12 * b);
            rows[nt + m] = 0.5 * (p12 * a + p22 * b);
        }
        self.solver.transform_rows(&mut rows, false);
        let scale = 1.0 / nt as f64;
        let mut d = vec![Complex64::default(); w.len()];
        for k in 0..nt {
            d[k] = tangential(scale * rows[k], w[k]);
            d[last + k] = tangential(scale * rows[nt + k], w[last + k]);
        }
        let zero = vec![Complex64::default(); w.len()];
        self.solver.solve(&zero, &mut d);
        d
    }

    /// One projected gradient step with Armijo backtracking from `trial`.
    pub fn gradient_step(
        &self,
        w: &[Complex64],
        trial: f64,
        config: &OptimizerConfig,
    ) -> GradientStep {
        let g = self.gradient(w);
        self.line_search(w, &g, &g, trial, config)
    }

    /// Like [`Relaxer::gradient_step`] along
    /// [`Relaxer::preconditioned_direction`]; the interior follows the
    /// boundary rows harmonically.
    pub fn preconditioned_step(
        &self,
        w: &[Complex64],
        trial: f64,
        config: &OptimizerConfig,
    ) -> GradientStep {
        let g = self.gradient(w);
        let d = self.preconditioned_direction(w, &g);
        self.line_search(w, &g, &d, trial, config)
    }

    fn line_search(
        &self,
        w: &[Complex64],
        g: &[Complex64],
        d: &[Complex64],
        trial: f64,
        config: &OptimizerConfig,
    ) -> GradientStep {
        let e0 = self.energy(w);
        let mut step = trial;
        let mut winding_rejections = 0;
        let min_step = config.step0 * config.min_step_ratio;
        while step >= min_step {
            match self.project_step(w, d, step) {
                None => step *= 0.5,
                Some(cand) if !self.windings_ok(&cand) => {
                    winding_rejections += 1;
                    step *= 0.5;
                }
                Some(cand) => {
                    let decrease: f64 = g
                        .par_iter()
                        .zip(w.par_iter())
                        .zip(cand.par_iter())
                        .map(|((gv, a), b)| gv.re * (a.re - b.re) + gv.im * (a.im - b.im))
                        .collect::<Vec<f64>>()
                        .iter()
                        .sum();
                    let e1 = self.energy(&cand);
                    if decrease > 0.0 && e1 <= e0 - ARMIJO * decrease {
                        return GradientStep {
                            values: cand,
                            energy: e1,
                            step_taken: step,
                            next_step: step * config.growth,
                            winding_rejections,
                        };
                    }
                    step *= config.backtrack;
                }
            }
        }
        GradientStep {
            values: w.to_vec(),
            energy: e0,
            step_taken: 0.0,
            next_step: trial.max(config.step0),
            winding_rejections,
        }
    }
}

/// Replaces the interior of `m` by the discrete harmonic extension of its
/// boundary rows (and of interior nodes pinned on a constraint circle), then
/// clamps moduli to `[1, R]`. The stencil energy does not increase.
pub fn harmonic_interior_step(m: &DiscreteMap) -> Result<DiscreteMap> {
    let relaxer = Relaxer::new(m);
    let step = relaxer.harmonic_step(&m.values)?;
    DiscreteMap::from_values(m.grid, step.values, m.target_r, m.degree)
}

/// One projected gradient step from `config.step0`; returns the new map and
/// the step length taken (0 when no decrease was found).
pub fn projected_gradient_step(
    m: &DiscreteMap,
    config: &OptimizerConfig,
) -> Result<(DiscreteMap, f64)> {
    config.validate()?;
    let relaxer = Relaxer::new(m);
    if !relaxer.windings_ok(&m.values) {
        return Err(Error::NonAdmissible(format!(
            "rows do not all wind {} times",
            m.degree
        )));
    }
    let step = relaxer.gradient_step(&m.values, config.step0, config);
    Ok((
        DiscreteMap::from_values(m.grid, step.values, m.target_r, m.degree)?,
        step.step_taken,
    ))
}
