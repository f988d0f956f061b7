//! Numerical minimization of the discrete Dirichlet energy over admissible
//! degree-j grid maps.
//!
//! Each iteration alternates an exact interior Laplace solve (the energy is
//! quadratic in the interior values) with a projected gradient step in which
//! the boundary rows slide along their circles and interior nodes are kept in
//! the shell `1 <= |w| <= R`.

mod init;
mod stencil;
mod steps;

use log::debug;
use serde::{Deserialize, Serialize};

pub use init::{initialize, InitMode};
pub use stencil::{solve_free, FastSolver, SolveStats, Stencil};
pub use steps::{
    harmonic_interior_step, projected_gradient_step, GradientStep, HarmonicStep, Relaxer,
};

use crate::closedform::{energy_closed, Minimizer, ProblemSpec};
use crate::error::{Error, Result};
use crate::polargrid::{degree_estimate, dirichlet_energy, DiscreteMap, PolarGrid};

/// Interior nodes with `|w|` at most this far above 1 count as pinned to the
/// unit circle.
pub const ACTIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Initial trial step of the projected gradient step.
    pub step0: f64,
    /// Backtracking factor in `(0, 1)`.
    pub backtrack: f64,
    /// Trial-step growth after an accepted step (`>= 1`).
    pub growth: f64,
    /// Smallest trial step, relative to `step0`, before declaring stationarity.
    pub min_step_ratio: f64,
    /// Projected-gradient tolerance; `None` means `1e-6 * sqrt(node count)`.
    pub grad_tol: Option<f64>,
    /// Relative energy-change tolerance.
    pub energy_tol: f64,
    /// Tolerance for boundary moduli of the final map.
    pub projection_tol: f64,
    pub init: InitMode,
    pub seed: u64,
    /// Record the degree of every accepted iterate.
    pub track_degree: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iters: 5000,
            step0: 1e-2,
            backtrack: 0.5,
            growth: 2.0,
            min_step_ratio: 1e-12,
            grad_tol: None,
            energy_tol: 1e-10,
            projection_tol: 1e-9,
            init: InitMode::RadialInterp,
            seed: 0,
            track_degree: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step0", self.step0),
            ("min_step_ratio", self.min_step_ratio),
            ("energy_tol", self.energy_tol),
            ("projection_tol", self.projection_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(g) = self.grad_tol {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::Config(format!("grad_tol must be positive, got {g}")));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!(
                "backtrack must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if !(self.growth >= 1.0 && self.growth.is_finite()) {
            return Err(Error::Config(format!(
                "growth must be at least 1, got {}",
                self.growth
            )));
        }
        Ok(())
    }

    fn grad_tol_for(&self, nodes: usize) -> f64 {
        self.grad_tol.unwrap_or(1e-6 * (nodes as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub converged: bool,
    /// Final stencil energy (the minimized objective).
    pub energy: f64,
    /// Node-based finite-difference energy of the final map.
    pub dirichlet_energy: f64,
    pub oracle_energy: f64,
    pub gap_rel: f64,
    /// Fraction of interior nodes pinned at `|w| = 1`.
    pub active_fraction: f64,
    /// Per-row fraction of nodes pinned at `|w| = 1`.
    pub active_rows: Vec<f64>,
    pub gradient_norm: f64,
    pub grad_tol: f64,
    /// Root-mean-square distance to the closed-form minimizer after the best
    /// rotation, and that rotation.
    pub oracle_rms: f64,
    pub oracle_rotation: f64,
    /// Energy after every iteration, starting with the initial map.
    pub trace: Vec<f64>,
    /// Degree of every accepted iterate (both half-steps), when tracked.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degrees: Vec<Option<i64>>,
}

/// Closed-form minimizer sampled on `grid`, which may be any rescaled copy of
/// the domain annulus; below the bound its outer/inner radii are matched to the
/// internal annulus `A(rho, r_crit)`.
pub fn oracle_samples(spec: &ProblemSpec, grid: PolarGrid) -> Result<DiscreteMap> {
    init::check_grid(spec, &grid)?;
    let mz = Minimizer::for_problem(spec)?;
    let (lo, _) = mz.domain();
    let scale = lo / grid.t_min;
    let nr = grid.n_radial;
    let mut m = DiscreteMap::sample(
        |z| mz.eval_unchecked(z * scale),
        grid,
        spec.target_r,
        spec.j as i32,
    )?;
    // pin boundary moduli exactly against rounding in the rescaling
    for k in 0..grid.n_angular {
        let i0 = grid.index(0, k);
        let s0 = m.values[i0].norm();
        m.values[i0] /= s0;
        let i1 = grid.index(nr - 1, k);
        let s1 = m.values[i1].norm();
        m.values[i1] *= spec.target_r / s1;
    }
    Ok(m)
}

fn active_rows(m: &DiscreteMap) -> Vec<f64> {
    (0..m.grid.n_radial)
        .map(|i| {
            let row = m.row(i);
            row.iter().filter(|w| w.norm() <= 1.0 + ACTIVE_TOL).count() as f64 / row.len() as f64
        })
        .collect()
}

/// Minimizes the stencil energy over admissible degree-j maps on `grid`,
/// starting from `config.init`.
pub fn minimize(
    spec: &ProblemSpec,
    grid: PolarGrid,
    config: &OptimizerConfig,
) -> Result<(DiscreteMap, ConvergenceReport)> {
    config.validate()?;
    let start = initialize(spec, grid, config.init, config.seed)?;
    minimize_from(spec, start, config)
}

/// [`minimize`] from a given admissible starting map.
pub fn minimize_from(
    spec: &ProblemSpec,
    start: DiscreteMap,
    config: &OptimizerConfig,
) -> Result<(DiscreteMap, ConvergenceReport)> {
    config.validate()?;
    let grid = start.grid;
    init::check_grid(spec, &grid)?;
    let relaxer = Relaxer::new(&start);
    if !relaxer.windings_ok(&start.values) {
        return Err(Error::NonAdmissible(format!(
            "start map rows do not all wind {} times",
            spec.j
        )));
    }
    let grad_tol = config.grad_tol_for(grid.len());
    let mut w = start.values;
    let mut energy = relaxer.energy(&w);
    let mut trace = vec![energy];
    let mut degrees = Vec::new();
    let track = |values: &[num_complex::Complex64], degrees: &mut Vec<Option<i64>>| -> Result<()> {
        if config.track_degree {
            let m = DiscreteMap::from_values(grid, values.to_vec(), spec.target_r, spec.j as i32)?;
            degrees.push(degree_estimate(&m).ok().map(|d| d.degree));
        }
        Ok(())
    };
    track(&w, &mut degrees)?;

    let mut step = config.step0;
    let mut pc_step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut gradient_norm = relaxer.projected_gradient_norm(&w);
    let mut stalls = 0;
    while iterations < config.max_iters {
        iterations += 1;
        let harmonic = relaxer.harmonic_step(&w)?;
        w = harmonic.values;
        track(&w, &mut degrees)?;
        // boundary step preconditioned by the Schur complement first; plain
        // projected gradient when it finds no decrease
        let mut gs = relaxer.preconditioned_step(&w, pc_step, config);
        if gs.step_taken > 0.0 {
            pc_step = gs.next_step.min(1.0);
        } else {
            pc_step = 1.0;
            gs = relaxer.gradient_step(&w, step, config);
            step = gs.next_step;
        }
        w = gs.values;
        if gs.step_taken > 0.0 {
            track(&w, &mut degrees)?;
        }
        let new_energy = gs.energy;
        let change = (energy - new_energy).abs() / new_energy.abs().max(f64::MIN_POSITIVE);
        energy = new_energy;
        trace.push(energy);
        gradient_norm = relaxer.projected_gradient_norm(&w);
        if iterations % 100 == 0 {
            debug!(
                "iteration {iterations}: energy {energy:.12}, |pg| {gradient_norm:.3e}, step {:.3e}, pinned {}, cg {}",
                gs.step_taken, harmonic.pinned, harmonic.solve.iterations
            );
        }
        if change < config.energy_tol && gradient_norm < grad_tol {
            converged = true;
            break;
        }
        // no progress from either half-step: stationary up to round-off
        if change == 0.0 && gs.step_taken == 0.0 {
            stalls += 1;
            if stalls >= 3 {
                converged = gradient_norm < grad_tol;
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let map = DiscreteMap::from_values(grid, w, spec.target_r, spec.j as i32)?;
    let admissibility = map.admissibility();
    if admissibility.inner_boundary_error > config.projection_tol
        || admissibility.outer_boundary_error > config.projection_tol * spec.target_r
    {
        return Err(Error::NonAdmissible(format!(
            "final boundary moduli off by ({:.3e}, {:.3e})",
            admissibility.inner_boundary_error, admissibility.outer_boundary_error
        )));
    }
    let oracle_energy = energy_closed(spec)?.value;
    let oracle = oracle_samples(spec, grid)?;
    let (oracle_rms, oracle_rotation) = map.rotation_fit(&oracle);
    let rows = active_rows(&map);
    let interior = &rows[1..rows.len() - 1];
    let report = ConvergenceReport {
        iterations,
        converged,
        energy,
        dirichlet_energy: dirichlet_energy(&map),
        oracle_energy,
        gap_rel: (energy - oracle_energy) / oracle_energy,
        active_fraction: interior.iter().sum::<f64>() / interior.len() as f64,
        active_rows: rows,
        gradient_norm,
        grad_tol,
        oracle_rms,
        oracle_rotation,
        trace,
        degrees,
    };
    Ok((map, report))
}
