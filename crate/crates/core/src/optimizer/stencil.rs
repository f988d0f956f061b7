//! Five-point Dirichlet form on the log-polar grid and its Laplace solvers.
//!
//! In `x = log t` the Dirichlet energy is `∫∫ |w_x|^2 + |w_tau|^2 dx dtau`, so the
//! discrete energy is a sum over grid edges:
//!
//! ```text
//! E_h = Σ c_r |w_{i+1,k} - w_{i,k}|^2 + Σ θ_i c_a |w_{i,k+1} - w_{i,k}|^2
//! c_r = h_tau / h_x,  c_a = h_x / h_tau,  θ_i = 1/2 on the boundary rows
//! ```
//!
//! Its gradient at an interior node is `2 (L w)` with the 5-point polar stencil
//! `L w = c_r (2w - w_up - w_dn) + c_a (2w - w_left - w_right)`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::polargrid::PolarGrid;

#[derive(Clone)]
pub struct Stencil {
    pub nr: usize,
    pub nt: usize,
    pub cr: f64,
    pub ca: f64,
}

impl Stencil {
    pub fn new(grid: &PolarGrid) -> Self {
        let hx = grid.log_step();
        let ht = grid.angle_step();
        Stencil {
            nr: grid.n_radial,
            nt: grid.n_angular,
            cr: ht / hx,
            ca: hx / ht,
        }
    }

    #[inline]
    fn row_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nr - 1 {
            0.5
        } else {
            1.0
        }
    }

    pub fn energy(&self, w: &[Complex64]) -> f64 {
        let nt = self.nt;
        (0..self.nr)
            .into_par_iter()
            .map(|i| {
                let row = &w[i * nt..(i + 1) * nt];
                let mut angular = 0.0;
                for k in 0..nt {
                    angular += (row[(k + 1) % nt] - row[k]).norm_sqr();
                }
                let mut radial = 0.0;
                if i + 1 < self.nr {
                    let next = &w[(i + 1) * nt..(i + 2) * nt];
                    for k in 0..nt {
                        radial += (next[k] - row[k]).norm_sqr();
                    }
                }
                self.cr * radial + self.row_weight(i) * self.ca * angular
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    }

    /// Gradient of [`Stencil::energy`] with respect to every node value, with
    /// `(Re, Im)` packed as a complex number.
    pub fn gradient(&self, w: &[Complex64]) -> Vec<Complex64> {
        let (nr, nt) = (self.nr, self.nt);
        let mut out = vec![Complex64::default(); w.len()];
        out.par_chunks_mut(nt).enumerate().for_each(|(i, grow)| {
            let theta = self.row_weight(i);
            let row = &w[i * nt..(i + 1) * nt];
            for k in 0..nt {
                let c = row[k];
                let mut g =
                    theta * self.ca * (2.0 * c - row[(k + 1) % nt] - row[(k + nt - 1) % nt]);
                if i > 0 {
                    g += self.cr * (c - w[(i - 1) * nt + k]);
                }
                if i + 1 < nr {
                    g += self.cr * (c - w[(i + 1) * nt + k]);
                }
                grow[k] = 2.0 * g;
            }
        });
        out
    }

    /// `L w` on interior rows; zero on the boundary rows.
    pub fn apply(&self, w: &[Complex64], out: &mut [Complex64]) {
        let nt = self.nt;
        let nr = self.nr;
        out.par_chunks_mut(nt).enumerate().for_each(|(i, orow)| {
            if i == 0 || i == nr - 1 {
                orow.iter_mut().for_each(|v| *v = Complex64::default());
                return;
            }
            let row = &w[i * nt..(i + 1) * nt];
            let up = &w[(i + 1) * nt..(i + 2) * nt];
            let dn = &w[(i - 1) * nt..i * nt];
            for k in 0..nt {
                let c = row[k];
                orow[k] = self.cr * (2.0 * c - up[k] - dn[k])
                    + self.ca * (2.0 * c - row[(k + 1) % nt] - row[(k + nt - 1) % nt]);
            }
        });
    }

    /// Weighted mean of the stencil neighbours of interior node `(i, k)`: the
    /// unconstrained minimizer of the energy in that node alone.
    pub fn local_optimum(&self, w: &[Complex64], i: usize, k: usize) -> Complex64 {
        let nt = self.nt;
        let row = &w[i * nt..(i + 1) * nt];
        let s = self.cr * (w[(i + 1) * nt + k] + w[(i - 1) * nt + k])
            + self.ca * (row[(k + 1) % nt] + row[(k + nt - 1) % nt]);
        s / (2.0 * (self.cr + self.ca))
    }
}

/// Exact solver for `L u = f` on the interior rows with Dirichlet rows 0 and
/// `nr - 1`: FFT along the periodic angle, then one tridiagonal system in
/// `log t` per Fourier mode.
pub struct FastSolver {
    stencil: Stencil,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Thomas-algorithm multipliers per mode, `(nr - 2)` each.
    sweep: Vec<Vec<f64>>,
    pivots: Vec<Vec<f64>>,
}

impl FastSolver {
    pub fn new(stencil: Stencil) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(stencil.nt);
        let inverse = planner.plan_fft_inverse(stencil.nt);
        let n = stencil.nr - 2;
        let mut sweep = Vec::with_capacity(stencil.nt);
        let mut pivots = Vec::with_capacity(stencil.nt);
        for m in 0..stencil.nt {
            let lambda =
                2.0 - 2.0 * (2.0 * std::f64::consts::PI * m as f64 / stencil.nt as f64).cos();
            let diag = 2.0 * stencil.cr + stencil.ca * lambda;
            let off = -stencil.cr;
            let mut c = vec![0.0; n];
            let mut p = vec![0.0; n];
            let mut prev_c = 0.0;
            for i in 0..n {
                let piv = diag - off * prev_c;
                p[i] = piv;
                c[i] = off / piv;
                prev_c = c[i];
            }
            sweep.push(c);
            pivots.push(p);
        }
        FastSolver {
            stencil,
            forward,
            inverse,
            sweep,
            pivots,
        }
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    /// Transforms every row of `rows` (length a multiple of `nt`) to angular
    /// Fourier modes, or back (unnormalized, like the solver's own transforms).
    pub fn transform_rows(&self, rows: &mut [Complex64], forward: bool) {
        let plan = if forward {
            &self.forward
        } else {
            &self.inverse
        };
        rows.par_chunks_mut(self.stencil.nt)
            .for_each(|row| plan.process(row));
    }

    /// Per angular mode, the Schur complement of the energy Hessian onto the
    /// two boundary rows once the interior is eliminated:
    /// `[s_inner, s_outer, s_cross]` (the energy of boundary data `b` after a
    /// harmonic extension is `b^H S b`, summed over modes, up to the FFT scale).
    pub fn boundary_schur(&self) -> Vec<[f64; 3]> {
        let st = &self.stencil;
        let n = st.nr - 2;
        let off = -st.cr;
        (0..st.nt)
            .map(|m| {
                let lambda =
                    2.0 - 2.0 * (2.0 * std::f64::consts::PI * m as f64 / st.nt as f64).cos();
                let d_b = st.cr + 0.5 * st.ca * lambda;
                // first column of the inverse of the interior block
                let (c, p) = (&self.sweep[m], &self.pivots[m]);
                let mut x = vec![0.0; n];
                let mut prev = 0.0;
                for i in 0..n {
                    let rhs = if i == 0 { 1.0 } else { 0.0 };
                    x[i] = (rhs - off * prev) / p[i];
                    prev = x[i];
                }
                for i in (0..n - 1).rev() {
                    x[i] -= c[i] * x[i + 1];
                }
                // the interior block is persymmetric, so X_nn = X_11
                let cr2 = st.cr * st.cr;
                [d_b - cr2 * x[0], d_b - cr2 * x[0], -cr2 * x[n - 1]]
            })
            .collect()
    }

    /// Solves `L u = f` on interior rows; `u`'s rows 0 and `nr - 1` are the
    /// Dirichlet data and are left untouched.
    pub fn solve(&self, f: &[Complex64], u: &mut [Complex64]) {
        let (nr, nt) = (self.stencil.nr, self.stencil.nt);
        let n = nr - 2;
        let cr = self.stencil.cr;
        // right-hand side with boundary rows moved over
        let mut rhs: Vec<Complex64> = f[nt..(nr - 1) * nt].to_vec();
        for k in 0..nt {
            rhs[k] += cr * u[k];
            rhs[(n - 1) * nt + k] += cr * u[(nr - 1) * nt + k];
        }
        rhs.par_chunks_mut(nt)
            .for_each(|row| self.forward.process(row));

        // transpose to mode-major for the tridiagonal sweeps
        let mut modes = vec![Complex64::default(); n * nt];
        for i in 0..n {
            for m in 0..nt {
                modes[m * n + i] = rhs[i * nt + m];
            }
        }
        let off = -cr;
        modes.par_chunks_mut(n).enumerate().for_each(|(m, col)| {
            let c = &self.sweep[m];
            let p = &self.pivots[m];
            let mut prev = Complex64::default();
            for i in 0..n {
                col[i] = (col[i] - off * prev) / p[i];
                prev = col[i];
            }
            for i in (0..n - 1).rev() {
                col[i] -= c[i] * col[i + 1];
            }
        });
        for i in 0..n {
            for m in 0..nt {
                rhs[i * nt + m] = modes[m * n + i];
            }
        }
        let scale = 1.0 / nt as f64;
        rhs.par_chunks_mut(nt).for_each(|row| {
            self.inverse.process(row);
            row.iter_mut().for_each(|v| *v *= scale);
        });
        u[nt..(nr - 1) * nt].copy_from_slice(&rhs);
    }
}

/// Outcome of a Laplace solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    // collected first so the summation order, and hence the result, does not
    // depend on work stealing
    a.par_iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// Makes `w` discrete-harmonic on the interior nodes flagged in `free`, holding
/// every other node fixed.
///
/// With no fixed interior node this is one exact fast solve; otherwise
/// conjugate gradients on the free nodes, preconditioned by the fast solver.
pub fn solve_free(
    solver: &FastSolver,
    w: &mut [Complex64],
    free: &[bool],
    rel_tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let st = solver.stencil();
    let (nr, nt) = (st.nr, st.nt);
    let all_free = (nt..(nr - 1) * nt).all(|idx| free[idx]);
    let zero = vec![Complex64::default(); w.len()];
    if all_free {
        solver.solve(&zero, w);
        let mut r = vec![Complex64::default(); w.len()];
        st.apply(w, &mut r);
        let scale = boundary_scale(st, w);
        let residual = dot(&r, &r).sqrt() / scale;
        return Ok(SolveStats {
            iterations: 1,
            residual,
        });
    }

    let mask = |v: &mut [Complex64]| {
        v.par_iter_mut().zip(free.par_iter()).for_each(|(x, &f)| {
            if !f {
                *x = Complex64::default();
            }
        })
    };
    let precondition = |r: &[Complex64]| -> Vec<Complex64> {
        let mut z = vec![Complex64::default(); r.len()];
        solver.solve(r, &mut z);
        mask(&mut z);
        z
    };

    // residual r = -(L w) on free nodes
    let mut lw = vec![Complex64::default(); w.len()];
    st.apply(w, &mut lw);
    let mut r: Vec<Complex64> = lw.iter().map(|v| -v).collect();
    mask(&mut r);
    // the fixed data alone sets the scale of the right-hand side
    let mut fixed = w.to_vec();
    for (x, &f) in fixed.iter_mut().zip(free) {
        if f {
            *x = Complex64::default();
        }
    }
    let mut b = vec![Complex64::default(); w.len()];
    st.apply(&fixed, &mut b);
    mask(&mut b);
    let b_norm = dot(&b, &b).sqrt().max(f64::MIN_POSITIVE);

    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![Complex64::default(); w.len()];
    for it in 0..max_iter {
        let res = dot(&r, &r).sqrt() / b_norm;
        if res <= rel_tol {
            return Ok(SolveStats {
                iterations: it,
                residual: res,
            });
        }
        st.apply(&p, &mut ap);
        mask(&mut ap);
        let alpha = rz / dot(&p, &ap);
        w.par_iter_mut()
            .zip(p.par_iter())
            .for_each(|(x, d)| *x += alpha * d);
        r.par_iter_mut()
            .zip(ap.par_iter())
            .for_each(|(x, d)| *x -= alpha * d);
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut()
            .zip(z.par_iter())
            .for_each(|(x, d)| *x = d + beta * *x);
    }
    let residual = dot(&r, &r).sqrt() / b_norm;
    if residual <= rel_tol {
        Ok(SolveStats {
            iterations: max_iter,
            residual,
        })
    } else {
        Err(Error::LinearSolve {
            residual,
            iterations: max_iter,
        })
    }
}

fn boundary_scale(st: &Stencil, w: &[Complex64]) -> f64 {
    let nt = st.nt;
    let nr = st.nr;
    let mut fixed = vec![Complex64::default(); w.len()];
    fixed[..nt].copy_from_slice(&w[..nt]);
    fixed[(nr - 1) * nt..].copy_from_slice(&w[(nr - 1) * nt..]);
    let mut b = vec![Complex64::default(); w.len()];
    st.apply(&fixed, &mut b);
    dot(&b, &b).sqrt().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::RadialProfile;
    use crate::polargrid::DiscreteMap;

    fn grid(nr: usize, nt: usize) -> PolarGrid {
        PolarGrid::new(1.0, 2.0, nr, nt).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = grid(6, 8);
        let st = Stencil::new(&g);
        let w: Vec<Complex64> = (0..g.len())
            .map(|n| Complex64::new((n as f64 * 0.37).sin(), (n as f64 * 0.11).cos()))
            .collect();
        let grad = st.gradient(&w);
        let h = 1e-6;
        for n in [0, 5, 17, 30, 47] {
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let mut plus = w.clone();
                let mut minus = w.clone();
                plus[n] += h * dir;
                minus[n] -= h * dir;
                let fd = (st.energy(&plus) - st.energy(&minus)) / (2.0 * h);
                let an = grad[n].re * dir.re + grad[n].im * dir.im;
                assert!((fd - an).abs() < 1e-6, "node {n}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn stencil_energy_of_power_map() {
        let g = grid(129, 256);
        let m = DiscreteMap::sample(|z| z * z, g, 4.0, 2).unwrap();
        let e = Stencil::new(&g).energy(&m.values);
        let exact = 60.0 * std::f64::consts::PI;
        assert!((e - exact).abs() / exact < 1e-3);
    }

    #[test]
    fn fast_solver_reproduces_harmonic_maps() {
        // z^2 and the critical radial map are harmonic; the discrete solution
        // with their boundary data is O(h^2) close
        let p = RadialProfile::critical(17.0 / 8.0, 2).unwrap();
        for f in [
            Box::new(|z: Complex64| z * z) as Box<dyn Fn(Complex64) -> Complex64>,
            Box::new(move |z| p.map(z)),
        ] {
            let mut errs = Vec::new();
            for (nr, nt) in [(33, 64), (65, 128)] {
                let g = grid(nr, nt);
                let exact = DiscreteMap::sample(&f, g, 4.0, 2).unwrap();
                let mut w = exact.values.clone();
                for v in &mut w[nt..(nr - 1) * nt] {
                    *v = Complex64::default();
                }
                let solver = FastSolver::new(Stencil::new(&g));
                let free = vec![true; g.len()];
                let stats = solve_free(&solver, &mut w, &free, 1e-10, 10).unwrap();
                assert!(stats.residual < 1e-10, "{stats:?}");
                let err = w
                    .iter()
                    .zip(&exact.values)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                errs.push(err);
            }
            assert!(errs[1] < 1e-3);
            assert!(errs[0] / errs[1] > 3.5);
        }
    }

    #[test]
    fn boundary_schur_matches_harmonic_extension_energy() {
        let g = grid(12, 16);
        let st = Stencil::new(&g);
        let solver = FastSolver::new(st.clone());
        let schur = solver.boundary_schur();
        for m in [0usize, 1, 5] {
            for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.7, -0.4)] {
                let mut w = vec![Complex64::default(); g.len()];
                for k in 0..16 {
                    let e = Complex64::from_polar(
                        1.0,
                        2.0 * std::f64::consts::PI * (m * k) as f64 / 16.0,
                    );
                    w[k] = a * e;
                    w[11 * 16 + k] = b * e;
                }
                solver.solve(&vec![Complex64::default(); g.len()], &mut w);
                let [s11, s22, s12] = schur[m];
                // one Fourier mode of amplitude 1 carries nt in the unnormalized transform
                let predicted = 16.0 * (s11 * a * a + s22 * b * b + 2.0 * s12 * a * b);
                let e = st.energy(&w);
                assert!(
                    (e - predicted).abs() < 1e-10 * (1.0 + e),
                    "m={m}: {e} vs {predicted}"
                );
            }
        }
    }

    #[test]
    fn cg_with_fixed_nodes_solves_restricted_problem() {
        let g = grid(17, 32);
        let st = Stencil::new(&g);
        let solver = FastSolver::new(st.clone());
        let mut w: Vec<Complex64> = (0..g.len())
            .map(|n| Complex64::new(1.0 + (n as f64 * 0.3).sin(), (n as f64 * 0.7).cos()))
            .collect();
        let mut free = vec![true; g.len()];
        for k in 0..32 {
            free[k] = false;
            free[16 * 32 + k] = false;
        }
        free[5 * 32..7 * 32].fill(false);
        free[10 * 32 + 3] = false;
        let before: Vec<Complex64> = w.clone();
        let stats = solve_free(&solver, &mut w, &free, 1e-12, 500).unwrap();
        assert!(stats.iterations > 0);
        let mut lw = vec![Complex64::default(); w.len()];
        st.apply(&w, &mut lw);
        for idx in 0..g.len() {
            if free[idx] {
                assert!(lw[idx].norm() < 1e-9, "residual at {idx}");
            } else {
                assert_eq!(w[idx], before[idx]);
            }
        }
    }
}
