use num_complex::Complex64;
use rayon::prelude::*;

use super::DiscreteMap;

/// Polar derivatives `g_N = dg/dt` and `g_T = (1/t) dg/dtau` at every node.
#[derive(Debug, Clone)]
pub struct Differentials {
    pub normal: Vec<Complex64>,
    pub tangential: Vec<Complex64>,
}

impl Differentials {
    /// `|g_N|^2 + |g_T|^2` per node.
    pub fn density(&self) -> Vec<f64> {
        self.normal
            .iter()
            .zip(&self.tangential)
            .map(|(n, t)| n.norm_sqr() + t.norm_sqr())
            .collect()
    }
}

/// Second-order differences: centered in `log t` inside, one-sided second-order on
/// the two boundary rows, centered periodic in `tau`.
pub fn differentials(m: &DiscreteMap) -> Differentials {
    let g = &m.grid;
    let (nr, nt) = (g.n_radial, g.n_angular);
    let hx = g.log_step();
    let ht = g.angle_step();
    let mut normal = vec![Complex64::default(); g.len()];
    let mut tangential = vec![Complex64::default(); g.len()];
    normal
        .par_chunks_mut(nt)
        .zip(tangential.par_chunks_mut(nt))
        .enumerate()
        .for_each(|(i, (nrow, trow))| {
            let t = g.radius(i);
            let w = |ii: usize, k: usize| m.values[ii * nt + k];
            for k in 0..nt {
                // d/dx with x = log t, then dg/dt = (dg/dx) / t
                let dx = if i == 0 {
                    -3.0 * w(0, k) + 4.0 * w(1, k) - w(2, k)
                } else if i == nr - 1 {
                    3.0 * w(i, k) - 4.0 * w(i - 1, k) + w(i - 2, k)
                } else {
                    w(i + 1, k) - w(i - 1, k)
                } / (2.0 * hx);
                nrow[k] = dx / t;
                let next = w(i, (k + 1) % nt);
                let prev = w(i, (k + nt - 1) % nt);
                trow[k] = (next - prev) / (2.0 * ht * t);
            }
        });
    Differentials { normal, tangential }
}

/// `det Dg = Im(g_T conj(g_N))` per node.
pub fn jacobian(m: &DiscreteMap) -> Vec<f64> {
    let d = differentials(m);
    jacobian_from(&d)
}

pub(crate) fn jacobian_from(d: &Differentials) -> Vec<f64> {
    d.normal
        .iter()
        .zip(&d.tangential)
        .map(|(n, t)| (t * n.conj()).im)
        .collect()
}

/// Trapezoidal quadrature of `|g_N|^2 + |g_T|^2` over the annulus.
pub fn dirichlet_energy(m: &DiscreteMap) -> f64 {
    m.grid.integrate(&differentials(m).density())
}
