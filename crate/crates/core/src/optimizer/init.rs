use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closedform::ProblemSpec;
use crate::error::{Error, Result};
use crate::polargrid::{DiscreteMap, PolarGrid};

/// Starting map of a minimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// `e^{i j tau}` times a modulus linear in `t` from 1 to `R`.
    RadialInterp,
    /// `z^j` with its modulus rescaled affinely onto `[1, R]`.
    PowerMap,
    /// [`InitMode::RadialInterp`] plus seeded smooth phase and modulus noise.
    Perturbed,
}

/// Highest angular harmonic of the perturbation.
const NOISE_MODES: usize = 4;
/// Total amplitude (radians) of the phase noise.
const PHASE_NOISE: f64 = 0.2;
/// Amplitude of the interior modulus noise, relative to `R - 1`.
const MODULUS_NOISE: f64 = 0.15;

/// Checks that `grid` is a (possibly rescaled) copy of the domain annulus.
pub(crate) fn check_grid(spec: &ProblemSpec, grid: &PolarGrid) -> Result<()> {
    let ratio = grid.t_max / grid.t_min;
    if (ratio - spec.r).abs() > 1e-9 * spec.r {
        return Err(Error::Config(format!(
            "grid radii [{}, {}] do not span a copy of A(1, {})",
            grid.t_min, grid.t_max, spec.r
        )));
    }
    Ok(())
}

/// Admissible degree-j starting map on `grid`. `seed` only affects
/// [`InitMode::Perturbed`].
pub fn initialize(
    spec: &ProblemSpec,
    grid: PolarGrid,
    mode: InitMode,
    seed: u64,
) -> Result<DiscreteMap> {
    check_grid(spec, &grid)?;
    let big_r = spec.target_r;
    let j = spec.j as i32;
    let (t0, t1) = (grid.t_min, grid.t_max);
    let nr = grid.n_radial;
    let linear: Vec<f64> = (0..nr)
        .map(|i| {
            if i + 1 == nr {
                big_r
            } else {
                1.0 + (big_r - 1.0) * (grid.radius(i) - t0) / (t1 - t0)
            }
        })
        .collect();
    let modulus: Vec<f64> = match mode {
        InitMode::RadialInterp | InitMode::Perturbed => linear,
        InitMode::PowerMap => {
            let (p0, p1) = (t0.powi(j), t1.powi(j));
            (0..nr)
                .map(|i| {
                    if i + 1 == nr {
                        big_r
                    } else {
                        1.0 + (big_r - 1.0) * (grid.radius(i).powi(j) - p0) / (p1 - p0)
                    }
                })
                .collect()
        }
    };

    let mut phase_noise = vec![0.0; grid.len()];
    let mut modulus_noise = vec![0.0; grid.len()];
    if mode == InitMode::Perturbed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // each harmonic: independent random amplitudes at the two boundaries,
        // blended linearly in log t, so the boundary rows are perturbed as well
        let mut phase_terms = Vec::new();
        let mut modulus_terms = Vec::new();
        for m in 1..=NOISE_MODES {
            let weight = 1.0 / m as f64;
            phase_terms.push((
                m as f64,
                weight * rng.gen_range(-1.0..1.0),
                weight * rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            ));
            modulus_terms.push((
                m as f64,
                weight * rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            ));
        }
        let phase_norm: f64 = (1..=NOISE_MODES).map(|m| 1.0 / m as f64).sum();
        for i in 0..nr {
            let s = i as f64 / (nr - 1) as f64;
            let bump = 4.0 * s * (1.0 - s);
            for k in 0..grid.n_angular {
                let tau = grid.angle(k);
                let idx = grid.index(i, k);
                phase_noise[idx] = PHASE_NOISE / phase_norm
                    * phase_terms
                        .iter()
                        .map(|&(m, a0, a1, ph)| ((1.0 - s) * a0 + s * a1) * (m * tau + ph).sin())
                        .sum::<f64>();
                modulus_noise[idx] = MODULUS_NOISE / phase_norm
                    * (big_r - 1.0)
                    * bump
                    * modulus_terms
                        .iter()
                        .map(|&(m, a, ph)| a * (m * tau + ph).cos())
                        .sum::<f64>();
            }
        }
    }

    let mut values = Vec::with_capacity(grid.len());
    for (i, &base) in modulus.iter().enumerate() {
        for k in 0..grid.n_angular {
            let idx = grid.index(i, k);
            let rho = (base + modulus_noise[idx]).clamp(1.0, big_r);
            let arg = j as f64 * grid.angle(k) + phase_noise[idx];
            values.push(Complex64::from_polar(rho, arg));
        }
    }
    DiscreteMap::from_values(grid, values, big_r, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polargrid::{degree_estimate, winding_number};

    fn setup() -> (ProblemSpec, PolarGrid) {
        let spec = ProblemSpec::normalized(2.0, 17.0 / 8.0, 2).unwrap();
        (spec, PolarGrid::new(1.0, 2.0, 33, 64).unwrap())
    }

    #[test]
    fn radial_interp_boundary_moduli() {
        let (spec, grid) = setup();
        let m = initialize(&spec, grid, InitMode::RadialInterp, 0).unwrap();
        for w in m.row(0) {
            assert!((w.norm() - 1.0).abs() < 1e-15);
        }
        for w in m.row(32) {
            assert!((w.norm() - 2.125).abs() < 1e-15);
        }
        let mid = m.at(16, 0).norm();
        let t = grid.radius(16);
        assert!((mid - (1.0 + 1.125 * (t - 1.0))).abs() < 1e-14);
    }

    #[test]
    fn power_map_winds_j_times() {
        let (spec, grid) = setup();
        let m = initialize(&spec, grid, InitMode::PowerMap, 0).unwrap();
        for i in 0..grid.n_radial {
            assert_eq!(winding_number(&m, i).unwrap(), 2);
        }
        m.check_admissible().unwrap();
    }

    #[test]
    fn perturbed_maps_are_admissible_and_seeded() {
        let (spec, grid) = setup();
        for seed in 0..10 {
            let m = initialize(&spec, grid, InitMode::Perturbed, seed).unwrap();
            m.check_admissible().unwrap();
            assert_eq!(degree_estimate(&m).unwrap().degree, 2);
            let again = initialize(&spec, grid, InitMode::Perturbed, seed).unwrap();
            assert_eq!(m, again);
        }
        let a = initialize(&spec, grid, InitMode::Perturbed, 1).unwrap();
        let b = initialize(&spec, grid, InitMode::Perturbed, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn rejects_mismatched_grid() {
        let (spec, _) = setup();
        let g = PolarGrid::new(1.0, 3.0, 9, 16).unwrap();
        assert!(matches!(
            initialize(&spec, g, InitMode::RadialInterp, 0),
            Err(Error::Config(_))
        ));
        // a rescaled copy is fine
        let g = PolarGrid::new(0.5, 1.0, 9, 16).unwrap();
        initialize(&spec, g, InitMode::RadialInterp, 0).unwrap();
    }
}
