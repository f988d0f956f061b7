//! Lower-bound certificates for the Dirichlet energy.
//!
//! For every admissible map the energy density dominates, node by node, a
//! combination of four null-Lagrangian integrands:
//!
//! ```text
//! |g_N|^2 + |g_T|^2 >= X(s) ∂_t|g| / t + Y(t) Im(g_T / g) + Z(s) det Dg + W(t),   s = |g|
//! ```
//!
//! and each of the four integrals depends only on the boundary data and the
//! degree, so their sum is a lower bound valid for every competitor.
//!
//! * elastic (`c1 >= 0`): `X = 2 c1 / sqrt(j^2 s^2 + c1)`, `Z = 2 j s / sqrt(j^2 s^2 + c1)`,
//!   `W = -c1 / t^2`, `Y = 0`;
//! * non-elastic (`c1 <= 0`): `Y = -2 c1 / (j t)`, `Z = 2 sqrt(j^2 s^2 + c1) / (j s)`,
//!   `W = c1 / t^2`, `X = 0`; below the bound with `c1 = -j^2` on the internal annulus.

mod weights;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use weights::{
    lagrangian_a, lagrangian_b, lagrangian_c, lagrangian_d, LagrangianWeights, Sides, WeightTable,
};

use crate::closedform::{energy_closed, ProblemSpec, RadialProfile};
use crate::error::{Error, Result};
use crate::polargrid::{differentials, jacobian_from, DiscreteMap, PolarGrid};

/// Knots per weight table.
pub const TABLE_KNOTS: usize = 2049;
/// Relative energy deficit tolerated before a certificate counts as violated.
pub const CERTIFICATE_RTOL: f64 = 1e-3;

/// Which coefficient family the certificate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateRegime {
    Elastic,
    NonElastic,
}

/// Coefficients of the pointwise subgradient inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgradientCoefficients {
    pub regime: CertificateRegime,
    pub c1: f64,
    pub j: u32,
}

impl SubgradientCoefficients {
    /// Coefficient family `regime` for the constant `c1`; the family must match
    /// the sign of `c1` (`c1 = 0` admits both).
    pub fn new(c1: f64, j: u32, regime: CertificateRegime) -> Result<Self> {
        let j2 = (j * j) as f64;
        if j == 0 || !c1.is_finite() {
            return Err(Error::Config(format!(
                "invalid coefficients c1 = {c1}, j = {j}"
            )));
        }
        match regime {
            CertificateRegime::Elastic if c1 < 0.0 => Err(Error::Config(format!(
                "elastic coefficients need c1 >= 0, got {c1}"
            ))),
            CertificateRegime::NonElastic if c1 > 0.0 || c1 < -j2 * (1.0 + 1e-12) => {
                Err(Error::Config(format!(
                    "non-elastic coefficients need -j^2 <= c1 <= 0, got {c1}"
                )))
            }
            _ => Ok(SubgradientCoefficients { regime, c1, j }),
        }
    }

    /// The family that certifies the minimum of `spec`.
    pub fn for_problem(spec: &ProblemSpec) -> Result<Self> {
        if spec.is_above_bound() {
            let c1 = crate::closedform::solve_radial(spec)?.c1;
            let regime = if c1 >= 0.0 {
                CertificateRegime::Elastic
            } else {
                CertificateRegime::NonElastic
            };
            SubgradientCoefficients::new(c1, spec.j, regime)
        } else {
            SubgradientCoefficients::new(
                -((spec.j * spec.j) as f64),
                spec.j,
                CertificateRegime::NonElastic,
            )
        }
    }

    /// Checks the family against the problem it is applied to.
    pub fn check_for(&self, spec: &ProblemSpec) -> Result<()> {
        let expected = SubgradientCoefficients::for_problem(spec)?;
        let scale = 1.0 + expected.c1.abs();
        if (expected.c1 - self.c1).abs() > 1e-9 * scale || expected.j != self.j {
            return Err(Error::Config(format!(
                "coefficients built for c1 = {}, problem has c1 = {}",
                self.c1, expected.c1
            )));
        }
        let compatible = self.regime == expected.regime || expected.c1 == 0.0;
        if !compatible {
            return Err(Error::Config(format!(
                "{:?} coefficients applied to a {:?} problem (c1 = {})",
                self.regime, expected.regime, expected.c1
            )));
        }
        Ok(())
    }

    fn jf(&self) -> f64 {
        self.j as f64
    }

    fn root(&self, s: f64) -> f64 {
        (self.jf() * self.jf() * s * s + self.c1).max(0.0).sqrt()
    }

    /// `α(s) = j s / sqrt(j^2 s^2 + c1)`.
    pub fn alpha(&self, s: f64) -> f64 {
        self.jf() * s / self.root(s)
    }

    /// `β(s) = sqrt(j^2 s^2 + c1) / (j s)`.
    pub fn beta(&self, s: f64) -> f64 {
        self.root(s) / (self.jf() * s)
    }

    /// `γ(s) = 2 c1 / sqrt(j^2 s^2 + c1)`.
    pub fn gamma(&self, s: f64) -> f64 {
        2.0 * self.c1 / self.root(s)
    }

    /// `δ(t) = -c1 / t^2`.
    pub fn delta(&self, t: f64) -> f64 {
        -self.c1 / (t * t)
    }

    /// `μ(t) = c1 / t^2`.
    pub fn mu(&self, t: f64) -> f64 {
        self.c1 / (t * t)
    }

    /// `ν(t) = -2 c1 / (j t)`.
    pub fn nu(&self, t: f64) -> f64 {
        -2.0 * self.c1 / (self.jf() * t)
    }

    /// Weight of `∂_t|g| / t`.
    pub fn x(&self, s: f64) -> f64 {
        match self.regime {
            CertificateRegime::Elastic => self.gamma(s),
            CertificateRegime::NonElastic => 0.0,
        }
    }

    /// Weight of `Im(g_T / g)`.
    pub fn y(&self, t: f64) -> f64 {
        match self.regime {
            CertificateRegime::Elastic => 0.0,
            CertificateRegime::NonElastic => self.nu(t),
        }
    }

    /// Weight of `det Dg`.
    pub fn z(&self, s: f64) -> f64 {
        match self.regime {
            CertificateRegime::Elastic => 2.0 * self.alpha(s),
            CertificateRegime::NonElastic => 2.0 * self.beta(s),
        }
    }

    /// Free term.
    pub fn w(&self, t: f64) -> f64 {
        match self.regime {
            CertificateRegime::Elastic => self.delta(t),
            CertificateRegime::NonElastic => self.mu(t),
        }
    }

    /// The subgradient integrand at one node.
    pub fn integrand(
        &self,
        t: f64,
        s: f64,
        radial_derivative: f64,
        angular_speed: f64,
        det: f64,
    ) -> f64 {
        self.x(s) * radial_derivative / t + self.y(t) * angular_speed + self.z(s) * det + self.w(t)
    }

    /// Relative defect of the equality condition: `α|g_N| = |g_T|` (elastic) or
    /// `β|g_T| = |g_N|` (non-elastic).
    pub fn equality_defect(&self, s: f64, gn: f64, gt: f64) -> f64 {
        let scale = gn.max(gt).max(f64::MIN_POSITIVE);
        match self.regime {
            CertificateRegime::Elastic => (self.alpha(s) * gn - gt).abs() / scale,
            CertificateRegime::NonElastic => (self.beta(s) * gt - gn).abs() / scale,
        }
    }

    /// Sampled tables of the four weights: `M = W` and `B = Y` on
    /// `[t_lo, t_hi]`, `N = Z` and `A = X` on `[1, R]`.
    pub fn weights(&self, t_lo: f64, t_hi: f64, target_r: f64) -> Result<LagrangianWeights> {
        Ok(LagrangianWeights {
            m: WeightTable::sample(|t| self.w(t), t_lo, t_hi, TABLE_KNOTS)?,
            n: WeightTable::sample(|s| self.z(s), 1.0, target_r, TABLE_KNOTS)?,
            a: WeightTable::sample(|s| self.x(s), 1.0, target_r, TABLE_KNOTS)?,
            b: WeightTable::sample(|t| self.y(t), t_lo, t_hi, TABLE_KNOTS)?,
        })
    }

    /// Sum of the four right-hand sides, integrated directly from the
    /// coefficient functions.
    pub fn certified_integral(&self, t_lo: f64, t_hi: f64, target_r: f64) -> f64 {
        let j = self.jf();
        // s = 1 + v^2 smooths the square-root behaviour of the s-weights at s = 1
        let in_s = |f: &dyn Fn(f64) -> f64| {
            simpson(
                |v| f(1.0 + v * v) * 2.0 * v,
                0.0,
                (target_r - 1.0).sqrt(),
                4096,
            )
        };
        let in_t =
            |f: &dyn Fn(f64) -> f64| simpson(|x| f(x.exp()) * x.exp(), t_lo.ln(), t_hi.ln(), 4096);
        2.0 * PI * in_t(&|t| t * self.w(t))
            + 2.0 * PI * j * in_s(&|s| s * self.z(s))
            + 2.0 * PI * in_s(&|s| self.x(s))
            + 2.0 * PI * j * in_t(&|t| self.y(t))
    }
}

/// Composite Simpson rule with `panels` (even) subintervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        sum += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    sum * h / 3.0
}

/// Minimum energy of the normalized problem: the harmonic energy above the
/// bound, the energy of the squeezing minimizer below it.
pub fn lower_bound(spec: &ProblemSpec) -> Result<f64> {
    Ok(energy_closed(spec)?.value)
}

/// `∫_1^{G(t)} ds / sqrt(j^2 s^2 + c1)` by quadrature; equals `log t` along the
/// radial profile.
pub fn okey_integral(profile: &RadialProfile, t: f64) -> f64 {
    let (g, _, _) = profile.eval_unchecked(t);
    let j2 = profile.jf() * profile.jf();
    let upper = (g - 1.0).max(0.0).sqrt();
    // s = 1 + v^2 removes the endpoint singularity when c1 = -j^2
    simpson(
        |v| {
            let s = 1.0 + v * v;
            let q = j2 * s * s + profile.c1;
            if v == 0.0 && q <= 0.0 {
                // limit of 2v / sqrt(j^2 ((1+v^2)^2 - 1)) as v -> 0
                2.0 / (profile.jf() * 2f64.sqrt())
            } else {
                2.0 * v / q.sqrt()
            }
        },
        0.0,
        upper,
        4096,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub regime: CertificateRegime,
    pub c1: f64,
    pub lagrangian_a: [f64; 2],
    pub lagrangian_b: [f64; 2],
    pub lagrangian_c: [f64; 2],
    pub lagrangian_d: [f64; 2],
    /// Grid quadrature of the subgradient integrand.
    pub certified_value: f64,
    /// Closed-form minimum energy.
    pub lower_bound: f64,
    /// Grid quadrature of the energy density.
    pub energy: f64,
    /// `energy - certified_value`; non-negative node by node.
    pub slack: f64,
    pub slack_rel: f64,
    /// Largest excess of the integrand over the energy density at any node,
    /// with round-off-sized excesses reported as zero.
    pub max_pointwise_violation: f64,
    /// Largest relative defect of the equality condition over the nodes.
    pub equality_defect: f64,
}

impl CertificateReport {
    /// True when the energy falls short of the lower bound by more than
    /// `rtol` relative, or the pointwise inequality fails anywhere.
    pub fn is_violated(&self, rtol: f64) -> bool {
        self.energy < self.lower_bound - rtol * self.lower_bound.abs()
            || self.max_pointwise_violation > 0.0
    }
}

/// `m` on the internal annulus of `spec` (maps on rescaled copies of the
/// domain are moved there; the energy is scale invariant).
fn on_working_domain(m: &DiscreteMap, spec: &ProblemSpec) -> Result<DiscreteMap> {
    let (lo, hi) = spec.working_domain();
    let g = m.grid;
    if ((g.t_max / g.t_min) - hi / lo).abs() > 1e-9 * hi / lo {
        return Err(Error::Config(format!(
            "map grid [{}, {}] is not a copy of the domain annulus of ratio {}",
            g.t_min, g.t_max, spec.r
        )));
    }
    let grid = PolarGrid::new(lo, hi, g.n_radial, g.n_angular)?;
    DiscreteMap::from_values(grid, m.values.clone(), m.target_r, m.degree)
}

/// Certifies `m` against the minimum of `spec` with the matching coefficient
/// family.
pub fn certify(m: &DiscreteMap, spec: &ProblemSpec) -> Result<CertificateReport> {
    certify_with(m, spec, &SubgradientCoefficients::for_problem(spec)?)
}

pub fn certify_with(
    m: &DiscreteMap,
    spec: &ProblemSpec,
    coeffs: &SubgradientCoefficients,
) -> Result<CertificateReport> {
    coeffs.check_for(spec)?;
    if (m.target_r - spec.target_r).abs() > 1e-12 * spec.target_r || m.degree != spec.j as i32 {
        return Err(Error::Config(format!(
            "map targets A(1, {}) with degree {}, problem is A(1, {}) with degree {}",
            m.target_r, m.degree, spec.target_r, spec.j
        )));
    }
    m.check_admissible()?;
    let m = on_working_domain(m, spec)?;
    let grid = m.grid;
    let d = differentials(&m);
    let det = jacobian_from(&d);
    let nt = grid.n_angular;

    let (integrand, (density, (violation, defect))): NodeColumns = (0..m.values.len())
        .into_par_iter()
        .map(|n| {
            let t = grid.radius(n / nt);
            let w = m.values[n];
            let s = w.norm();
            let (gn, gt) = (d.normal[n], d.tangential[n]);
            let radial = (w.conj() * gn).re / s;
            let angular = (gt / w).im;
            let x = coeffs.x(s) * radial / t;
            let y = coeffs.y(t) * angular;
            let z = coeffs.z(s) * det[n];
            let f = coeffs.w(t);
            let value = x + y + z + f;
            let dens = gn.norm_sqr() + gt.norm_sqr();
            let magnitude = dens + x.abs() + y.abs() + z.abs() + f.abs();
            let excess = value - dens;
            let excess = if excess <= 10.0 * f64::EPSILON * magnitude {
                0.0
            } else {
                excess
            };
            (
                value,
                (
                    dens,
                    (excess, coeffs.equality_defect(s, gn.norm(), gt.norm())),
                ),
            )
        })
        .unzip();

    let (lo, hi) = (grid.t_min, grid.t_max);
    let weights = coeffs.weights(lo, hi, spec.target_r)?;
    let a = weights::lagrangian_a(&m, &weights.m)?;
    let b = weights::lagrangian_b_with(&m, &d, &weights.n)?;
    let c = weights::lagrangian_c_with(&m, &d, &weights.a)?;
    let dd = weights::lagrangian_d_with(&m, &d, &weights.b)?;

    let certified_value = grid.integrate(&integrand);
    let energy = grid.integrate(&density);
    let slack = energy - certified_value;
    Ok(CertificateReport {
        regime: coeffs.regime,
        c1: coeffs.c1,
        lagrangian_a: [a.0, a.1],
        lagrangian_b: [b.0, b.1],
        lagrangian_c: [c.0, c.1],
        lagrangian_d: [dd.0, dd.1],
        certified_value,
        lower_bound: lower_bound(spec)?,
        energy,
        slack,
        slack_rel: slack / certified_value.abs().max(f64::MIN_POSITIVE),
        max_pointwise_violation: violation.into_iter().fold(0.0, f64::max),
        equality_defect: defect.into_iter().fold(0.0, f64::max),
    })
}

/// Per-node integrand, energy density, pointwise violation and equality defect.
type NodeColumns = (Vec<f64>, (Vec<f64>, (Vec<f64>, Vec<f64>)));

/// Seeded admissible perturbation of `m`: smooth phase noise on every row
/// (boundary rows slide along their circles) and interior modulus noise,
/// clamped into `[1, R]`.
pub fn perturb(m: &DiscreteMap, seed: u64, amplitude: f64) -> DiscreteMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = m.grid;
    let terms: Vec<(f64, f64, f64, f64, f64, f64)> = (1..=4)
        .map(|k| {
            let w = amplitude / k as f64;
            (
                k as f64,
                w * rng.gen_range(-1.0..1.0),
                w * rng.gen_range(-1.0..1.0),
                w * rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let radial_freq = rng.gen_range(1.0..3.0);
    let big_r = m.target_r;
    let last = g.n_radial - 1;
    let values = (0..m.values.len())
        .map(|n| {
            let (i, k) = (n / g.n_angular, n % g.n_angular);
            let s = i as f64 / last as f64;
            let tau = g.angle(k);
            let bump = (PI * s).sin();
            let mut phase = 0.0;
            let mut modulus = 0.0;
            for &(kf, a0, a1, b, p0, p1) in &terms {
                phase += ((1.0 - s) * a0 + s * a1) * (kf * tau + p0).sin();
                modulus += b * bump * (kf * tau + p1 + radial_freq * s).cos();
            }
            let w = m.values[n] * Complex64::from_polar(1.0, phase);
            let r = w.norm();
            let target = if i == 0 {
                1.0
            } else if i == last {
                big_r
            } else {
                (r + (big_r - 1.0) * modulus).clamp(1.0, big_r)
            };
            w * (target / r)
        })
        .collect();
    DiscreteMap {
        values,
        ..m.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{solve_radial, Minimizer};
    use crate::optimizer::oracle_samples;
    use crate::polargrid::dirichlet_energy;

    fn spec(r: f64, big_r: f64, j: u32) -> ProblemSpec {
        ProblemSpec::normalized(r, big_r, j).unwrap()
    }

    fn grid_for(s: &ProblemSpec, nr: usize, nt: usize) -> PolarGrid {
        let (lo, hi) = s.working_domain();
        PolarGrid::new(lo, hi, nr, nt).unwrap()
    }

    #[test]
    fn coefficient_formulas() {
        let c = SubgradientCoefficients::new(3.0, 2, CertificateRegime::Elastic).unwrap();
        let s: f64 = 1.7;
        let root = (4.0 * s * s + 3.0).sqrt();
        assert_eq!(c.gamma(s), 6.0 / root);
        assert_eq!(c.delta(2.0), -0.75);
        assert_eq!(c.alpha(s), 2.0 * s / root);
        assert_eq!(c.z(s), 2.0 * c.alpha(s));
        let n = SubgradientCoefficients::new(-1.5, 2, CertificateRegime::NonElastic).unwrap();
        assert_eq!(n.mu(2.0), -0.375);
        assert_eq!(n.nu(2.0), 0.75);
        assert_eq!(n.beta(s), (4.0 * s * s - 1.5).sqrt() / (2.0 * s));
    }

    #[test]
    fn regime_mismatch_is_a_config_error() {
        assert!(matches!(
            SubgradientCoefficients::new(-1.0, 2, CertificateRegime::Elastic),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            SubgradientCoefficients::new(1.0, 2, CertificateRegime::NonElastic),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            SubgradientCoefficients::new(-5.0, 2, CertificateRegime::NonElastic),
            Err(Error::Config(_))
        ));
        let critical = spec(2.0, 17.0 / 8.0, 2);
        let wrong = SubgradientCoefficients::new(0.5, 2, CertificateRegime::Elastic).unwrap();
        let m = oracle_samples(&critical, grid_for(&critical, 17, 32)).unwrap();
        assert!(matches!(
            certify_with(&m, &critical, &wrong),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn certified_integral_equals_minimum_energy() {
        for (r, big_r, j) in [
            (2.0, 17.0 / 8.0, 2),
            (2.0, 4.0, 2),
            (2.0, 5.0, 2),
            (1.5, 3.0, 1),
            (4.0, 17.0 / 8.0, 2),
            (3.0, 1.5, 1),
        ] {
            let s = spec(r, big_r, j);
            let c = SubgradientCoefficients::for_problem(&s).unwrap();
            let (lo, hi) = s.working_domain();
            let value = c.certified_integral(lo, hi, big_r);
            let lb = lower_bound(&s).unwrap();
            assert!(
                (value - lb).abs() < 1e-9 * lb,
                "({r}, {big_r}, {j}): {value} vs {lb}"
            );
        }
    }

    #[test]
    fn okey_identity() {
        for (r, big_r, j) in [
            (2.0, 17.0 / 8.0, 2),
            (2.0, 5.0, 2),
            (2.0, 4.0, 2),
            (1.5, 2.0, 3),
        ] {
            let p = solve_radial(&spec(r, big_r, j)).unwrap();
            for k in 0..=10 {
                let t = 1.0 + (r - 1.0) * k as f64 / 10.0;
                assert!((okey_integral(&p, t) - t.ln()).abs() < 1e-9, "t = {t}");
            }
        }
        let critical = RadialProfile::critical(17.0 / 8.0, 2).unwrap();
        for t in [1.0, 1.2, 1.5, 2.0] {
            assert!((okey_integral(&critical, t) - t.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn pointwise_inequality_on_analytic_samples() {
        for (r, big_r, j) in [
            (2.0, 17.0 / 8.0, 2),
            (2.0, 5.0, 2),
            (2.0, 4.0, 2),
            (4.0, 17.0 / 8.0, 2),
        ] {
            let s = spec(r, big_r, j);
            let m = oracle_samples(&s, grid_for(&s, 65, 128)).unwrap();
            let report = certify(&m, &s).unwrap();
            assert_eq!(report.max_pointwise_violation, 0.0, "{report:?}");
            assert!(report.slack >= 0.0);
            assert!(report.slack_rel < 1e-3, "{report:?}");
            assert!(report.energy >= report.certified_value);
        }
    }

    #[test]
    fn analytic_equality_conditions() {
        // exact derivatives of the radial maps: |g_N| = G', |g_T| = j G / t
        for (r, big_r, j) in [(2.0, 17.0 / 8.0, 2), (2.0, 5.0, 2), (1.5, 3.0, 1)] {
            let s = spec(r, big_r, j);
            let c = SubgradientCoefficients::for_problem(&s).unwrap();
            let p = solve_radial(&s).unwrap();
            for k in 0..=20 {
                let t = 1.0 + (r - 1.0) * k as f64 / 20.0;
                let (g, dg, _) = p.eval(t).unwrap();
                assert!(c.equality_defect(g, dg, j as f64 * g / t) < 1e-12);
            }
        }
    }

    #[test]
    fn perturbations_stay_admissible_and_above_the_bound() {
        let s = spec(2.0, 17.0 / 8.0, 2);
        let m = oracle_samples(&s, grid_for(&s, 33, 64)).unwrap();
        let lb = lower_bound(&s).unwrap();
        for seed in 0..10 {
            let p = perturb(&m, seed, 0.1);
            p.check_admissible().unwrap();
            let report = certify(&p, &s).unwrap();
            // the 33x64 quadrature itself is accurate to about 1e-2 here
            assert!(dirichlet_energy(&p) > lb * (1.0 - 1e-2));
            assert!(report.energy >= report.certified_value);
            assert_eq!(report.max_pointwise_violation, 0.0);
        }
    }

    #[test]
    fn rescaled_grids_are_moved_to_the_working_domain() {
        let s = spec(4.0, 17.0 / 8.0, 2);
        let mz = Minimizer::for_problem(&s).unwrap();
        let m = oracle_samples(&s, PolarGrid::new(1.0, 4.0, 33, 64).unwrap()).unwrap();
        let report = certify(&m, &s).unwrap();
        assert!(report.slack_rel.abs() < 1e-2);
        assert!(matches!(mz, Minimizer::Hybrid { .. }));
    }
}
