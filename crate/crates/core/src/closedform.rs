//! Closed-form radial minimizers of the Dirichlet energy between annuli.
//!
//! Everything here works on the normalized pair `A(1, r) -> A(1, R)`. A degree-j
//! radial map is `e^{i j tau} G(t)` with `G(t) = A t^j + B t^{-j}`, the general
//! solution of `-j^2 G + t G' + t^2 G'' = 0`. When `R` is below
//! `(r^j + r^{-j}) / 2` the radial solution dips under the unit circle and the
//! minimizer becomes a hybrid: a critical harmonic band glued to a squeezing band
//! that wraps onto the unit circle with vanishing Jacobian.
//!
//! Energies use `E[g] = ∫ (|g_N|^2 + |g_T|^2) dx dy`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when classifying the boundary case of the bound.
pub const BOUND_RTOL: f64 = 1e-12;

/// Normalized annulus pair `A(1, r) -> A(1, R)` with degree `j`.
///
/// `domain_scale` and `target_scale` are the inner radii of the original annuli,
/// so `A(a, b) -> A(c, d)` becomes `r = b / a`, `R = d / c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "AnnulusPair", try_from = "AnnulusPair")]
pub struct ProblemSpec {
    pub r: f64,
    pub target_r: f64,
    pub j: u32,
    pub domain_scale: f64,
    pub target_scale: f64,
}

/// Wire form of a [`ProblemSpec`]: the four radii of the original annuli.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusPair {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub j: u32,
}

impl From<ProblemSpec> for AnnulusPair {
    fn from(p: ProblemSpec) -> Self {
        AnnulusPair {
            a: p.domain_scale,
            b: p.domain_scale * p.r,
            c: p.target_scale,
            d: p.target_scale * p.target_r,
            j: p.j,
        }
    }
}

impl TryFrom<AnnulusPair> for ProblemSpec {
    type Error = Error;

    fn try_from(p: AnnulusPair) -> Result<Self> {
        normalize_problem(p.a, p.b, p.c, p.d, p.j)
    }
}

/// Reduces `A(a, b) -> A(c, d)` to the normalized pair `A(1, b/a) -> A(1, d/c)`.
///
/// A map `g` of the normalized problem corresponds to `h(z) = c g(z / a)`, whose
/// energy is `c^2 E[g]`.
pub fn normalize_problem(a: f64, b: f64, c: f64, d: f64, j: u32) -> Result<ProblemSpec> {
    let finite = [a, b, c, d].iter().all(|v| v.is_finite());
    if !finite || a <= 0.0 || b <= a {
        return Err(Error::InvalidAnnulus(format!(
            "domain radii must satisfy 0 < a < b (a = {a}, b = {b})"
        )));
    }
    if c <= 0.0 || d <= c {
        return Err(Error::InvalidAnnulus(format!(
            "target radii must satisfy 0 < c < d (c = {c}, d = {d})"
        )));
    }
    if j == 0 {
        return Err(Error::InvalidAnnulus("degree must be at least 1".into()));
    }
    Ok(ProblemSpec {
        r: b / a,
        target_r: d / c,
        j,
        domain_scale: a,
        target_scale: c,
    })
}

impl ProblemSpec {
    /// Already-normalized problem (unit scales).
    pub fn normalized(r: f64, target_r: f64, j: u32) -> Result<Self> {
        normalize_problem(1.0, r, 1.0, target_r, j)
    }

    pub fn is_above_bound(&self) -> bool {
        is_above_bound(self)
    }

    /// Energy of the original (un-normalized) problem given a normalized energy.
    pub fn physical_energy(&self, normalized: f64) -> f64 {
        self.target_scale * self.target_scale * normalized
    }

    /// Radial interval `[t_min, t_max]` the minimizer lives on: `[1, r]` above the
    /// bound, the equal-modulus annulus `[rho, r_crit]` below it.
    pub fn working_domain(&self) -> (f64, f64) {
        if self.is_above_bound() {
            (1.0, self.r)
        } else {
            let r_crit = critical_radius_unchecked(self.target_r, self.j);
            (r_crit / self.r, r_crit)
        }
    }
}

/// `(r^j + r^{-j}) / 2`, the smallest target ratio admitting a radial harmonic map.
pub fn nitsche_rhs(r: f64, j: u32) -> f64 {
    let rj = r.powi(j as i32);
    0.5 * (rj + 1.0 / rj)
}

/// True iff `R >= nitsche_rhs(r, j)`; the boundary case counts as above.
pub fn is_above_bound(spec: &ProblemSpec) -> bool {
    spec.target_r >= nitsche_rhs(spec.r, spec.j) * (1.0 - BOUND_RTOL)
}

/// Outer radius `r_crit = (R + sqrt(R^2 - 1))^{1/j}` of the critical band,
/// i.e. the solution of `nitsche_rhs(r_crit, j) = R`.
pub fn critical_radius(target_r: f64, j: u32) -> Result<f64> {
    if !(target_r >= 1.0) || j == 0 {
        return Err(Error::InvalidTarget(target_r));
    }
    Ok(critical_radius_unchecked(target_r, j))
}

fn critical_radius_unchecked(target_r: f64, j: u32) -> f64 {
    (target_r + (target_r * target_r - 1.0).sqrt()).powf(1.0 / j as f64)
}

/// Classification of the integration constant `c1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `c1 = 0`, `R = r^j`: the power map.
    Conformal,
    /// `c1 > 0`, `R > r^j`.
    Elastic,
    /// `-j^2 <= c1 < 0`.
    NonElastic,
    /// `G'(1) < 0`: the radial solution exists but leaves the target annulus.
    BelowBound,
}

/// Radial profile `G(t) = A t^j + B t^{-j}` on `[1, outer]` with `G(1) = 1` and
/// `G(outer) = target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub j: u32,
    pub outer: f64,
    pub target: f64,
    pub regime: Regime,
}

impl RadialProfile {
    /// Solves `G(1) = 1`, `G(outer) = target` for `(A, B)`.
    pub fn from_boundary(outer: f64, target: f64, j: u32) -> Result<Self> {
        if !(outer > 1.0) || !outer.is_finite() {
            return Err(Error::InvalidAnnulus(format!("need r > 1, got {outer}")));
        }
        if !(target > 1.0) || !target.is_finite() {
            return Err(Error::InvalidTarget(target));
        }
        if j == 0 {
            return Err(Error::InvalidAnnulus("degree must be at least 1".into()));
        }
        let rj = outer.powi(j as i32);
        let denom = rj * rj - 1.0;
        // A = (1 - r^j R)/(1 - r^{2j}), B = (r^j R - r^{2j})/(1 - r^{2j}), written
        // with the cancelling factors pulled out.
        let a = rj * (target - 1.0 / rj) / denom;
        let b = rj * (rj - target) / denom;
        let c1 = c1_from_coefficients(a, b, j);
        Ok(RadialProfile {
            a,
            b,
            c1,
            j,
            outer,
            target,
            regime: classify(a, b, c1),
        })
    }

    /// The critical profile `(t^j + t^{-j}) / 2` on `[1, r_crit]`, with `c1 = -j^2`.
    pub fn critical(target: f64, j: u32) -> Result<Self> {
        let outer = critical_radius(target, j)?;
        if !(target > 1.0) {
            return Err(Error::InvalidTarget(target));
        }
        Ok(RadialProfile {
            a: 0.5,
            b: 0.5,
            c1: -((j * j) as f64),
            j,
            outer,
            target,
            regime: Regime::NonElastic,
        })
    }

    pub fn jf(&self) -> f64 {
        self.j as f64
    }

    /// `G(t)`, `G'(t)`, `G''(t)`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("profile evaluated at t = {t}")));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> (f64, f64, f64) {
        let j = self.jf();
        let tj = t.powi(self.j as i32);
        let up = self.a * tj;
        let down = self.b / tj;
        let g = up + down;
        let dg = j * (up - down) / t;
        let ddg = (j * (j - 1.0) * up + j * (j + 1.0) * down) / (t * t);
        (g, dg, ddg)
    }

    /// `F = G^{-1}` on `[1, target]`.
    pub fn invert(&self, s: f64) -> Result<f64> {
        let lo = 1.0 - BOUND_RTOL;
        let hi = self.target * (1.0 + BOUND_RTOL);
        if !(s >= lo && s <= hi) {
            return Err(Error::Range {
                value: s,
                lo: 1.0,
                hi: self.target,
            });
        }
        Ok(self.invert_unchecked(s))
    }

    pub(crate) fn invert_unchecked(&self, s: f64) -> f64 {
        let tj = if self.b == 0.0 {
            s / self.a
        } else {
            // t^j is the larger root of A y^2 - s y + B = 0.
            let disc = (s * s - 4.0 * self.a * self.b).max(0.0);
            let root = disc.sqrt();
            if self.a.abs() > f64::MIN_POSITIVE {
                (s + root) / (2.0 * self.a)
            } else {
                // A = 0 cannot occur for r, R > 1
                self.b / s
            }
        };
        tj.powf(1.0 / self.jf())
    }

    /// `∫_1^T G(t)^2 / t dt`, evaluated from the antiderivative.
    pub fn log_moment(&self, upper: f64) -> f64 {
        let j2 = 2.0 * self.jf();
        let t2j = upper.powi(2 * self.j as i32);
        self.a * self.a * (t2j - 1.0) / j2
            + 2.0 * self.a * self.b * upper.ln()
            + self.b * self.b * (1.0 - 1.0 / t2j) / j2
    }

    /// `|Dg|^2 t^2 = 2 j^2 G^2 + c1`.
    pub fn energy_density_scaled(&self, t: f64) -> f64 {
        let (g, _, _) = self.eval_unchecked(t);
        2.0 * self.jf() * self.jf() * g * g + self.c1
    }

    /// Degree-j radial map `B conj(z)^{-j} + A z^j`.
    pub fn map(&self, z: Complex64) -> Complex64 {
        let zj = z.powi(self.j as i32);
        let zbar_j = z.conj().powi(self.j as i32);
        self.a * zj + self.b / zbar_j
    }
}

// G'(1) = j (A - B), so the profile is increasing on its band iff A >= B; with
// A + B = 1 this forces c1 >= -j^2, but not conversely.
fn classify(a: f64, b: f64, c1: f64) -> Regime {
    if a < b * (1.0 - BOUND_RTOL) {
        Regime::BelowBound
    } else if c1 == 0.0 {
        Regime::Conformal
    } else if c1 > 0.0 {
        Regime::Elastic
    } else {
        Regime::NonElastic
    }
}

/// `c1 = -4 j^2 A B`.
pub fn c1_from_coefficients(a: f64, b: f64, j: u32) -> f64 {
    let j2 = (j * j) as f64;
    -4.0 * j2 * a * b
}

/// `c1 = 4 j^2 (1 + R^2 - R (r^j + r^{-j})) / (r^j - r^{-j})^2`, with the
/// numerator factored as `(R - r^j)(R - r^{-j})`.
pub fn c1_closed(r: f64, target_r: f64, j: u32) -> f64 {
    let j2 = (j * j) as f64;
    let rj = r.powi(j as i32);
    let inv = 1.0 / rj;
    4.0 * j2 * (target_r - rj) * (target_r - inv) / ((rj - inv) * (rj - inv))
}

/// Radial solution of the boundary problem of `spec`, with `c1` cross-checked
/// against the closed expression.
pub fn solve_radial(spec: &ProblemSpec) -> Result<RadialProfile> {
    let profile = RadialProfile::from_boundary(spec.r, spec.target_r, spec.j)?;
    let closed = c1_closed(spec.r, spec.target_r, spec.j);
    let scale = 1.0 + closed.abs().max(profile.c1.abs());
    debug_assert!(
        (closed - profile.c1).abs() <= 1e-9 * scale,
        "c1 mismatch: {closed} vs {}",
        profile.c1
    );
    Ok(profile)
}

/// `G`, `G'`, `G''` of a profile.
pub fn profile_eval(p: &RadialProfile, t: f64) -> Result<(f64, f64, f64)> {
    p.eval(t)
}

/// `F = G^{-1}`.
pub fn profile_invert(p: &RadialProfile, s: f64) -> Result<f64> {
    p.invert(s)
}

/// The energy minimizer of a normalized problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Minimizer {
    Harmonic {
        profile: RadialProfile,
    },
    /// Critical harmonic band on `1 <= |z| <= r_crit` and squeezing band on
    /// `rho <= |z| <= 1`, in the internal domain `A(rho, r_crit)`.
    Hybrid {
        profile: RadialProfile,
        r_crit: f64,
        rho: f64,
    },
}

impl Minimizer {
    pub fn for_problem(spec: &ProblemSpec) -> Result<Self> {
        if spec.is_above_bound() {
            Ok(Minimizer::Harmonic {
                profile: solve_radial(spec)?,
            })
        } else {
            let profile = RadialProfile::critical(spec.target_r, spec.j)?;
            let r_crit = profile.outer;
            Ok(Minimizer::Hybrid {
                profile,
                r_crit,
                rho: r_crit / spec.r,
            })
        }
    }

    pub fn profile(&self) -> &RadialProfile {
        match self {
            Minimizer::Harmonic { profile } | Minimizer::Hybrid { profile, .. } => profile,
        }
    }

    /// Radial interval of the internal domain.
    pub fn domain(&self) -> (f64, f64) {
        match *self {
            Minimizer::Harmonic { profile } => (1.0, profile.outer),
            Minimizer::Hybrid { r_crit, rho, .. } => (rho, r_crit),
        }
    }

    /// Factor taking normalized-domain points `1 <= |z| <= r` to internal ones.
    pub fn internal_scale(&self) -> f64 {
        match *self {
            Minimizer::Harmonic { .. } => 1.0,
            Minimizer::Hybrid { rho, .. } => rho,
        }
    }

    /// Modulus of the minimizer at internal radius `t`.
    pub fn modulus(&self, t: f64) -> f64 {
        match *self {
            Minimizer::Harmonic { profile } => profile.eval_unchecked(t).0,
            Minimizer::Hybrid { profile, .. } => {
                if t >= 1.0 {
                    profile.eval_unchecked(t).0
                } else {
                    1.0
                }
            }
        }
    }

    /// Evaluates the minimizer at an internal-domain point.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let (lo, hi) = self.domain();
        check_in_annulus(z, lo, hi)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        match *self {
            Minimizer::Harmonic { profile } => profile.map(z),
            Minimizer::Hybrid { profile, .. } => {
                let t = z.norm();
                if t >= 1.0 {
                    profile.map(z)
                } else {
                    (z / t).powi(profile.j as i32)
                }
            }
        }
    }
}

fn check_in_annulus(z: Complex64, lo: f64, hi: f64) -> Result<()> {
    let t = z.norm();
    if t >= lo * (1.0 - BOUND_RTOL) && t <= hi * (1.0 + BOUND_RTOL) {
        Ok(())
    } else {
        Err(Error::Domain(format!("|z| = {t} outside [{lo}, {hi}]")))
    }
}

/// `g°(z) = B conj(z)^{-j} + A z^j` on `1 <= |z| <= r`.
pub fn eval_g_circ(spec: &ProblemSpec, z: Complex64) -> Result<Complex64> {
    if !spec.is_above_bound() {
        return Err(Error::BelowBound);
    }
    check_in_annulus(z, 1.0, spec.r)?;
    Ok(solve_radial(spec)?.map(z))
}

/// The hybrid minimizer on the internal domain `rho <= |z| <= r_crit`.
pub fn eval_g_diamond(spec: &ProblemSpec, z: Complex64) -> Result<Complex64> {
    if spec.is_above_bound() {
        return Err(Error::AboveBound);
    }
    Minimizer::for_problem(spec)?.eval(z)
}

/// Which minimizer the closed-form energy belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Harmonic,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedEnergy {
    pub value: f64,
    pub kind: EnergyKind,
}

/// Minimum energy of the normalized problem.
///
/// Above the bound `4 pi j^2 ∫_1^r G^2/t dt + 2 pi c1 log r`; below it the
/// critical band on `A(1, r_crit)` plus the squeezing band,
/// `4 pi j^2 ∫_1^{r_crit} G^2/t dt - 2 pi j^2 log(rho r_crit)`.
pub fn energy_closed(spec: &ProblemSpec) -> Result<ClosedEnergy> {
    let j2 = (spec.j * spec.j) as f64;
    match Minimizer::for_problem(spec)? {
        Minimizer::Harmonic { profile } => Ok(ClosedEnergy {
            value: 4.0 * PI * j2 * profile.log_moment(spec.r) + 2.0 * PI * profile.c1 * spec.r.ln(),
            kind: EnergyKind::Harmonic,
        }),
        Minimizer::Hybrid {
            profile,
            r_crit,
            rho,
        } => Ok(ClosedEnergy {
            value: 4.0 * PI * j2 * profile.log_moment(r_crit) - 2.0 * PI * j2 * (rho * r_crit).ln(),
            kind: EnergyKind::Hybrid,
        }),
    }
}
