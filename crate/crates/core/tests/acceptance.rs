//! Acceptance suite: one PASS/FAIL line per criterion; exits non-zero when
//! any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::time::Instant;

use anyhow::{ensure, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use annulus::certificates::{
    certify, lagrangian_a, lagrangian_b, lagrangian_c, lagrangian_d, lower_bound, perturb,
    SubgradientCoefficients, WeightTable, TABLE_KNOTS,
};
use annulus::closedform::{
    c1_closed, c1_from_coefficients, critical_radius, energy_closed, nitsche_rhs, solve_radial,
    Minimizer, ProblemSpec,
};
use annulus::optimizer::{minimize, oracle_samples, InitMode, OptimizerConfig};
use annulus::polargrid::{degree_estimate, dirichlet_energy, jacobian, DiscreteMap, PolarGrid};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

/// Degrees of every accepted iterate recorded by the optimizer runs.
#[derive(Default)]
struct TrackedDegrees {
    runs: usize,
    iterates: usize,
    wrong: usize,
}

impl TrackedDegrees {
    fn record(&mut self, degrees: &[Option<i64>], j: i64) {
        self.runs += 1;
        self.iterates += degrees.len();
        self.wrong += degrees.iter().filter(|d| **d != Some(j)).count();
    }
}

fn spec(r: f64, big_r: f64, j: u32) -> ProblemSpec {
    ProblemSpec::normalized(r, big_r, j).expect("valid problem")
}

fn working_grid(s: &ProblemSpec, nr: usize, nt: usize) -> PolarGrid {
    let (lo, hi) = s.working_domain();
    PolarGrid::new(lo, hi, nr, nt).expect("valid grid")
}

fn power_map(r: f64, j: u32, nr: usize, nt: usize) -> anyhow::Result<DiscreteMap> {
    let g = PolarGrid::new(1.0, r, nr, nt)?;
    Ok(DiscreteMap::sample(
        |z| z.powi(j as i32),
        g,
        r.powi(j as i32),
        j as i32,
    )?)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> anyhow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut c1_err, mut ode_err, mut inv_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let j: u32 = rng.gen_range(1..=5);
        let r: f64 = rng.gen_range(1.05..3.0);
        let big_r = nitsche_rhs(r, j) * rng.gen_range(1.0..4.0);
        let p = solve_radial(&spec(r, big_r, j))?;
        let closed = c1_closed(r, big_r, j);
        let scale = (4.0 * (j * j) as f64 * p.a.abs().max(p.b.abs()).powi(2)).max(closed.abs());
        c1_err = c1_err.max((closed - c1_from_coefficients(p.a, p.b, j)).abs() / scale);
        let jf = j as f64;
        for _ in 0..4 {
            let t: f64 = rng.gen_range(1.0..r);
            let (g, dg, ddg) = p.eval(t)?;
            // t^2 G'' + t G' - j^2 G = 0, relative to the size of its terms
            let terms = (t * t * ddg).abs() + (t * dg).abs() + jf * jf * g.abs();
            ode_err = ode_err.max((t * t * ddg + t * dg - jf * jf * g).abs() / terms);
            inv_err = inv_err.max((p.invert(g)? - t).abs() / t);
        }
    }
    let pass = c1_err <= 1e-12 && ode_err <= 1e-10 && inv_err <= 1e-10;
    Ok(Outcome::new(
        pass,
        format!("10^4 problems: c1 rel {c1_err:.1e}, ODE residual {ode_err:.1e}, F(G(t)) - t {inv_err:.1e}"),
    ))
}

fn criterion_2() -> anyhow::Result<Outcome> {
    // (r^j + r^-j)/2 at r = 2, j = 2 in integers: (r^{2j} + 1) / (2 r^j)
    let (r, j) = (2u64, 2u32);
    let (mut num, mut den) = (r.pow(2 * j) + 1, 2 * r.pow(j));
    let g = gcd(num, den);
    num /= g;
    den /= g;
    let exact = (num, den) == (17, 8);
    let float_exact = nitsche_rhs(2.0, 2) == 17.0 / 8.0;
    let rc = critical_radius(17.0 / 8.0, 2)?;
    let pass = exact && float_exact && (rc - 2.0).abs() <= 1e-12;
    Ok(Outcome::new(
        pass,
        format!(
            "bound = {num}/{den}, f64 exact {float_exact}, critical radius - 2 = {:.1e}",
            rc - 2.0
        ),
    ))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn criterion_3() -> anyhow::Result<Outcome> {
    // independent values: conformal 4 pi j^2 int_1^r t^{2j-1} dt, critical and
    // squeezed from (t^j + t^-j)^2/4 integrated in closed form
    let cases = [
        ("conformal", spec(2.0, 4.0, 2), 60.0 * PI),
        ("critical", spec(2.0, 17.0 / 8.0, 2), 255.0 * PI / 16.0),
        (
            "below bound",
            spec(4.0, 17.0 / 8.0, 2),
            255.0 * PI / 16.0 + 8.0 * PI * LN_2,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, s, oracle) in cases {
        let closed = energy_closed(&s)?.value;
        let mut errs = Vec::new();
        for (nr, nt) in [(128, 256), (256, 512), (512, 1024)] {
            let m = oracle_samples(&s, working_grid(&s, nr, nt))?;
            errs.push(rel(dirichlet_energy(&m), closed));
        }
        let ratio = errs[1] / errs[2];
        let ok = rel(closed, oracle) <= 1e-12 && errs[2] <= 1e-4 && (3.0..=5.0).contains(&ratio);
        pass &= ok;
        parts.push(format!(
            "{name} {closed:.6} err {:.2e} (ratio {ratio:.2})",
            errs[2]
        ));
    }
    Ok(Outcome::new(
        pass,
        format!("512x1024: {}", parts.join("; ")),
    ))
}

fn criterion_4(tracked: &mut TrackedDegrees) -> anyhow::Result<Outcome> {
    let s = spec(2.0, 17.0 / 8.0, 2);
    let (mut worst_gap, mut worst_rms, mut runs, mut converged) = (0.0f64, 0.0f64, 0, 0);
    for init in [
        InitMode::RadialInterp,
        InitMode::PowerMap,
        InitMode::Perturbed,
    ] {
        for seed in 0..5 {
            let config = OptimizerConfig {
                init,
                seed,
                track_degree: true,
                ..Default::default()
            };
            let (_, report) = minimize(&s, working_grid(&s, 128, 256), &config)?;
            worst_gap = worst_gap.max(report.gap_rel.abs());
            worst_rms = worst_rms.max(report.oracle_rms);
            converged += report.converged as usize;
            runs += 1;
            tracked.record(&report.degrees, 2);
        }
    }
    let pass = worst_gap < 1e-2 && worst_rms <= 5e-2;
    Ok(Outcome::new(
        pass,
        format!("{runs} runs ({converged} converged): max |gap| {worst_gap:.2e}, max rotation-fitted RMS {worst_rms:.2e}"),
    ))
}

fn criterion_5(tracked: &mut TrackedDegrees) -> anyhow::Result<Outcome> {
    let s = spec(4.0, 17.0 / 8.0, 2);
    let rho = s.working_domain().0;
    let mut pass = true;
    let mut parts = Vec::new();
    // the perturbed start relaxes its pinned phases slowly; a capped run is
    // enough for the energy and the squeezing pattern
    let runs = [
        (InitMode::RadialInterp, 0, 5000),
        (InitMode::PowerMap, 0, 5000),
        (InitMode::Perturbed, 0, 300),
        (InitMode::Perturbed, 1, 300),
    ];
    for (init, seed, max_iters) in runs {
        let config = OptimizerConfig {
            init,
            seed,
            max_iters,
            track_degree: true,
            ..Default::default()
        };
        let (m, report) = minimize(&s, working_grid(&s, 128, 256), &config)?;
        tracked.record(&report.degrees, 2);
        let jac = jacobian(&m);
        let g = m.grid;
        let (mut band, mut active, mut band_jac, mut out_n, mut out_jac) =
            (0usize, 0usize, 0.0, 0usize, 0.0);
        for i in 0..g.n_radial {
            let t = g.radius(i);
            for k in 0..g.n_angular {
                let n = g.index(i, k);
                if t > rho * (1.0 + 1e-12) && t < 1.0 {
                    band += 1;
                    active += (m.values[n].norm() <= 1.0 + 1e-6) as usize;
                    band_jac += jac[n].abs();
                } else if t > 1.0 {
                    out_n += 1;
                    out_jac += jac[n].abs();
                }
            }
        }
        let active_frac = active as f64 / band as f64;
        let jac_ratio = (band_jac / band as f64) / (out_jac / out_n as f64);
        let ok = report.gap_rel.abs() <= 1.5e-2 && active_frac >= 0.9 && jac_ratio <= 1e-2;
        pass &= ok;
        parts.push(format!(
            "{init:?}/{seed}: gap {:.2e}, active {:.3}, |J| ratio {jac_ratio:.1e}{}",
            report.gap_rel,
            active_frac,
            if report.converged {
                ""
            } else {
                " (iteration cap)"
            }
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

/// Largest relative error of the four identities on `m`.
fn identity_errors(m: &DiscreteMap) -> anyhow::Result<[f64; 4]> {
    let (t_lo, t_hi) = (m.grid.t_min, m.grid.t_max);
    let big_r = m.target_r;
    let w_m = WeightTable::sample(|t| 1.0 + t * t, t_lo, t_hi, TABLE_KNOTS)?;
    let w_n = WeightTable::sample(|s| s, 1.0, big_r, TABLE_KNOTS)?;
    let w_a = WeightTable::sample(|s| 1.0 / s, 1.0, big_r, TABLE_KNOTS)?;
    let w_b = WeightTable::sample(|t| 1.0 / t, t_lo, t_hi, TABLE_KNOTS)?;
    let err = |(lhs, rhs): (f64, f64)| rel(lhs, rhs);
    Ok([
        err(lagrangian_a(m, &w_m)?),
        err(lagrangian_b(m, &w_n)?),
        err(lagrangian_c(m, &w_a)?),
        err(lagrangian_d(m, &w_b)?),
    ])
}

fn criterion_6() -> anyhow::Result<Outcome> {
    let critical = spec(2.0, 17.0 / 8.0, 2);
    let squeezed = spec(4.0, 17.0 / 8.0, 2);
    let maps = |nr: usize, nt: usize| -> anyhow::Result<Vec<(String, DiscreteMap)>> {
        let g_circ = oracle_samples(&critical, working_grid(&critical, nr, nt))?;
        let mut v = vec![
            ("g_circ".to_string(), g_circ.clone()),
            (
                "g_diamond".to_string(),
                oracle_samples(&squeezed, working_grid(&squeezed, nr, nt))?,
            ),
            ("z^2".to_string(), power_map(2.0, 2, nr, nt)?),
        ];
        for seed in 0..20 {
            v.push((format!("perturbation {seed}"), perturb(&g_circ, seed, 0.1)));
        }
        Ok(v)
    };
    let coarse = maps(128, 256)?;
    let fine = maps(256, 512)?;
    let (mut worst, mut worst_name) = (0.0f64, String::new());
    let mut min_ratio = f64::INFINITY;
    for ((name, c), (_, f)) in coarse.iter().zip(&fine) {
        let ec = identity_errors(c)?;
        let ef = identity_errors(f)?;
        for q in 0..4 {
            if ef[q] > worst {
                worst = ef[q];
                worst_name = format!("{name}, identity {}", q + 1);
            }
            // identities already exact to rounding carry no convergence rate
            if ec[q] > 1e-10 {
                min_ratio = min_ratio.min(ec[q] / ef[q].max(1e-300));
            }
        }
    }
    let pass = worst <= 1e-3 && min_ratio >= 3.0;
    Ok(Outcome::new(
        pass,
        format!(
            "23 maps x 4 identities at 256x512: max rel err {worst:.2e} ({worst_name}); min refinement ratio {min_ratio:.2}"
        ),
    ))
}

fn criterion_7() -> anyhow::Result<Outcome> {
    let regimes = [
        ("conformal", spec(2.0, 4.0, 2)),
        ("elastic", spec(2.0, 5.0, 2)),
        ("non-elastic", spec(2.0, 17.0 / 8.0, 2)),
        ("below bound", spec(4.0, 17.0 / 8.0, 2)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, s) in regimes {
        let lb = lower_bound(&s)?;
        let base = oracle_samples(&s, working_grid(&s, 128, 256))?;
        let mut min_margin = f64::INFINITY;
        let mut pointwise = 0.0f64;
        for seed in 0..100 {
            let p = perturb(&base, 1000 + seed, 0.1);
            p.check_admissible()
                .context("perturbation is not admissible")?;
            min_margin = min_margin.min((dirichlet_energy(&p) - lb) / lb);
            let report = certify(&p, &s)?;
            ensure!(
                report.energy >= report.certified_value,
                "certified value exceeds the energy"
            );
            pointwise = pointwise.max(report.max_pointwise_violation);
        }
        let own = certify(&base, &s)?;
        let defect = analytic_equality_defect(&s)?;
        let ok = min_margin >= -1e-3 && pointwise == 0.0 && own.slack_rel <= 1e-3 && defect <= 1e-6;
        pass &= ok;
        parts.push(format!(
            "{name}: min (E-lb)/lb {min_margin:.2e}, minimizer slack {:.1e}, equality defect {defect:.1e}",
            own.slack_rel
        ));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

/// Largest equality-condition defect of the closed-form minimizer, evaluated
/// from its exact derivatives on the working domain.
fn analytic_equality_defect(s: &ProblemSpec) -> anyhow::Result<f64> {
    let coeffs = SubgradientCoefficients::for_problem(s)?;
    let mz = Minimizer::for_problem(s)?;
    let (lo, hi) = s.working_domain();
    let profile = *mz.profile();
    let j = s.j as f64;
    let mut worst = 0.0f64;
    for n in 0..=10_000 {
        let t = lo * (hi / lo).powf(n as f64 / 10_000.0);
        let (g, gn) = if t >= 1.0 {
            let (g, dg, _) = profile.eval(t)?;
            (g, dg)
        } else {
            (1.0, 0.0)
        };
        worst = worst.max(coeffs.equality_defect(g, gn, j * g / t));
    }
    Ok(worst)
}

fn criterion_8(tracked: &TrackedDegrees) -> anyhow::Result<Outcome> {
    let critical = spec(2.0, 17.0 / 8.0, 2);
    let squeezed = spec(4.0, 17.0 / 8.0, 2);
    let maps = [
        oracle_samples(&critical, working_grid(&critical, 128, 256))?,
        oracle_samples(&squeezed, working_grid(&squeezed, 128, 256))?,
        power_map(2.0, 2, 128, 256)?,
    ];
    let degrees: Vec<i64> = maps
        .iter()
        .map(|m| degree_estimate(m).map(|d| d.degree))
        .collect::<annulus::Result<_>>()?;
    let pass = degrees.iter().all(|&d| d == 2) && tracked.wrong == 0 && tracked.iterates > 0;
    Ok(Outcome::new(
        pass,
        format!(
            "g_circ, g_diamond, z^2: {degrees:?}; {} iterates of {} optimizer runs, {} with degree != 2",
            tracked.iterates, tracked.runs, tracked.wrong
        ),
    ))
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; a filter
    // argument that names no criterion is respected by running nothing
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let mut tracked = TrackedDegrees::default();
    let mut failures = 0;
    let mut run = |n: usize, name: &str, f: &mut dyn FnMut() -> anyhow::Result<Outcome>| {
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e:#}")));
        failures += !outcome.pass as usize;
        println!(
            "criterion {n} [{}] {name}: {} ({:.1} s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    };
    run(1, "closed-form consistency", &mut criterion_1);
    run(2, "bound and critical radius", &mut criterion_2);
    run(3, "energy oracles", &mut criterion_3);
    run(4, "optimizer above the bound", &mut || {
        criterion_4(&mut tracked)
    });
    run(5, "optimizer below the bound", &mut || {
        criterion_5(&mut tracked)
    });
    run(6, "free-Lagrangian identities", &mut criterion_6);
    run(7, "lower-bound certificate", &mut criterion_7);
    run(8, "degree conservation", &mut || criterion_8(&tracked));
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
