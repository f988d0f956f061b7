//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 minimization did not converge,
//! 4 certificate violated.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use crate::certificates::{certify, CertificateReport, CERTIFICATE_RTOL};
use crate::closedform::{
    energy_closed, nitsche_rhs, normalize_problem, AnnulusPair, Minimizer, ProblemSpec, Regime,
};
use crate::figure::{render_svg, write_curves_csv, FigureLayout};
use crate::optimizer::{minimize, oracle_samples, InitMode, OptimizerConfig};
use crate::polargrid::{dirichlet_energy, io, DiscreteMap, PolarGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ANNULUS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "annulus",
    version,
    about = "Dirichlet energy minimizers between circular annuli"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form minimizer: regime, radial profile and minimum energy.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Numerical minimization on a log-polar grid.
    Minimize {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Maximum number of iterations.
        #[arg(long, default_value_t = 5000)]
        iters: usize,
        /// Relative energy-change tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Seed of the perturbed initialization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = InitMode::RadialInterp)]
        init: InitMode,
    },
    /// Lower-bound certificate of a map.
    Certify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Relative energy deficit below the lower bound counted as a violation.
        #[arg(long, default_value_t = CERTIFICATE_RTOL)]
        tol: f64,
    },
    /// Dirichlet energy of a map.
    Energy {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// SVG image of the polar grid under a map, with the underlying CSV.
    Figure {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Number of image rings (default n_r / 8).
        #[arg(long)]
        rings: Option<usize>,
        /// Number of image rays (default n_t / 16).
        #[arg(long)]
        rays: Option<usize>,
    },
}

/// The pair `A(a, b) -> A(c, d)`, inline or from a JSON file.
#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    /// JSON file `{"a":..,"b":..,"c":..,"d":..,"j":..}`; overrides the inline radii.
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
}

impl ProblemArgs {
    pub fn spec(&self) -> anyhow::Result<ProblemSpec> {
        if let Some(path) = &self.problem {
            let file =
                File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            let pair: AnnulusPair = serde_json::from_reader(BufReader::new(file))
                .with_context(|| format!("cannot parse {}", path.display()))?;
            return Ok(ProblemSpec::try_from(pair)?);
        }
        let (Some(b), Some(d)) = (self.b, self.d) else {
            bail!("the outer radii --b and --d (or --problem FILE) are required");
        };
        Ok(normalize_problem(self.a, b, self.c, d, self.j)?)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GridArgs {
    /// Radial nodes.
    #[arg(long, default_value_t = 128)]
    pub nr: usize,
    /// Angular nodes.
    #[arg(long, default_value_t = 256)]
    pub nt: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// `g_circ`, `g_diamond`, `power`, or a map file (`.csv` or binary);
    /// default: the closed-form minimizer of the problem.
    #[arg(long, value_name = "MAP")]
    pub map: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Parses `args`, runs the command and returns the exit code; errors are
/// reported on standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return EXIT_BAD_INPUT;
    }
    let start = Instant::now();
    let result = execute(&cli.command);
    info!("finished in {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_BAD_INPUT
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    // a pool configured earlier in this process (e.g. by a previous call) stays
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn execute(command: &Command) -> anyhow::Result<i32> {
    match command {
        Command::Solve { problem, output } => cmd_solve(&problem.spec()?, output),
        Command::Minimize {
            problem,
            grid,
            output,
            iters,
            tol,
            seed,
            init,
        } => {
            let config = OptimizerConfig {
                max_iters: *iters,
                energy_tol: *tol,
                seed: *seed,
                init: *init,
                ..Default::default()
            };
            cmd_minimize(&problem.spec()?, *grid, &config, output)
        }
        Command::Certify {
            problem,
            grid,
            map,
            output,
            tol,
        } => cmd_certify(&problem.spec()?, *grid, map, *tol, output),
        Command::Energy {
            problem,
            grid,
            map,
            output,
        } => cmd_energy(&problem.spec()?, *grid, map, output),
        Command::Figure {
            problem,
            grid,
            map,
            output,
            rings,
            rays,
        } => cmd_figure(&problem.spec()?, *grid, map, *rings, *rays, output),
    }
}

fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::Conformal => "conformal",
        Regime::Elastic => "elastic",
        Regime::NonElastic => "non_elastic",
        Regime::BelowBound => "below_bound",
    }
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub problem: AnnulusPair,
    pub r: f64,
    pub target_r: f64,
    pub j: u32,
    pub bound: f64,
    pub above_bound: bool,
    pub regime: &'static str,
    pub coefficient_a: f64,
    pub coefficient_b: f64,
    pub c1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_crit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Minimum energy of the normalized problem.
    pub energy: f64,
    /// Minimum energy of the original problem.
    pub physical_energy: f64,
}

pub fn solve_report(spec: &ProblemSpec) -> anyhow::Result<SolveReport> {
    let mz = Minimizer::for_problem(spec)?;
    let p = *mz.profile();
    let (regime, r_crit, rho) = match mz {
        Minimizer::Harmonic { profile } => (regime_name(profile.regime), None, None),
        Minimizer::Hybrid { r_crit, rho, .. } => ("below_bound", Some(r_crit), Some(rho)),
    };
    let energy = energy_closed(spec)?.value;
    Ok(SolveReport {
        problem: AnnulusPair::from(*spec),
        r: spec.r,
        target_r: spec.target_r,
        j: spec.j,
        bound: nitsche_rhs(spec.r, spec.j),
        above_bound: spec.is_above_bound(),
        regime,
        coefficient_a: p.a,
        coefficient_b: p.b,
        c1: p.c1,
        r_crit,
        rho,
        energy,
        physical_energy: spec.physical_energy(energy),
    })
}

fn ensure_dir(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))
}

/// Writes `value` as `<stem>.json` or, flattened to `key,value` lines, as
/// `<stem>.csv`.
fn write_report<T: Serialize>(
    value: &T,
    output: &OutputArgs,
    stem: &str,
) -> anyhow::Result<PathBuf> {
    ensure_dir(&output.out)?;
    let json = serde_json::to_value(value)?;
    let path = match output.format {
        Format::Csv => {
            let path = output.out.join(format!("{stem}.csv"));
            let mut wtr = csv::Writer::from_path(&path)?;
            wtr.write_record(["key", "value"])?;
            if let serde_json::Value::Object(map) = &json {
                for (k, v) in map {
                    let text = match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    wtr.write_record([k.as_str(), text.as_str()])?;
                }
            }
            wtr.flush()?;
            path
        }
        Format::Json | Format::Svg => {
            let path = output.out.join(format!("{stem}.json"));
            let mut f = BufWriter::new(File::create(&path)?);
            serde_json::to_writer_pretty(&mut f, &json)?;
            writeln!(f)?;
            f.flush()?;
            path
        }
    };
    Ok(path)
}

pub fn cmd_solve(spec: &ProblemSpec, output: &OutputArgs) -> anyhow::Result<i32> {
    let report = solve_report(spec)?;
    println!(
        "regime: {} ({} the bound R >= {:.12})",
        report.regime,
        if report.above_bound { "above" } else { "below" },
        report.bound
    );
    println!(
        "profile: A = {:.15}, B = {:.15}, c1 = {:.15}",
        report.coefficient_a, report.coefficient_b, report.c1
    );
    if let (Some(r_crit), Some(rho)) = (report.r_crit, report.rho) {
        println!("critical radius r_crit = {r_crit:.15}, rho = {rho:.15}");
    }
    println!("minimum energy = {:.15}", report.physical_energy);
    write_report(&report, output, "solve")?;
    Ok(EXIT_OK)
}

pub fn cmd_minimize(
    spec: &ProblemSpec,
    grid: GridArgs,
    config: &OptimizerConfig,
    output: &OutputArgs,
) -> anyhow::Result<i32> {
    let (lo, hi) = spec.working_domain();
    let grid = PolarGrid::new(lo, hi, grid.nr, grid.nt)?;
    let (map, report) = minimize(spec, grid, config)?;
    ensure_dir(&output.out)?;
    io::write_csv(
        &map,
        BufWriter::new(File::create(output.out.join("map.csv"))?),
    )?;
    io::write_binary(
        &map,
        BufWriter::new(File::create(output.out.join("map.bin"))?),
    )?;
    if output.format == Format::Svg {
        fs::write(
            output.out.join("minimize.svg"),
            render_svg(&map, FigureLayout::default_for(&map))?,
        )?;
    }
    write_report(&report, output, "minimize")?;
    println!(
        "iterations {}, energy {:.12}, oracle {:.12}, gap {:.3e}, active fraction {:.4}{}",
        report.iterations,
        report.energy,
        report.oracle_energy,
        report.gap_rel,
        report.active_fraction,
        if report.converged {
            ""
        } else {
            " (not converged)"
        }
    );
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

/// The map selected by `--map` on a grid over the working domain.
pub fn load_map(spec: &ProblemSpec, grid: GridArgs, map: &MapArgs) -> anyhow::Result<DiscreteMap> {
    let working = || -> anyhow::Result<PolarGrid> {
        let (lo, hi) = spec.working_domain();
        Ok(PolarGrid::new(lo, hi, grid.nr, grid.nt)?)
    };
    let name = map.map.as_deref().unwrap_or(if spec.is_above_bound() {
        "g_circ"
    } else {
        "g_diamond"
    });
    match name {
        "g_circ" => {
            if !spec.is_above_bound() {
                bail!("g_circ is not admissible below the bound; use g_diamond");
            }
            Ok(oracle_samples(spec, working()?)?)
        }
        "g_diamond" => {
            if spec.is_above_bound() {
                bail!("g_diamond exists only below the bound; use g_circ");
            }
            Ok(oracle_samples(spec, working()?)?)
        }
        "power" => {
            let j = spec.j as i32;
            let g = PolarGrid::new(1.0, spec.r, grid.nr, grid.nt)?;
            Ok(DiscreteMap::sample(|z| z.powi(j), g, spec.r.powi(j), j)?)
        }
        path => {
            let path = Path::new(path);
            let file = File::open(path)
                .with_context(|| format!("cannot open map file {}", path.display()))?;
            let reader = BufReader::new(file);
            let m = if path.extension().and_then(|e| e.to_str()) == Some("csv") {
                io::read_csv(reader, spec.target_r, spec.j as i32)?
            } else {
                io::read_binary(reader)?
            };
            Ok(m)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub physical_energy: f64,
    pub oracle_energy: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

pub fn cmd_energy(
    spec: &ProblemSpec,
    grid: GridArgs,
    map: &MapArgs,
    output: &OutputArgs,
) -> anyhow::Result<i32> {
    let m = load_map(spec, grid, map)?;
    let energy = dirichlet_energy(&m);
    let report = EnergyReport {
        energy,
        physical_energy: spec.physical_energy(energy),
        oracle_energy: energy_closed(spec)?.value,
        n_radial: m.grid.n_radial,
        n_angular: m.grid.n_angular,
    };
    println!("energy = {:.15}", report.energy);
    write_report(&report, output, "energy")?;
    Ok(EXIT_OK)
}

pub fn cmd_certify(
    spec: &ProblemSpec,
    grid: GridArgs,
    map: &MapArgs,
    tol: f64,
    output: &OutputArgs,
) -> anyhow::Result<i32> {
    if !(tol > 0.0) {
        bail!("--tol must be positive");
    }
    let m = load_map(spec, grid, map)?;
    let report: CertificateReport = certify(&m, spec)?;
    write_report(&report, output, "certify")?;
    println!(
        "energy {:.12} >= certified {:.12} (lower bound {:.12}), slack {:.3e}, max pointwise violation {:.3e}",
        report.energy, report.certified_value, report.lower_bound, report.slack, report.max_pointwise_violation
    );
    Ok(if report.is_violated(tol) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

pub fn cmd_figure(
    spec: &ProblemSpec,
    grid: GridArgs,
    map: &MapArgs,
    rings: Option<usize>,
    rays: Option<usize>,
    output: &OutputArgs,
) -> anyhow::Result<i32> {
    let m = load_map(spec, grid, map)?;
    let default = FigureLayout::default_for(&m);
    let layout = FigureLayout {
        rings: rings.unwrap_or(default.rings),
        rays: rays.unwrap_or(default.rays),
    };
    ensure_dir(&output.out)?;
    write_curves_csv(
        &m,
        layout,
        BufWriter::new(File::create(output.out.join("figure.csv"))?),
    )?;
    if output.format != Format::Csv {
        fs::write(output.out.join("figure.svg"), render_svg(&m, layout)?)?;
    }
    Ok(EXIT_OK)
}
