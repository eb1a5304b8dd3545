//! Command-line front end: `modulus`, `verify-lemmas`, `simulate` and
//! `symbol-check`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::{run_to_dir, RunSummary};
use crate::error::{Error, Result};
use crate::kernel::{
    dispersion_table, fitted_constant, radial_kernel_constant, MuskatOperator, PeriodicGrid, QuadratureSpec,
    SymbolMeasurement,
};
use crate::lemmas::{
    construct_crossing_profile, crossing_bound_chain, dissipation_bound, kiselev_integral_constant, verify_monotonicity,
    CrossingChainReport, DissipationReport, MonotonicityReport, PolarRoute,
};
use crate::modulus::Modulus;

pub const THREADS_ENV: &str = "MUSKAT_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "muskat-lab", version, about = "Muskat interface equation and flattening-modulus laboratory")]
pub struct Cli {
    /// Emit machine-readable JSON on stdout instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Worker threads (falls back to MUSKAT_LAB_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print nu(L), T*, phase boundaries and a table of j(t) and omega(t, r).
    Modulus(ModulusArgs),
    /// Run the lemma oracles.
    VerifyLemmas(VerifyArgs),
    /// Run a simulation from a config file.
    Simulate(SimulateArgs),
    /// Measure the dispersion relation of the discrete operator.
    SymbolCheck(SymbolArgs),
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    #[arg(long = "L", allow_negative_numbers = true)]
    pub l: f64,
    /// Rows in the table, spread evenly over [0, T*].
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    /// Radius of the omega column.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "L", default_value_t = 2.0)]
    pub l: f64,
    /// Grid points per axis of the slope-triple sweep.
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    /// Number of xi values in (0, 1] for the dissipation bound.
    #[arg(long, default_value_t = 100)]
    pub xi_samples: usize,
    /// Skip the crossing-fixture bound chain.
    #[arg(long)]
    pub skip_chain: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Continue from a MUSK1 snapshot.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Override `output_dir` from the config.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SymbolArgs {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    pub period: f64,
    /// Comma-separated modes, each `k` (along x1) or `k1:k2`.
    #[arg(long, default_value = "1,2,4")]
    pub modes: String,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Allowed deviation of rate / |k| from the first mode.
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
    /// Allowed deviation of the fitted constant from the kernel constant.
    #[arg(long, default_value_t = 0.05)]
    pub kernel_tol: f64,
    #[arg(long)]
    pub rings: Option<usize>,
    #[arg(long)]
    pub sectors: Option<usize>,
}

/// Exit code 1 for invalid input, I/O and numerical errors.
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ASSERTION: i32 = 3;

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ModulusRow {
    pub t: f64,
    pub j: f64,
    pub omega: f64,
}

#[derive(Debug, Serialize)]
pub struct ModulusReport {
    pub l: f64,
    pub nu: f64,
    pub tstar: f64,
    pub t1: f64,
    pub t2: f64,
    pub radius: f64,
    pub rows: Vec<ModulusRow>,
}

pub fn modulus_report(args: &ModulusArgs) -> Result<ModulusReport> {
    let m = Modulus::new(args.l)?;
    if !(args.radius >= 0.0) {
        return Err(Error::Domain(format!("radius must be >= 0, got {}", args.radius)));
    }
    let c = m.clock;
    let rows = (0..args.samples)
        .map(|i| {
            let t = if args.samples == 1 {
                0.0
            } else {
                c.tstar * i as f64 / (args.samples - 1) as f64
            };
            Ok(ModulusRow {
                t,
                j: m.j(t)?,
                omega: m.omega(t, args.radius)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModulusReport {
        l: m.l,
        nu: m.nu,
        tstar: c.tstar,
        t1: c.t1,
        t2: c.t2,
        radius: args.radius,
        rows,
    })
}

fn cmd_modulus(args: &ModulusArgs, json: bool) -> Result<i32> {
    let r = modulus_report(args)?;
    if json {
        print_json(&r)?;
    } else {
        println!("L = {}", r.l);
        println!("nu = {:.15e}", r.nu);
        println!("T* = {:.15e}", r.tstar);
        println!("t1 = {:.15e}  (exponential -> affine)", r.t1);
        println!("t2 = {:.15e}  (affine -> power law)", r.t2);
        println!("t,j,omega_r{}", r.radius);
        for row in &r.rows {
            println!("{},{},{}", row.t, row.j, row.omega);
        }
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct LemmaReport {
    pub l: f64,
    pub checks: Vec<Check>,
    pub monotonicity: MonotonicityReport,
    pub kiselev_constant: f64,
    pub dissipation: Vec<DissipationReport>,
    /// `xi` in `[1, 2/nu)`: reported, never asserted.
    pub dissipation_diagnostics: Vec<DissipationReport>,
    pub chains: Vec<CrossingChainReport>,
    pub passed: bool,
}

pub fn verify_lemmas(args: &VerifyArgs) -> Result<LemmaReport> {
    let m = Modulus::new(args.l)?;
    let mut checks = Vec::new();

    let mono = verify_monotonicity(args.l, args.resolution)?;
    checks.push(Check {
        name: "monotonicity gap >= -1e-12".into(),
        passed: mono.passed,
        detail: format!("min gap {:.3e} at {:?}", mono.min_gap, mono.argmin_gap),
    });
    checks.push(Check {
        name: "quotient minimiser at (L, nu, nu)".into(),
        passed: mono.distance_to_predicted < 1e-6,
        detail: format!(
            "argmin {:?}, distance {:.3e}",
            mono.argmin_quotient, mono.distance_to_predicted
        ),
    });

    let k = kiselev_integral_constant(1e-12)?.value;
    checks.push(Check {
        name: "small-xi constant in (1.5, 1.6)".into(),
        passed: k > 1.5 && k < 1.6,
        detail: format!("{k:.12}"),
    });

    let n = args.xi_samples.max(1);
    let dissipation = (1..=n)
        .map(|i| dissipation_bound(&m, 0.0, i as f64 / n as f64))
        .collect::<Result<Vec<_>>>()?;
    let failures = dissipation.iter().filter(|d| !d.holds).count();
    checks.push(Check {
        name: "dissipation bound on xi in (0, 1] at t = 0".into(),
        passed: failures == 0,
        detail: format!("{failures} of {n} fail"),
    });
    let sat = m.saturation_radius();
    let diagnostics = (0..20)
        .map(|i| 1.0 + (sat - 1.0) * (i as f64 + 0.5) / 20.0)
        .filter(|&xi| xi != 2.0)
        .map(|xi| dissipation_bound(&m, 0.0, xi))
        .collect::<Result<Vec<_>>>()?;

    let mut chains = Vec::new();
    if !args.skip_chain {
        let q = PolarRoute::default();
        for t in [0.0, m.clock.t1] {
            for xi in [0.25, 1.0, 1.5] {
                let (profile, _) = construct_crossing_profile(&m, t, xi)?;
                let report = crossing_bound_chain(&m, t, &profile, &q)?;
                checks.push(Check {
                    name: format!("bound chain at t = {t:.6}, xi = {xi}"),
                    passed: report.holds,
                    detail: format!(
                        "D = {:.6e}, j' = {:.6e}, route discrepancy {:.2e}",
                        report.planar.rate_gap,
                        m.clock.rate(t)?,
                        report.route_discrepancy
                    ),
                });
                chains.push(report);
            }
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(LemmaReport {
        l: args.l,
        checks,
        monotonicity: mono,
        kiselev_constant: k,
        dissipation,
        dissipation_diagnostics: diagnostics,
        chains,
        passed,
    })
}

fn cmd_verify(args: &VerifyArgs, json: bool) -> Result<i32> {
    let r = verify_lemmas(args)?;
    if json {
        print_json(&r)?;
    } else {
        for c in &r.checks {
            println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        println!("diagnostic (not asserted): dissipation bound for xi in [1, 2/nu)");
        println!("xi,value,bound,holds");
        for d in &r.dissipation_diagnostics {
            println!("{},{:.6e},{:.6e},{}", d.xi, d.value, d.bound, d.holds);
        }
    }
    Ok(if r.passed { 0 } else { EXIT_ASSERTION })
}

fn cmd_simulate(args: &SimulateArgs, json: bool) -> Result<i32> {
    let mut config = RunConfig::from_file(&args.config)?;
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.clone();
    }
    let summary: RunSummary = run_to_dir(&config, args.resume.as_deref())?;
    if json {
        print_json(&summary)?;
    } else {
        println!("status: {:?} (exit {})", summary.status, summary.exit_code);
        println!(
            "steps {}..{}, t = {}, dt = {:.6e}, measured strength c = {:.6}",
            summary.start_step, summary.final_step, summary.final_time, summary.dt, summary.strength
        );
        println!("min deficit {:.6e}, max Lipschitz {:.6e}", summary.monitors.min_deficit, summary.monitors.lipschitz_max);
        for f in &summary.failures {
            println!("failure: {f}");
        }
        if let Some(c) = &summary.crossing {
            println!("crossing at t = {} between {:?} and {:?}, deficit {:.3e}", c.t0, c.x0, c.y0, c.deficit);
        }
        println!("outputs in {}", config.output_dir.display());
    }
    Ok(summary.exit_code)
}

pub fn parse_modes(spec: &str) -> Result<Vec<[i64; 2]>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || Error::Domain(format!("bad mode `{item}`; expected `k` or `k1:k2`"));
            let k = match item.split_once(':') {
                Some((a, b)) => [a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?],
                None => [item.parse().map_err(|_| bad())?, 0],
            };
            if k == [0, 0] {
                return Err(Error::Domain("the zero mode has no decay rate".into()));
            }
            Ok(k)
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct SymbolRow {
    pub k: [i64; 2],
    pub wavenumber: f64,
    pub rate: f64,
    /// `(rate / |k|)` relative to the first mode.
    pub ratio: f64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct SymbolReport {
    pub n: usize,
    pub period: f64,
    pub eps: f64,
    pub rows: Vec<SymbolRow>,
    pub fitted_constant: f64,
    pub kernel_constant: f64,
    pub kernel_deviation: f64,
    pub max_ratio_deviation: f64,
    pub passed: bool,
}

pub fn symbol_check(args: &SymbolArgs) -> Result<SymbolReport> {
    let modes = parse_modes(&args.modes)?;
    if modes.is_empty() {
        return Err(Error::Domain("no modes given".into()));
    }
    let grid = PeriodicGrid::new(args.period, args.n)?;
    let mut spec = QuadratureSpec::for_grid(&grid);
    spec.rings = args.rings.unwrap_or(spec.rings);
    spec.sectors = args.sectors.unwrap_or(spec.sectors);
    let op = MuskatOperator::new(grid, spec)?;
    let table: Vec<SymbolMeasurement> = dispersion_table(&op, &modes, args.eps)?;
    let base = table[0].constant;
    let rows: Vec<SymbolRow> = table
        .iter()
        .map(|s| SymbolRow {
            k: s.k,
            wavenumber: s.wavenumber,
            rate: s.rate,
            ratio: s.constant / base,
            residual: s.residual,
        })
        .collect();
    let fitted = fitted_constant(&table);
    let kernel = radial_kernel_constant()?;
    let kernel_deviation = (fitted / kernel - 1.0).abs();
    let max_ratio_deviation = rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    Ok(SymbolReport {
        n: args.n,
        period: args.period,
        eps: args.eps,
        passed: max_ratio_deviation <= args.tol && kernel_deviation <= args.kernel_tol,
        rows,
        fitted_constant: fitted,
        kernel_constant: kernel,
        kernel_deviation,
        max_ratio_deviation,
    })
}

fn cmd_symbol(args: &SymbolArgs, json: bool) -> Result<i32> {
    let r = symbol_check(args)?;
    if json {
        print_json(&r)?;
    } else {
        println!("k1,k2,|k|,rate,ratio,residual");
        for row in &r.rows {
            println!(
                "{},{},{:.6},{:.6e},{:.6},{:.2e}",
                row.k[0], row.k[1], row.wavenumber, row.rate, row.ratio, row.residual
            );
        }
        println!("fitted constant {:.6}", r.fitted_constant);
        println!("kernel constant {:.6} (deviation {:.3}%)", r.kernel_constant, 100.0 * r.kernel_deviation);
        println!("max ratio deviation {:.3}%", 100.0 * r.max_ratio_deviation);
    }
    Ok(if r.passed { 0 } else { EXIT_ASSERTION })
}

/// Thread count from the flag, else the environment variable.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Domain(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        _ => Ok(None),
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Modulus(a) => cmd_modulus(a, cli.json),
        Command::VerifyLemmas(a) => cmd_verify(a, cli.json),
        Command::Simulate(a) => cmd_simulate(a, cli.json),
        Command::SymbolCheck(a) => cmd_symbol(a, cli.json),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    let threads = match resolve_threads(cli.threads) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let result = match threads {
        Some(0) => Err(Error::Domain("thread count must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Configuration(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
