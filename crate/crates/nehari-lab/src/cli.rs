//! Command-line front end. Reports go to stdout (or `--out`) as JSON, scan
//! tables as CSV. Exit codes: 0 ok, 1 internal error or failed check,
//! 2 invalid input, 3 a solve did not converge (its report is still written).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::energy::ModelParams;
use crate::error::{LabError, Result};
use crate::fibering::{fiber_coeffs, nehari_times, turning_time, FiberCoeffs, NehariRoots};
use crate::lambda_max::{maximize_quotient, QuotientConfig, Variant};
use crate::multibump::bump_curve;
use crate::radial_core::{RadialGrid, Scheme};
use crate::soliton::sobolev_constants;
use crate::solver::{certify_ground_state, check_global_regime, minimize_global, minimize_nehari_minus, minus_seed, split_soliton, SolveReport, SolverConfig};
use crate::thresholds::compute_thresholds;
use crate::verify::{self, Suite};

pub const SCHEMA_VERSION: u32 = 1;
pub const BUILD_ID: &str = env!("NEHARI_LAB_BUILD_ID");
const KAPPA_CONVENTION: &str = "phi(x) = kappa * int rho(y)/|x-y| dy";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nehari-lab", version = BUILD_ID, about = "Radial variational lab for a doubly coupled Hartree-Fock type system")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel parts.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GridArgs {
    /// Number of grid nodes.
    #[arg(long = "n", env = "NEHARI_LAB_GRID_N", default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 30.0)]
    pub r_max: f64,
    #[arg(long, default_value = "log")]
    pub scheme: String,
}

impl GridArgs {
    fn build(&self) -> Result<Arc<RadialGrid>> {
        RadialGrid::new(self.n, self.r_max, self.scheme.parse::<Scheme>()?)
    }
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.p, self.lambda, self.beta, self.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Global,
    NehariMinus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeedPair {
    SplitSoliton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Identities,
    Inequalities,
    All,
}

#[derive(Debug, Args)]
pub struct FiberingArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Use these coefficients A,B,C directly instead of a seed pair.
    #[arg(long, value_delimiter = ',')]
    pub coeffs: Option<Vec<f64>>,
    /// Pair whose ray is examined when no coefficients are given.
    #[arg(long, value_enum, default_value = "split-soliton")]
    pub seed_pair: SeedPair,
    /// Write the t,h,hp,hpp table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Global and/or Minus-branch minimization.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Threshold constants and energy caps.
    Thresholds {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Fibering coefficients, Nehari times and an h(t) table.
    Fibering(FiberingArgs),
    /// Maximize the quotient Lambda or LambdaBar.
    Lambda {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value = "Lambda")]
        variant: String,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4000)]
        max_iters: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Energies of N-bump configurations on the Plus branch (CSV).
    Multibump {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "R0", default_value_t = 3.5)]
        r0: f64,
        #[arg(long = "N-list", value_delimiter = ',', default_value = "1,2,4,8")]
        n_list: Vec<usize>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run the self-check suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
}

#[derive(Serialize)]
struct GridInfo {
    n: usize,
    r_max: f64,
    scheme: Scheme,
}

#[derive(Serialize)]
struct KappaConvention {
    kappa: f64,
    potential: &'static str,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    build_id: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridInfo>,
    kappa_convention: KappaConvention,
    #[serde(flatten)]
    body: &'a T,
}

fn envelope<T: Serialize>(grid: Option<&RadialGrid>, kappa: f64, body: &T) -> Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        build_id: BUILD_ID,
        grid: grid.map(|g| GridInfo { n: g.n, r_max: g.r_max, scheme: g.scheme }),
        kappa_convention: KappaConvention { kappa, potential: KAPPA_CONVENTION },
        body,
    };
    serde_json::to_string_pretty(&env).map(|s| s + "\n").map_err(|e| LabError::InvalidArgument(e.to_string()))
}

/// What a command produced: the report, a human-readable log for stderr and the exit code.
struct Output {
    text: String,
    log: String,
    code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, log: String::new(), code: EXIT_OK }
    }
}

fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::InvalidArgument(_) | LabError::InvalidGrid(_) | LabError::OutOfRegime(_) | LabError::Overlap { .. } => EXIT_INVALID,
        _ => EXIT_INTERNAL,
    }
}

/// Parses argv and runs the command, writing reports to `stdout` (or the
/// `--out` file) and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INTERNAL;
        }
    };
    let result = pool.install(|| dispatch(&cli.command));
    match result {
        Ok(out) => {
            let _ = stderr.write_all(out.log.as_bytes());
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &out.text).map_err(|e| e.to_string()),
                None => stdout.write_all(out.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                return EXIT_INTERNAL;
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Solve { model, grid, mode, max_iters, seed } => solve(model, grid, *mode, *max_iters, *seed),
        Command::Thresholds { model, grid } => {
            let g = grid.build()?;
            if !(model.lambda > 0.0) {
                return Err(LabError::InvalidArgument(format!("lambda = {} must be > 0", model.lambda)));
            }
            model.params()?;
            let consts = sobolev_constants(model.p, &g)?;
            let report = compute_thresholds(model.p, model.lambda, model.beta, model.kappa, &consts)?;
            #[derive(Serialize)]
            struct Body<'a> {
                #[serde(flatten)]
                thresholds: &'a crate::thresholds::ThresholdReport,
                constants: &'a crate::soliton::SobolevConstants,
            }
            Ok(Output::ok(envelope(Some(&g), model.kappa, &Body { thresholds: &report, constants: &consts })?))
        }
        Command::Fibering(args) => fibering(args),
        Command::Lambda { p, beta, variant, starts, seed, max_iters, grid } => {
            let g = grid.build()?;
            let variant: Variant = variant.parse()?;
            if *max_iters == 0 {
                return Err(LabError::InvalidArgument("max_iters must be positive".into()));
            }
            let cfg = QuotientConfig { starts: *starts, seed: *seed, max_iters: *max_iters };
            let res = maximize_quotient(*beta, *p, variant, &g, &cfg)?;
            Ok(Output::ok(envelope(Some(&g), 1.0, &res)?))
        }
        Command::Multibump { model, r0, n_list, grid } => {
            let g = grid.build()?;
            let prm = model.params()?;
            let consts = sobolev_constants(prm.p, &g)?;
            let curve = bump_curve(&prm, *r0, n_list, &consts, &g)?;
            Ok(Output::ok(curve.to_csv()))
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::Identities => Suite::Identities,
                SuiteArg::Inequalities => Suite::Inequalities,
                SuiteArg::All => Suite::All,
            };
            let checks = verify::run(suite)?;
            let mut all = true;
            let mut log = String::new();
            for c in &checks {
                all &= c.passed;
                log.push_str(&format!(
                    "{} {:<28} {:.3e} (limit {:.1e}) {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance,
                    c.detail
                ));
            }
            #[derive(Serialize)]
            struct Body<'a> {
                suite: Suite,
                passed: bool,
                checks: &'a [verify::Check],
            }
            let text = envelope(None, 1.0, &Body { suite, passed: all, checks: &checks })?;
            Ok(Output { text, log, code: if all { EXIT_OK } else { EXIT_INTERNAL } })
        }
    }
}

fn solve(model: &ModelArgs, grid: &GridArgs, mode: ModeArg, max_iters: usize, seed: u64) -> Result<Output> {
    let g = grid.build()?;
    let prm = model.params()?;
    let cfg = SolverConfig { max_iters, seed, ..SolverConfig::default() };
    cfg.validate()?;
    let mut reports: Vec<SolveReport> = Vec::new();
    let mut log = String::new();
    // `both` drops the global solve where J is unbounded below; `global` reports the error
    let run_global = match mode {
        ModeArg::Global => true,
        ModeArg::Both => check_global_regime(&prm).is_ok(),
        ModeArg::NehariMinus => false,
    };
    if mode == ModeArg::Both && !run_global {
        log.push_str(&format!("skipping global minimization: J is unbounded below for p = {} >= 3\n", prm.p));
    }
    if run_global {
        reports.push(minimize_global(&prm, &g, &cfg)?);
    }
    if matches!(mode, ModeArg::NehariMinus | ModeArg::Both) {
        let init = minus_seed(&prm, &g)?;
        let report = minimize_nehari_minus(&prm, &g, &cfg, &init)?;
        let consts = sobolev_constants(prm.p, &g)?;
        reports.push(certify_ground_state(report, &prm, &consts));
    }
    // a descent that collapses to the zero pair has reached its limit
    let code = if reports.iter().all(|r| r.converged || r.trivial_limit) { EXIT_OK } else { EXIT_NOT_CONVERGED };
    #[derive(Serialize)]
    struct Body<'a> {
        config: SolverConfig,
        reports: &'a [SolveReport],
    }
    Ok(Output { text: envelope(Some(&g), prm.kappa, &Body { config: cfg, reports: &reports })?, log, code })
}

#[derive(Serialize)]
struct FiberingReport {
    coeffs: FiberCoeffs,
    roots: NehariRoots,
    turning_time: Option<f64>,
    energy_minus: Option<f64>,
    energy_plus: Option<f64>,
}

fn fibering(args: &FiberingArgs) -> Result<Output> {
    let FiberingArgs { p, lambda, beta, kappa, ref coeffs, seed_pair: SeedPair::SplitSoliton, ref csv, samples, ref grid } = *args;
    let lambda = lambda.unwrap_or(1.0);
    let (c, g) = match coeffs.as_deref() {
        Some(v) => {
            if !(p > 2.0 && p < 6.0) {
                return Err(LabError::InvalidArgument(format!("p = {p} outside (2, 6)")));
            }
            if v.len() != 3 || v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || !(v[0] > 0.0) {
                return Err(LabError::InvalidArgument("--coeffs needs A > 0, B >= 0, C >= 0".into()));
            }
            (FiberCoeffs { a: v[0], b: v[1], c: v[2], p, lambda }, None)
        }
        None => {
            let beta = beta.ok_or_else(|| LabError::InvalidArgument("--beta is required without --coeffs".into()))?;
            let prm = ModelParams::new(p, lambda, beta, kappa)?;
            let g = grid.build()?;
            let pair = split_soliton(&prm, &g)?;
            (fiber_coeffs(&pair, &prm)?, Some(g))
        }
    };
    let roots = nehari_times(&c);
    let report = FiberingReport {
        coeffs: c,
        roots,
        turning_time: turning_time(&c),
        energy_minus: roots.t_minus.map(|t| c.h(t)),
        energy_plus: roots.t_plus.map(|t| c.h(t)),
    };
    if let Some(path) = csv.as_ref() {
        let t_end = 1.5 * roots.t_plus.or(roots.t_minus).or(turning_time(&c)).unwrap_or(1.0).max(1e-300);
        let samples = samples.max(2);
        let mut table = String::from("t,h,hp,hpp\n");
        for k in 0..samples {
            let t = t_end * k as f64 / (samples - 1) as f64;
            table.push_str(&format!("{},{},{},{}\n", t, c.h(t), c.hp(t), c.hpp(t)));
        }
        std::fs::write(path, table).map_err(|e| LabError::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(Output::ok(envelope(g.as_deref(), kappa, &report)?))
}
