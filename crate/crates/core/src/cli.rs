//! Command-line front end: `simulate`, `validate` and `lawtable`.
//!
//! Exit codes: 0 success, 1 runtime failure (arrival guard, I/O), 2 bad
//! flags, 3 model validation failure, 4 a validation check failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bernstein::{check_bernstein, log_grid, Activity, BernsteinModel};
use crate::error::Error;
use crate::estimators::summarize;
use crate::export::write_text;
use crate::laws::{gamma_texture_law, k_texture_law, texture_law_for, CountLaw, TextureLaw};
use crate::lst_table::LstTable;
use crate::rng;
use crate::speckle::{compose, gen_speckle, grid_len, Correlation, SpeckleSpec};
use crate::texture::{sample_on_grid, simulate_with, SimConfig, SimMode, TexturePath};
use crate::validation::{
    all_passed, format_table, run_suite, thinned_ks, Suite, ValidationSettings,
};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_CHECKS: i32 = 4;

/// Highest sign-alternation order checked, capped by the model's smoothness.
const SIGN_ORDER: u32 = 4;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "CLUTTER_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "clutter",
    version,
    about = "Compound-Gaussian clutter from windowed compound-Poisson textures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a texture path (and optionally clutter) and write CSV tables.
    Simulate(SimulateArgs),
    /// Compare simulation and analytic identities against reference laws.
    Validate(ValidateArgs),
    /// Tabulate a reference law as CSV.
    Lawtable(LawtableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// h(z) = z / (z + 1): finite activity, K-distributed clutter.
    FiniteK,
    /// h(z) = ln(1 + z): infinite activity, gamma texture.
    InfiniteGamma,
    /// Limit transform G(z) read from `--lst-file`.
    CustomLst,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "finite-k")]
    pub model: ModelKind,
    /// CSV of `z,G` rows for `--model custom-lst`.
    #[arg(long, value_name = "FILE")]
    pub lst_file: Option<PathBuf>,
}

/// Exactly one of `--gamma` and `--nu`; the other follows from `nu = gamma T`.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ShapeArgs {
    /// Cluster birth rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Shape parameter nu = gamma T.
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpeckleKind {
    White,
    Ar1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    FiniteExact,
    InfiniteApprox,
    DiscreteWindowed,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FiniteExact => SimMode::FiniteExact,
            ModeArg::InfiniteApprox => SimMode::InfiniteApprox,
            ModeArg::DiscreteWindowed => SimMode::DiscreteWindowed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Window length T.
    #[arg(long = "T", default_value_t = 8.0)]
    pub window: f64,
    /// Cluster scale for the integer process.
    #[arg(long, default_value_t = 150.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1e5)]
    pub duration: f64,
    /// Output grid spacing.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Simulation mode; defaults to exact for finite activity and the
    /// normalized integer process otherwise.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write the change-point list as `events.csv`.
    #[arg(long)]
    pub events: bool,
    /// Compose clutter with this speckle and write `clutter.csv`.
    #[arg(long, value_enum)]
    pub speckle: Option<SpeckleKind>,
    /// Speckle power E|x|^2.
    #[arg(long, default_value_t = 1.0)]
    pub speckle_variance: f64,
    /// Lag-one speckle correlation for `--speckle ar1`.
    #[arg(long, default_value_t = 0.9)]
    pub rho: f64,
    /// Independent replications, written to `rep-<i>/` when more than one.
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// Worker threads for replications.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Marginal,
    Covariance,
    Moments,
    GaussianLimit,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Marginal => Suite::Marginal,
            SuiteArg::Covariance => Suite::Covariance,
            SuiteArg::Moments => Suite::Moments,
            SuiteArg::GaussianLimit => Suite::GaussianLimit,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long = "T", default_value_t = 8.0)]
    pub window: f64,
    #[arg(long, default_value_t = 150.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1e5)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    /// Window-count snapshots for the count-law check.
    #[arg(long, default_value_t = 1_000_000)]
    pub count_snapshots: usize,
    /// Also write the checks as JSON.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawKind {
    KTexture,
    Gamma,
    PolyaAeppli,
    Negbin,
}

#[derive(Debug, Args)]
pub struct LawtableArgs {
    #[arg(long, value_enum)]
    pub law: LawKind,
    #[arg(long)]
    pub nu: f64,
    /// Geometric cluster parameter for `polya-aeppli`.
    #[arg(long)]
    pub p: Option<f64>,
    /// Mean count for `negbin`.
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Upper end of the texture grid; defaults to where the tail mass is negligible.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Grid intervals for texture laws.
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Serialized alongside every simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub model: String,
    pub config: SimConfig,
    pub speckle: Option<SpeckleSpec>,
    pub replications: usize,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub tool_version: String,
}

/// A failure together with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidModel(_) | Error::NotPositiveSemidefinite { .. } => EXIT_MODEL,
            Error::Domain { .. } | Error::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command, writing
/// reports to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Validate(a) => cmd_validate(&a, out),
        Command::Lawtable(a) => cmd_lawtable(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn build_model(args: &ModelArgs, nu: f64) -> CliResult<BernsteinModel> {
    match (args.model, &args.lst_file) {
        (ModelKind::FiniteK, None) => Ok(BernsteinModel::finite_builtin()),
        (ModelKind::InfiniteGamma, None) => Ok(BernsteinModel::infinite_builtin()),
        (ModelKind::CustomLst, Some(path)) => {
            let table = LstTable::load(path).map_err(|e| match e {
                Error::Io(io) => Failure {
                    code: EXIT_RUNTIME,
                    message: format!("{}: {io}", path.display()),
                },
                other => Failure::from(other),
            })?;
            let model = table.into_model(nu)?;
            let order = SIGN_ORDER.min(model.smooth_order());
            let report = check_bernstein(&model, &log_grid(1e-3, 1e3, 61), order)?;
            if !report.passed() {
                let failed: Vec<&str> = report.failures().map(|c| c.condition.as_str()).collect();
                return Err(Failure {
                    code: EXIT_MODEL,
                    message: format!("transform table fails: {}", failed.join("; ")),
                });
            }
            Ok(model)
        }
        (ModelKind::CustomLst, None) => Err(usage("--model custom-lst requires --lst-file")),
        (_, Some(_)) => Err(usage("--lst-file is only valid with --model custom-lst")),
    }
}

/// Resolves `(gamma, nu)` from whichever was given.
fn shape(args: &ShapeArgs, window: f64) -> CliResult<(f64, f64)> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(usage(format!("--T must be positive, got {window}")));
    }
    let (gamma, nu) = match (args.gamma, args.nu) {
        (Some(g), None) => (g, g * window),
        (None, Some(nu)) => (nu / window, nu),
        _ => return Err(usage("exactly one of --gamma and --nu is required")),
    };
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(usage(format!("gamma must be positive, got {gamma}")));
    }
    Ok((gamma, nu))
}

fn seed_override(seed: u64) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(seed),
    }
}

struct Replication {
    index: usize,
    outputs: Vec<PathBuf>,
    summary: String,
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let (gamma, nu) = shape(&args.shape, args.window)?;
    let model = build_model(&args.model, nu)?;
    let mode = args
        .mode
        .map(SimMode::from)
        .unwrap_or(match model.activity() {
            Activity::Finite { .. } => SimMode::FiniteExact,
            Activity::Infinite => SimMode::InfiniteApprox,
        });
    let seed = seed_override(args.seed)?;
    let cfg = SimConfig {
        gamma,
        window: args.window,
        kappa: args.kappa,
        duration: args.duration,
        dt: args.dt,
        seed,
        mode,
    };
    cfg.validate()?;
    let speckle = args
        .speckle
        .map(|kind| {
            let spec = SpeckleSpec {
                variance: args.speckle_variance,
                correlation: match kind {
                    SpeckleKind::White => Correlation::White,
                    SpeckleKind::Ar1 => Correlation::Ar1 { rho: args.rho },
                },
                dt: args.dt,
            };
            spec.validate().map(|_| spec)
        })
        .transpose()?;
    if args.replications == 0 || args.jobs == 0 {
        return Err(usage("--replications and --jobs must be at least 1"));
    }
    let law = texture_law_for(&model, nu)?.filter(|_| mode != SimMode::DiscreteWindowed);

    let run_one = |index: usize| -> CliResult<Replication> {
        let dir = if args.replications == 1 {
            args.out.clone()
        } else {
            args.out.join(format!("rep-{index}"))
        };
        replicate(
            &model,
            &cfg,
            speckle.as_ref(),
            law.as_ref(),
            index,
            &dir,
            args.events,
        )
    };
    let mut reps: Vec<Replication> = if args.jobs > 1 && args.replications > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|e| Failure {
                code: EXIT_RUNTIME,
                message: e.to_string(),
            })?;
        pool.install(|| {
            (0..args.replications)
                .into_par_iter()
                .map(run_one)
                .collect::<CliResult<_>>()
        })?
    } else {
        (0..args.replications)
            .map(run_one)
            .collect::<CliResult<_>>()?
    };
    reps.sort_by_key(|r| r.index);

    let mut outputs: Vec<String> = reps
        .iter()
        .flat_map(|r| r.outputs.iter().map(|p| p.display().to_string()))
        .collect();
    let manifest_path = args.out.join("manifest.json");
    outputs.push(manifest_path.display().to_string());
    let manifest = RunManifest {
        model: model.name().to_string(),
        config: cfg,
        speckle,
        replications: args.replications,
        outputs,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    write_text(
        &manifest_path,
        &(serde_json::to_string_pretty(&manifest).map_err(Error::from)? + "\n"),
    )?;
    for r in &reps {
        let _ = out.write_all(r.summary.as_bytes());
    }
    Ok(0)
}

fn replicate(
    model: &BernsteinModel,
    cfg: &SimConfig,
    speckle: Option<&SpeckleSpec>,
    law: Option<&TextureLaw>,
    index: usize,
    dir: &Path,
    events: bool,
) -> CliResult<Replication> {
    // Texture and speckle use disjoint streams of the same seed.
    let path = simulate_with(model, cfg, &mut rng::stream(cfg.seed, 2 * index as u64))?;
    let mut outputs = Vec::new();
    let texture_csv = dir.join("texture.csv");
    write_text(&texture_csv, &path.to_grid_csv(cfg.dt))?;
    outputs.push(texture_csv);
    if events {
        let events_csv = dir.join("events.csv");
        write_text(&events_csv, &path.to_event_csv())?;
        outputs.push(events_csv);
    }
    if let Some(spec) = speckle {
        let n = grid_len(cfg.duration, cfg.dt);
        let x = gen_speckle(spec, n, &mut rng::stream(cfg.seed, 2 * index as u64 + 1))?;
        let clutter = compose(&path, &x, cfg.dt)?;
        let clutter_csv = dir.join("clutter.csv");
        write_text(&clutter_csv, &clutter.to_csv())?;
        outputs.push(clutter_csv);
    }
    let summary = summary_text(&path, cfg, law, index)?;
    Ok(Replication {
        index,
        outputs,
        summary,
    })
}

fn summary_text(
    path: &TexturePath,
    cfg: &SimConfig,
    law: Option<&TextureLaw>,
    index: usize,
) -> CliResult<String> {
    let norm = path.normalization();
    let tau: Vec<f64> = sample_on_grid(path, cfg.dt, cfg.duration)
        .into_iter()
        .map(|v| v / norm)
        .collect();
    let s = summarize(&tau, cfg.dt, 0.0)?;
    let mut text = format!(
        "replication {index}: samples = {}, mean = {:.6}, variance = {:.6}, zero_fraction = {:.6}\n",
        s.n, s.mean, s.variance, s.zero_fraction
    );
    if let Some(law) = law {
        let (d, n) = thinned_ks(&tau, law, cfg.window, cfg.dt);
        text.push_str(&format!(
            "replication {index}: ks_vs_reference = {d:.6} over {n} samples spaced > T\n"
        ));
    }
    Ok(text)
}

fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> CliResult<i32> {
    let (_, nu) = shape(&args.shape, args.window)?;
    let model = build_model(&args.model, nu)?;
    let settings = ValidationSettings {
        nu,
        window: args.window,
        kappa: args.kappa,
        duration: args.duration,
        dt: args.dt,
        seed: seed_override(args.seed)?,
        count_snapshots: args.count_snapshots,
        sign_order: SIGN_ORDER,
    };
    settings.sim_config(&model).validate()?;
    let checks = run_suite(&model, &settings, args.suite.into())?;
    let _ = out.write_all(format_table(&checks).as_bytes());
    if let Some(path) = &args.json {
        write_text(
            path,
            &(serde_json::to_string_pretty(&checks).map_err(Error::from)? + "\n"),
        )?;
    }
    Ok(if all_passed(&checks) { 0 } else { EXIT_CHECKS })
}

fn cmd_lawtable(args: &LawtableArgs, out: &mut dyn Write) -> CliResult<i32> {
    if args.points == 0 {
        return Err(usage("--points must be at least 1"));
    }
    let csv = match args.law {
        LawKind::KTexture | LawKind::Gamma => {
            let law = if args.law == LawKind::KTexture {
                k_texture_law(args.nu)?
            } else {
                gamma_texture_law(args.nu)?
            };
            let x_max = args.x_max.unwrap_or_else(|| law.upper_limit());
            if !(x_max > 0.0 && x_max.is_finite()) {
                return Err(usage(format!("--x-max must be positive, got {x_max}")));
            }
            law.table_csv(x_max, args.points)
        }
        LawKind::PolyaAeppli => {
            let p = args
                .p
                .ok_or_else(|| usage("--law polya-aeppli requires --p"))?;
            CountLaw::polya_aeppli(args.nu, p)?.table_csv()
        }
        LawKind::Negbin => {
            let nbar = args
                .nbar
                .ok_or_else(|| usage("--law negbin requires --nbar"))?;
            CountLaw::negative_binomial(args.nu, nbar)?.table_csv()
        }
    };
    match &args.out {
        Some(path) => write_text(path, &csv)?,
        None => {
            let _ = out.write_all(csv.as_bytes());
        }
    }
    Ok(0)
}
