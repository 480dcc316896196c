//! Command-line front end.
//!
//! Every flag is optional; values come from the flag, then the `--config`
//! file, then a built-in default. The seed also falls back to the
//! `ES_LAB_SEED` environment variable before its default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, ValueEnum};

use crate::error::Error;
use crate::harness::{
    density_experiment, read_config, run_perturbation_reference, run_sweep, write_csv, DensityParams,
    SweepSpec, DEFAULT_LAMBDAS,
};
use crate::landscape::{make_hessian, HessianKind};
use crate::sampling::SelectionMode;

pub const SEED_ENV: &str = "ES_LAB_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    /// λ sweep over Hessian families, dimensions, conditions and translations.
    Sweep,
    /// e1/e2 of a perturbed identity I + E against every family.
    PerturbRef,
    /// Histograms of mutation values ψ and winning values ω.
    Density,
    /// Spectrum and structure of one Hessian.
    HessianInfo,
    /// Histogram of ℓth-degree winning values against their order-statistic law.
    OrderStat,
}

#[derive(Debug, Parser)]
#[command(name = "es-lab", version, about = "Covariance of selected Gaussian winners on quadratic landscapes")]
struct Cli {
    verb: Verb,
    #[command(flatten)]
    flags: Flags,
}

/// Raw flag values; parsing and defaults happen after merging with the
/// config file.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Hessian family H1..H5, comma list for sweeps [default: H1,H2,H3,H4,H5; H3 for single runs]
    #[arg(long)]
    pub kind: Option<String>,
    /// Dimension n, comma list for sweeps [default: 8]
    #[arg(long)]
    pub dim: Option<String>,
    /// Condition number c, comma list for sweeps and perturb-ref [default: 10]
    #[arg(long)]
    pub cond: Option<String>,
    /// Population size for density and order-stat [default: 1000]
    #[arg(long)]
    pub lambda: Option<String>,
    /// Ascending population sizes for sweeps [default: 5,10,20,50,100,200,500,1000,2000,5000,10000]
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Iterations per sweep cell [default: 100000]
    #[arg(long)]
    pub iters: Option<String>,
    /// Single-mutation samples for density and order-stat [default: 100000]
    #[arg(long)]
    pub samples: Option<String>,
    /// λ-competitions for the winner histogram [default: min(samples, 10000)]
    #[arg(long)]
    pub competitions: Option<String>,
    /// Master seed [default: $ES_LAB_SEED, else 1]
    #[arg(long)]
    pub seed: Option<String>,
    /// Selection mode: best, ell or mu [default: best; ell when --ell is given; mu when --mu is given]
    #[arg(long)]
    pub mode: Option<String>,
    /// Degree ℓ of the recorded winner [default: 1; 2 for order-stat]
    #[arg(long)]
    pub ell: Option<String>,
    /// Number μ of averaged winners [default: 1]
    #[arg(long)]
    pub mu: Option<String>,
    /// Translation scale s, a = s·(1,…,1), comma list [default: 1]
    #[arg(long)]
    pub translation: Option<String>,
    /// Worker threads [default: machine parallelism]
    #[arg(long)]
    pub workers: Option<String>,
    /// Output CSV path; density writes <stem>_psi.csv and <stem>_omega.csv [default: <verb>.csv]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key = value file whose keys mirror these flags [default: none]
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Perturbation strength ε for perturb-ref [default: 0.05]
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Random matrices for perturb-ref [default: 10000]
    #[arg(long)]
    pub trials: Option<String>,
    /// Equal-mass histogram bins [default: 80]
    #[arg(long)]
    pub bins: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbSpec {
    pub n: usize,
    pub conds: Vec<f64>,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Sweep(SweepSpec),
    PerturbRef(PerturbSpec),
    Density { params: DensityParams, output: PathBuf },
    HessianInfo { kind: HessianKind, n: usize, c: f64 },
    OrderStat { params: DensityParams, output: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    Info(String),
    Usage(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Info(s) => f.write_str(s.trim_end()),
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses argv (including the program name) using the process environment
/// for the seed fallback.
pub fn parse_args<I, T>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    parse_args_with_env(argv, std::env::var(SEED_ENV).ok())
}

/// Like [`parse_args`] with an explicit value for `ES_LAB_SEED`.
pub fn parse_args_with_env<I, T>(argv: I, env_seed: Option<String>) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => {
                let text = e.to_string();
                let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                usage(line.trim_start_matches("error: ").to_string())
            }
        }
    })?;
    let config = match &cli.flags.config {
        Some(path) => read_config(path).map_err(|e| usage(e.to_string()))?,
        None => BTreeMap::new(),
    };
    let opts = Options { flags: &cli.flags, config: &config, env_seed };
    opts.check_config_keys()?;
    build_command(cli.verb, &opts)
}

/// Config keys accepted in addition to the flag names.
const CONFIG_ALIASES: &[(&str, &str)] = &[
    ("kinds", "kind"),
    ("dims", "dim"),
    ("conds", "cond"),
    ("translations", "translation"),
    ("output", "out"),
];

const FLAG_NAMES: &[&str] = &[
    "kind", "dim", "cond", "lambda", "lambdas", "iters", "samples", "competitions", "seed", "mode",
    "ell", "mu", "translation", "workers", "out", "epsilon", "trials", "bins",
];

struct Options<'a> {
    flags: &'a Flags,
    config: &'a BTreeMap<String, String>,
    env_seed: Option<String>,
}

impl Options<'_> {
    fn check_config_keys(&self) -> Result<(), CliError> {
        for key in self.config.keys() {
            let known = FLAG_NAMES.contains(&key.as_str()) || CONFIG_ALIASES.iter().any(|(a, _)| a == key);
            if !known {
                return Err(usage(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }

    fn flag(&self, name: &str) -> Option<String> {
        let f = self.flags;
        let v = match name {
            "kind" => &f.kind,
            "dim" => &f.dim,
            "cond" => &f.cond,
            "lambda" => &f.lambda,
            "lambdas" => &f.lambdas,
            "iters" => &f.iters,
            "samples" => &f.samples,
            "competitions" => &f.competitions,
            "seed" => &f.seed,
            "mode" => &f.mode,
            "ell" => &f.ell,
            "mu" => &f.mu,
            "translation" => &f.translation,
            "workers" => &f.workers,
            "epsilon" => &f.epsilon,
            "trials" => &f.trials,
            "bins" => &f.bins,
            "out" => return f.out.as_ref().map(|p| p.to_string_lossy().into_owned()),
            _ => &None,
        };
        v.clone()
    }

    /// Flag value, else config value under the flag name or an alias.
    fn raw(&self, name: &str) -> Option<String> {
        self.flag(name).or_else(|| {
            self.config.get(name).cloned().or_else(|| {
                CONFIG_ALIASES
                    .iter()
                    .filter(|(_, target)| *target == name)
                    .find_map(|(alias, _)| self.config.get(*alias).cloned())
            })
        })
    }

    fn scalar<T: FromStr>(&self, name: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(name) {
            Some(s) => parse_value(name, &s),
            None => Ok(default),
        }
    }

    fn list<T: FromStr>(&self, name: &str, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(name) {
            Some(s) => s.split(',').map(|item| parse_value(name, item)).collect(),
            None => Ok(default),
        }
    }

    fn seed(&self) -> Result<u64, CliError> {
        match self.raw("seed") {
            Some(s) => parse_value("seed", &s),
            None => match &self.env_seed {
                Some(s) => parse_value(SEED_ENV, s),
                None => Ok(DEFAULT_SEED),
            },
        }
    }

    fn workers(&self) -> Result<usize, CliError> {
        let default = std::thread::available_parallelism().map_or(1, |n| n.get());
        let w = self.scalar("workers", default)?;
        if w == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        Ok(w)
    }

    fn output(&self, verb: &str) -> PathBuf {
        self.raw("out").map_or_else(|| PathBuf::from(format!("{verb}.csv")), PathBuf::from)
    }

    /// Resolves --mode/--ell/--mu into a selection mode.
    fn mode(&self, default_ell: usize) -> Result<SelectionMode, CliError> {
        let ell = self.raw("ell");
        let mu = self.raw("mu");
        let name = match self.raw("mode") {
            Some(m) => m.trim().to_ascii_lowercase(),
            None if ell.is_some() && mu.is_some() => return Err(usage("--ell and --mu are mutually exclusive")),
            None if ell.is_some() => "ell".into(),
            None if mu.is_some() => "mu".into(),
            None if default_ell > 1 => "ell".into(),
            None => "best".into(),
        };
        match name.as_str() {
            "best" => Ok(SelectionMode::Best),
            "ell" => Ok(SelectionMode::LthDegree(self.scalar("ell", default_ell.max(1))?)),
            "mu" => Ok(SelectionMode::MuAverage(self.scalar("mu", 1)?)),
            other => Err(usage(format!("--mode must be best, ell or mu, got `{other}`"))),
        }
    }
}

fn parse_value<T: FromStr>(name: &str, s: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| usage(format!("--{name}: cannot parse `{}`: {e}", s.trim())))
}

fn check_mode(mode: SelectionMode, lambdas: &[usize]) -> Result<(), CliError> {
    for &lambda in lambdas {
        mode.validate(lambda).map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn build_command(verb: Verb, o: &Options) -> Result<Command, CliError> {
    let seed = o.seed()?;
    match verb {
        Verb::Sweep => {
            let lambdas = match (o.flag("lambdas"), o.flag("lambda")) {
                (Some(_), Some(_)) => return Err(usage("give either --lambda or --lambdas, not both")),
                (Some(_), None) => o.list("lambdas", vec![])?,
                (None, Some(_)) => o.list("lambda", vec![])?,
                (None, None) => match o.raw("lambdas") {
                    Some(_) => o.list("lambdas", vec![])?,
                    None => o.list("lambda", DEFAULT_LAMBDAS.to_vec())?,
                },
            };
            let mode = o.mode(1)?;
            check_mode(mode, &lambdas)?;
            let spec = SweepSpec {
                kinds: o.list("kind", HessianKind::FAMILIES.to_vec())?,
                dims: o.list("dim", vec![8])?,
                conds: o.list("cond", vec![10.0])?,
                lambdas,
                translations: o.list("translation", vec![1.0])?,
                mode,
                iters: o.scalar("iters", 100_000)?,
                seed,
                workers: o.workers()?,
                output: Some(o.output("sweep")),
            };
            spec.validate().map_err(|e| usage(e.to_string()))?;
            Ok(Command::Sweep(spec))
        }
        Verb::PerturbRef => {
            let spec = PerturbSpec {
                n: o.scalar("dim", 8)?,
                conds: o.list("cond", vec![10.0])?,
                epsilon: o.scalar("epsilon", 0.05)?,
                trials: o.scalar("trials", 10_000)?,
                seed,
                output: o.output("perturb-ref"),
            };
            if spec.trials == 0 {
                return Err(usage("--trials must be at least 1"));
            }
            if !(spec.epsilon >= 0.0) {
                return Err(usage("--epsilon must be nonnegative"));
            }
            Ok(Command::PerturbRef(spec))
        }
        Verb::Density | Verb::OrderStat => {
            let default_ell = if verb == Verb::OrderStat { 2 } else { 1 };
            let lambda: usize = o.scalar("lambda", 1000)?;
            let ell = match o.mode(default_ell)? {
                SelectionMode::Best => 1,
                SelectionMode::LthDegree(ell) => ell,
                SelectionMode::MuAverage(_) => {
                    return Err(usage("density and order-stat record single winners; use --ell"))
                }
            };
            check_mode(SelectionMode::LthDegree(ell), &[lambda])?;
            let samples: usize = o.scalar("samples", 100_000)?;
            let mut params = DensityParams::new(
                o.scalar("kind", HessianKind::Ellipse)?,
                o.scalar("dim", 8)?,
                o.scalar("cond", 10.0)?,
                lambda,
                samples,
                seed,
            );
            params.ell = ell;
            params.competitions = o.scalar("competitions", params.competitions)?;
            params.bins = o.scalar("bins", 80)?;
            if samples < 1000 {
                return Err(usage("--samples must be at least 1000"));
            }
            if params.bins == 0 || params.competitions == 0 {
                return Err(usage("--bins and --competitions must be at least 1"));
            }
            let name = if verb == Verb::Density { "density" } else { "order-stat" };
            let output = o.output(name);
            Ok(if verb == Verb::Density {
                Command::Density { params, output }
            } else {
                Command::OrderStat { params, output }
            })
        }
        Verb::HessianInfo => Ok(Command::HessianInfo {
            kind: o.scalar("kind", HessianKind::Ellipse)?,
            n: o.scalar("dim", 8)?,
            c: o.scalar("cond", 10.0)?,
        }),
    }
}

/// Result of a successful dispatch.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Human-readable report; the last line is the one-line summary.
    pub message: String,
    pub files: Vec<PathBuf>,
}

/// `out.csv` → `out_psi.csv` style sibling path.
pub fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    let ext = path.extension().map_or_else(|| "csv".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

pub fn dispatch(cmd: &Command) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let run = |r: crate::error::Result<Outcome>| r.map_err(CliError::Runtime);
    let mut outcome = match cmd {
        Command::Sweep(spec) => run((|| {
            let rows = run_sweep(spec)?;
            let path = spec.output.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
            write_csv(&rows, &path)?;
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            Ok(Outcome {
                message: format!("sweep: {} rows ({failed} failed) written to {}", rows.len(), path.display()),
                files: vec![path],
            })
        })())?,
        Command::PerturbRef(p) => run((|| {
            let rows = run_perturbation_reference(p.n, &p.conds, p.epsilon, p.trials, p.seed)?;
            write_csv(&rows, &p.output)?;
            Ok(Outcome {
                message: format!("perturb-ref: {} rows written to {}", rows.len(), p.output.display()),
                files: vec![p.output.clone()],
            })
        })())?,
        Command::Density { params, output } => run((|| {
            let report = density_experiment(params)?;
            let psi = suffixed(output, "psi");
            let omega = suffixed(output, "omega");
            write_csv(&report.psi.bins(), &psi)?;
            write_csv(&report.omega.bins(), &omega)?;
            Ok(Outcome {
                message: format!(
                    "density: gamma(upsilon={:.6}, eta={:.6}); KS psi={:.4}, omega={:.4}; {} + {} rows written to {}, {}",
                    report.gamma.upsilon,
                    report.gamma.eta,
                    report.ks_psi,
                    report.ks_omega,
                    report.psi.masses.len(),
                    report.omega.masses.len(),
                    psi.display(),
                    omega.display()
                ),
                files: vec![psi, omega],
            })
        })())?,
        Command::OrderStat { params, output } => run((|| {
            let report = density_experiment(params)?;
            write_csv(&report.omega.bins(), output)?;
            Ok(Outcome {
                message: format!(
                    "order-stat: ell={} of lambda={}; KS={:.4}; {} rows written to {}",
                    params.ell,
                    params.lambda,
                    report.ks_omega,
                    report.omega.masses.len(),
                    output.display()
                ),
                files: vec![output.clone()],
            })
        })())?,
        Command::HessianInfo { kind, n, c } => run((|| {
            let h = make_hessian(*kind, *n, *c)?;
            let diag = h.entries().diagonal();
            let spread = diag.iter().fold(0.0f64, |m, d| m.max((d - diag[0]).abs()));
            let spectrum: Vec<String> = h.spectrum().iter().map(|v| format!("{v:.9}")).collect();
            let message = format!(
                "{} n={} c={}\nspectrum: {}\ncondition number: {:.9}\nconstant diagonal: {} (max deviation {:.3e}, mean {:.9})\nsymmetric: {}",
                kind.label(),
                n,
                c,
                spectrum.join(" "),
                h.condition_number(),
                if spread <= 1e-12 * diag[0].abs().max(1.0) { "yes" } else { "no" },
                spread,
                diag.iter().sum::<f64>() / *n as f64,
                h.entries().is_symmetric(0.0)
            );
            Ok(Outcome { message, files: vec![] })
        })())?,
    };
    outcome.message.push_str(&format!("\nwall time: {:.3}s", start.elapsed().as_secs_f64()));
    Ok(outcome)
}

/// Full entry point: parse, dispatch, print, and return the exit code.
pub fn run_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv).and_then(|cmd| dispatch(&cmd)) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            0
        }
        Err(e @ CliError::Info(_)) => {
            println!("{e}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
