//! Experiment orchestration: λ sweeps, the perturbed-identity reference and
//! density comparisons, with CSV artifacts.

pub mod config;
pub mod csv;
mod density;

use std::path::PathBuf;

pub use config::{parse_config, read_config};
pub use csv::{fmt_float, render_csv, write_csv, CsvRow};
pub use density::{
    density_experiment, ks_distance, DensityParams, DensityReport, Histogram, HistogramBin,
};

use crate::error::{Error, Result};
use crate::landscape::{make_hessian, HessianKind, Objective};
use crate::metrics::{e1, e2, normalize_hc, ErrorReport, ReportContext};
use crate::sampling::{derive_seed, perturbed_identity, run_sampling, stream_rng, SampleConfig, SelectionMode};

/// Population sizes used when none are given.
pub const DEFAULT_LAMBDAS: [usize; 11] = [5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000];

/// Grid of sweep cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kinds: Vec<HessianKind>,
    pub dims: Vec<usize>,
    pub conds: Vec<f64>,
    pub lambdas: Vec<usize>,
    /// Scales s of the translation a = s·(1,…,1).
    pub translations: Vec<f64>,
    pub mode: SelectionMode,
    pub iters: u64,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.kinds.is_empty()
            || self.dims.is_empty()
            || self.conds.is_empty()
            || self.lambdas.is_empty()
            || self.translations.is_empty()
        {
            return Err(Error::param("sweep lists must be non-empty"));
        }
        if !self.lambdas.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::param("population sizes must be strictly ascending"));
        }
        if self.iters == 0 || self.workers == 0 {
            return Err(Error::param("iters and workers must be at least 1"));
        }
        Ok(())
    }

    /// Cells in emission order: kind, dimension, condition, translation, λ.
    pub fn cells(&self) -> Vec<ReportContext> {
        let mut cells = Vec::new();
        for &kind in &self.kinds {
            for &n in &self.dims {
                for &c in &self.conds {
                    for &s in &self.translations {
                        for &lambda in &self.lambdas {
                            cells.push(ReportContext {
                                kind,
                                n,
                                c,
                                lambda,
                                mode: self.mode,
                                translation_scale: s,
                                iters: self.iters,
                                seed: cell_seed(self.seed, kind, n, c, lambda, s, self.mode),
                            });
                        }
                    }
                }
            }
        }
        cells
    }
}

/// Seed of one cell, a function of the cell's own coordinates only.
pub fn cell_seed(master: u64, kind: HessianKind, n: usize, c: f64, lambda: usize, s: f64, mode: SelectionMode) -> u64 {
    let mode_tag = match mode {
        SelectionMode::Best => 0,
        SelectionMode::LthDegree(_) => 1,
        SelectionMode::MuAverage(_) => 2,
    };
    derive_seed(&[
        master,
        kind as u64,
        n as u64,
        c.to_bits(),
        lambda as u64,
        s.to_bits(),
        mode_tag,
        mode.parameter() as u64,
    ])
}

/// Runs Algorithm 1 for one cell and evaluates its error measures.
pub fn run_cell(ctx: &ReportContext, workers: usize) -> Result<ErrorReport> {
    let hessian = make_hessian(ctx.kind, ctx.n, ctx.c)?;
    let h = hessian.entries().clone();
    let objective = Objective::with_uniform_translation(hessian, ctx.translation_scale)?;
    let config = SampleConfig::new(objective, ctx.lambda, ctx.mode, ctx.iters, ctx.seed).with_workers(workers);
    let fin = run_sampling(&config)?.finalize()?;
    ErrorReport::evaluate(ctx.clone(), &h, &fin.covariance, fin.mean_distance)
}

/// Runs every cell; failures become rows with a status message.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ErrorReport>> {
    spec.validate()?;
    let rows = spec
        .cells()
        .into_iter()
        .map(|ctx| match run_cell(&ctx, spec.workers) {
            Ok(r) => r,
            Err(e) => ErrorReport::failed(ctx, format!("error: {e}")),
        })
        .collect();
    Ok(rows)
}

impl CsvRow for ErrorReport {
    const HEADER: &'static [&'static str] = &[
        "kind",
        "n",
        "c",
        "lambda",
        "mode",
        "ell_or_mu",
        "translation_scale",
        "iters",
        "seed",
        "e0",
        "e1",
        "e2",
        "commutator_frob",
        "alpha",
        "status",
    ];

    fn fields(&self) -> Vec<String> {
        let c = &self.context;
        vec![
            c.kind.label().to_string(),
            c.n.to_string(),
            fmt_float(c.c),
            c.lambda.to_string(),
            c.mode.name().to_string(),
            c.mode.parameter().to_string(),
            fmt_float(c.translation_scale),
            c.iters.to_string(),
            c.seed.to_string(),
            fmt_float(self.e0),
            fmt_float(self.e1),
            fmt_float(self.e2),
            fmt_float(self.commutator_frob),
            fmt_float(self.alpha),
            csv_text(&self.status),
        ]
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

/// e1/e2 statistics of I + E against one Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSummary {
    pub kind: HessianKind,
    pub n: usize,
    pub c: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub e1_mean: f64,
    pub e1_std: f64,
    pub e2_mean: f64,
    pub e2_std: f64,
    pub status: String,
}

impl CsvRow for PerturbationSummary {
    const HEADER: &'static [&'static str] = &[
        "kind", "n", "c", "epsilon", "trials", "e1_mean", "e1_std", "e2_mean", "e2_std", "status",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.kind.label().to_string(),
            self.n.to_string(),
            fmt_float(self.c),
            fmt_float(self.epsilon),
            self.trials.to_string(),
            fmt_float(self.e1_mean),
            fmt_float(self.e1_std),
            fmt_float(self.e2_mean),
            fmt_float(self.e2_std),
            csv_text(&self.status),
        ]
    }
}

#[derive(Default, Clone, Copy)]
struct RunningStat {
    count: f64,
    mean: f64,
    m2: f64,
}

impl RunningStat {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn std(&self) -> f64 {
        if self.count < 2.0 {
            0.0
        } else {
            (self.m2 / (self.count - 1.0)).sqrt()
        }
    }
}

/// Replaces the learned covariance by I + E and scores it against every
/// family at each condition number. The same random matrices are shared by
/// all (family, c) cells of one dimension.
pub fn run_perturbation_reference(
    n: usize,
    conds: &[f64],
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<PerturbationSummary>> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    if n < 2 {
        return Err(Error::dim("perturbation reference needs n >= 2"));
    }
    let mut cells = Vec::new();
    for kind in HessianKind::FAMILIES {
        for &c in conds {
            cells.push((kind, c, make_hessian(kind, n, c)));
        }
    }
    let mut stats = vec![(RunningStat::default(), RunningStat::default()); cells.len()];
    let mut rng = stream_rng(derive_seed(&[seed, n as u64]), 0);
    for _ in 0..trials {
        let m = perturbed_identity(&mut rng, n, epsilon)?;
        for ((_, _, h), (s1, s2)) in cells.iter().zip(stats.iter_mut()) {
            if let Ok(h) = h {
                let tilde = normalize_hc(h.entries(), &m)?;
                s1.push(e1(&tilde));
                s2.push(e2(&tilde)?);
            }
        }
    }
    Ok(cells
        .into_iter()
        .zip(stats)
        .map(|((kind, c, h), (s1, s2))| {
            let (status, ok) = match h {
                Ok(_) => ("ok".to_string(), true),
                Err(e) => (format!("error: {e}"), false),
            };
            let pick = |v: f64| if ok { v } else { f64::NAN };
            PerturbationSummary {
                kind,
                n,
                c,
                epsilon,
                trials,
                e1_mean: pick(s1.mean),
                e1_std: pick(s1.std()),
                e2_mean: pick(s2.mean),
                e2_std: pick(s2.std()),
                status,
            }
        })
        .collect())
}
