//! Statistical sampling by rank-based selection.
//!
//! Each iteration draws λ isotropic Gaussian mutations around the origin,
//! evaluates the translated quadratic objective, keeps the winner(s) and
//! feeds them to a streaming covariance accumulator.

mod accumulator;
pub mod rng;
mod select;

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

pub use accumulator::{merge, CovarianceAccumulator, Finalized};
pub use rng::{derive_seed, sample_population, stream_rng, StreamRng};
pub use select::select;

use crate::error::{Error, Result};
use crate::landscape::Objective;
use crate::matrix::Matrix;

/// Iterations per random stream. Streams are indexed by block, which is what
/// makes results independent of the worker count.
pub const BLOCK_ITERS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectionMode {
    /// The single best of λ.
    Best,
    /// The ℓth best of λ (1-based).
    LthDegree(usize),
    /// Average of the μ best of λ.
    MuAverage(usize),
}

impl SelectionMode {
    pub fn validate(self, lambda: usize) -> Result<()> {
        if lambda == 0 {
            return Err(Error::param("population size must be at least 1"));
        }
        match self {
            SelectionMode::Best => Ok(()),
            SelectionMode::LthDegree(k) | SelectionMode::MuAverage(k) if k >= 1 && k <= lambda => Ok(()),
            SelectionMode::LthDegree(k) => Err(Error::param(format!(
                "ell must satisfy 1 <= ell <= lambda, got ell={k}, lambda={lambda}"
            ))),
            SelectionMode::MuAverage(k) => Err(Error::param(format!(
                "mu must satisfy 1 <= mu <= lambda, got mu={k}, lambda={lambda}"
            ))),
        }
    }

    /// Short name used in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            SelectionMode::Best => "best",
            SelectionMode::LthDegree(_) => "ell",
            SelectionMode::MuAverage(_) => "mu",
        }
    }

    /// ℓ or μ; 1 for `Best`.
    pub fn parameter(self) -> usize {
        match self {
            SelectionMode::Best => 1,
            SelectionMode::LthDegree(k) | SelectionMode::MuAverage(k) => k,
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionMode::Best => f.write_str("best"),
            SelectionMode::LthDegree(k) => write!(f, "ell={k}"),
            SelectionMode::MuAverage(k) => write!(f, "mu={k}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub objective: Objective,
    pub lambda: usize,
    pub mode: SelectionMode,
    pub iters: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SampleConfig {
    pub fn new(objective: Objective, lambda: usize, mode: SelectionMode, iters: u64, seed: u64) -> Self {
        SampleConfig {
            objective,
            lambda,
            mode,
            iters,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.mode.validate(self.lambda)?;
        if self.iters == 0 {
            return Err(Error::param("iteration count must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::param("worker count must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one selection step.
#[derive(Debug, Clone, PartialEq)]
pub struct WinnerRecord {
    /// Winner, ℓth winner, or the average of the μ winners.
    pub vector: Vec<f64>,
    /// Its objective value (the mean of the μ values for `MuAverage`).
    pub value: f64,
    /// Euclidean distance of `vector` to the minimizer.
    pub distance: f64,
}

/// Reusable buffers for repeated iterations.
pub struct Sampler<'a> {
    objective: &'a Objective,
    lambda: usize,
    mode: SelectionMode,
    candidate: Vec<f64>,
    best: Vec<f64>,
    population: Vec<f64>,
    values: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(objective: &'a Objective, lambda: usize, mode: SelectionMode) -> Result<Self> {
        mode.validate(lambda)?;
        let n = objective.dim();
        let store_all = !matches!(mode, SelectionMode::Best);
        Ok(Sampler {
            objective,
            lambda,
            mode,
            candidate: vec![0.0; n],
            best: vec![0.0; n],
            population: if store_all { vec![0.0; lambda * n] } else { Vec::new() },
            values: if store_all { vec![0.0; lambda] } else { Vec::new() },
        })
    }

    /// Draws λ mutations and applies selection.
    pub fn iteration<R: Rng + ?Sized>(&mut self, rng: &mut R) -> WinnerRecord {
        let (vector, value) = match self.mode {
            SelectionMode::Best => self.best_of_lambda(rng),
            mode => self.by_rank(rng, mode),
        };
        let distance = self.objective.distance_to_minimizer(&vector);
        WinnerRecord {
            vector,
            value,
            distance,
        }
    }

    fn best_of_lambda<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (Vec<f64>, f64) {
        let mut best_value = f64::INFINITY;
        for _ in 0..self.lambda {
            rng::fill_standard_normal(rng, &mut self.candidate);
            let v = self.objective.eval_unchecked(&self.candidate);
            // Strict comparison keeps the earliest candidate on ties.
            if v < best_value {
                best_value = v;
                std::mem::swap(&mut self.best, &mut self.candidate);
            }
        }
        (self.best.clone(), best_value)
    }

    fn by_rank<R: Rng + ?Sized>(&mut self, rng: &mut R, mode: SelectionMode) -> (Vec<f64>, f64) {
        let n = self.objective.dim();
        for (row, value) in self.population.chunks_exact_mut(n).zip(self.values.iter_mut()) {
            rng::fill_standard_normal(rng, row);
            *value = self.objective.eval_unchecked(row);
        }
        let chosen = select(&self.values, mode).expect("mode validated at construction");
        let mut vector = vec![0.0; n];
        let mut value = 0.0;
        for &i in &chosen {
            for (acc, x) in vector.iter_mut().zip(&self.population[i * n..(i + 1) * n]) {
                *acc += x;
            }
            value += self.values[i];
        }
        let k = chosen.len() as f64;
        if chosen.len() > 1 {
            vector.iter_mut().for_each(|v| *v /= k);
        }
        (vector, value / k)
    }
}

/// One iteration of the sampling loop.
pub fn run_iteration<R: Rng + ?Sized>(config: &SampleConfig, rng: &mut R) -> Result<WinnerRecord> {
    let mut sampler = Sampler::new(&config.objective, config.lambda, config.mode)?;
    Ok(sampler.iteration(rng))
}

fn run_block(config: &SampleConfig, block: u64) -> CovarianceAccumulator {
    let mut rng = stream_rng(config.seed, block);
    let mut sampler =
        Sampler::new(&config.objective, config.lambda, config.mode).expect("config validated");
    let mut acc = CovarianceAccumulator::new(config.objective.dim());
    let start = block * BLOCK_ITERS;
    let end = (start + BLOCK_ITERS).min(config.iters);
    for _ in start..end {
        let rec = sampler.iteration(&mut rng);
        acc.push(&rec.vector, rec.distance);
    }
    acc
}

/// Runs `config.iters` iterations and returns the pooled accumulator.
///
/// Iterations are cut into blocks of [`BLOCK_ITERS`], each with its own
/// stream; block accumulators are merged in block order, so the result is
/// bit-identical for any worker count.
pub fn run_sampling(config: &SampleConfig) -> Result<CovarianceAccumulator> {
    config.validate()?;
    let blocks = config.iters.div_ceil(BLOCK_ITERS);
    let parts: Vec<CovarianceAccumulator> = if config.workers == 1 {
        (0..blocks).map(|b| run_block(config, b)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..blocks).into_par_iter().map(|b| run_block(config, b)).collect())
    };
    let mut total = CovarianceAccumulator::new(config.objective.dim());
    for part in &parts {
        total = total.merge(part)?;
    }
    Ok(total)
}

/// I + E with E symmetric and its upper triangle i.i.d. N(0, ε²).
pub fn perturbed_identity<R: Rng + ?Sized>(rng: &mut R, n: usize, epsilon: f64) -> Result<Matrix> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::param(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in i..n {
            let e: f64 = epsilon * rng.sample::<f64, _>(rand_distr::StandardNormal);
            m[(i, j)] += e;
            if i != j {
                m[(j, i)] = e;
            }
        }
    }
    Ok(m)
}
