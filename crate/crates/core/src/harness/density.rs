//! Empirical value distributions against their analytic references.

use crate::distributions::{GammaApprox, WinnerValueDist};
use crate::error::{Error, Result};
use crate::landscape::{make_hessian, HessianKind, Objective};
use crate::sampling::{derive_seed, stream_rng, Sampler, SelectionMode};

use super::csv::{fmt_float, CsvRow};

/// Equal-mass binning of a sample against a reference distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` strictly increasing boundaries; the last is +∞.
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    /// Reference probability of each bin as a CDF difference.
    pub analytic_masses: Vec<f64>,
}

/// One histogram bin, for CSV output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub empirical_mass: f64,
    pub analytic_mass: f64,
}

impl CsvRow for HistogramBin {
    const HEADER: &'static [&'static str] = &["bin_lo", "bin_hi", "empirical_mass", "analytic_mass"];

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_float(self.lo),
            fmt_float(self.hi),
            fmt_float(self.empirical_mass),
            fmt_float(self.analytic_mass),
        ]
    }
}

impl Histogram {
    /// Bins `samples` at the reference quantiles k/bins, k = 0…bins.
    pub fn equal_mass<C, Q>(samples: &[f64], bins: usize, cdf: C, quantile: Q) -> Result<Self>
    where
        C: Fn(f64) -> Result<f64>,
        Q: Fn(f64) -> Result<f64>,
    {
        if bins == 0 || samples.is_empty() {
            return Err(Error::param("histogram needs at least one bin and one sample"));
        }
        let mut edges = Vec::with_capacity(bins + 1);
        edges.push(0.0);
        for k in 1..bins {
            let e = quantile(k as f64 / bins as f64)?;
            if e <= *edges.last().expect("non-empty") {
                return Err(Error::domain("reference quantiles are not strictly increasing"));
            }
            edges.push(e);
        }
        edges.push(f64::INFINITY);

        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let total = sorted.len() as f64;
        let mut masses = Vec::with_capacity(bins);
        let mut analytic_masses = Vec::with_capacity(bins);
        let mut prev_count = 0usize;
        let mut prev_cdf = 0.0;
        for &hi in &edges[1..] {
            let count = if hi.is_infinite() {
                sorted.len()
            } else {
                sorted.partition_point(|&x| x < hi)
            };
            masses.push((count - prev_count) as f64 / total);
            prev_count = count;
            let c = if hi.is_infinite() { 1.0 } else { cdf(hi)? };
            analytic_masses.push(c - prev_cdf);
            prev_cdf = c;
        }
        Ok(Histogram {
            edges,
            masses,
            analytic_masses,
        })
    }

    pub fn bins(&self) -> Vec<HistogramBin> {
        self.edges
            .windows(2)
            .zip(self.masses.iter().zip(&self.analytic_masses))
            .map(|(e, (&m, &a))| HistogramBin {
                lo: e[0],
                hi: e[1],
                empirical_mass: m,
                analytic_mass: a,
            })
            .collect()
    }
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and
/// a continuous reference CDF.
pub fn ks_distance<C>(samples: &[f64], cdf: C) -> Result<f64>
where
    C: Fn(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(Error::param("KS distance needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityParams {
    pub kind: HessianKind,
    pub n: usize,
    pub c: f64,
    pub lambda: usize,
    /// Degree of the recorded winner; 1 is the plain (1,λ) winner.
    pub ell: usize,
    /// Single-mutation values drawn for the ψ histogram.
    pub samples: usize,
    /// λ-competitions run for the ω histogram.
    pub competitions: usize,
    pub bins: usize,
    pub seed: u64,
}

impl DensityParams {
    pub fn new(kind: HessianKind, n: usize, c: f64, lambda: usize, samples: usize, seed: u64) -> Self {
        DensityParams {
            kind,
            n,
            c,
            lambda,
            ell: 1,
            samples,
            competitions: samples.min(10_000),
            bins: 80,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub gamma: GammaApprox,
    pub psi: Histogram,
    pub omega: Histogram,
    pub ks_psi: f64,
    pub ks_omega: f64,
    pub psi_samples: Vec<f64>,
    pub omega_samples: Vec<f64>,
}

/// Draws single-mutation values ψ = zᵀHz and ℓth-degree winning values
/// among λ at the optimum, and compares each against the gamma
/// approximation and its order-statistic law.
pub fn density_experiment(p: &DensityParams) -> Result<DensityReport> {
    if p.samples < 1000 {
        return Err(Error::param(format!("need at least 1000 samples, got {}", p.samples)));
    }
    if p.competitions == 0 {
        return Err(Error::param("need at least one competition"));
    }
    let hessian = make_hessian(p.kind, p.n, p.c)?;
    let gamma = GammaApprox::from_spectrum(hessian.spectrum())?;
    let winner = WinnerValueDist::new(gamma, p.lambda as u64, p.ell as u64)?;
    let objective = Objective::centered(hessian);
    let seed = derive_seed(&[p.seed, p.kind as u64, p.n as u64, p.c.to_bits(), p.lambda as u64, p.ell as u64]);

    let mut single = Sampler::new(&objective, 1, SelectionMode::Best)?;
    let mut rng = stream_rng(seed, 0);
    let psi_samples: Vec<f64> = (0..p.samples).map(|_| single.iteration(&mut rng).value).collect();

    let mode = if p.ell == 1 {
        SelectionMode::Best
    } else {
        SelectionMode::LthDegree(p.ell)
    };
    let mut competition = Sampler::new(&objective, p.lambda, mode)?;
    let mut rng = stream_rng(seed, 1);
    let omega_samples: Vec<f64> = (0..p.competitions)
        .map(|_| competition.iteration(&mut rng).value)
        .collect();

    let psi = Histogram::equal_mass(&psi_samples, p.bins, |x| gamma.cdf(x), |q| gamma.quantile(q))?;
    let omega = Histogram::equal_mass(&omega_samples, p.bins, |x| winner.cdf(x), |q| winner.quantile(q))?;
    let ks_psi = ks_distance(&psi_samples, |x| gamma.cdf(x))?;
    let ks_omega = ks_distance(&omega_samples, |x| winner.cdf(x))?;
    Ok(DensityReport {
        gamma,
        psi,
        omega,
        ks_psi,
        ks_omega,
        psi_samples,
        omega_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_distance_of_uniform_grid() {
        let samples: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let d = ks_distance(&samples, |x| Ok(x.clamp(0.0, 1.0))).unwrap();
        assert!((d - 0.05).abs() < 1e-15);
        assert!(ks_distance(&[], Ok).is_err());
    }

    #[test]
    fn histogram_masses_sum_to_one() {
        let g = GammaApprox { upsilon: 13.0 / 206.0, eta: 169.0 / 206.0 };
        let samples: Vec<f64> = (1..500).map(|i| g.quantile(i as f64 / 500.0).unwrap()).collect();
        let h = Histogram::equal_mass(&samples, 20, |x| g.cdf(x), |q| g.quantile(q)).unwrap();
        assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((h.analytic_masses.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for a in &h.analytic_masses {
            assert!((a - 0.05).abs() < 1e-9);
        }
        assert_eq!(h.bins().len(), 20);
    }

    #[test]
    fn identity_hessian_matches_chi_square() {
        let p = DensityParams::new(HessianKind::Ellipse, 6, 1.0, 10, 100_000, 3);
        let r = density_experiment(&p).unwrap();
        assert_eq!((r.gamma.upsilon, r.gamma.eta), (0.5, 3.0));
        assert!(r.ks_psi <= 0.01, "ks {}", r.ks_psi);
    }

    #[test]
    fn no_selection_reproduces_single_values() {
        let mut p = DensityParams::new(HessianKind::Ellipse, 4, 1.0, 1, 5000, 8);
        p.competitions = 5000;
        let r = density_experiment(&p).unwrap();
        // With λ = 1 both laws coincide and both samples pass the same test.
        for (a, b) in r.psi.edges.iter().zip(&r.omega.edges) {
            assert!(a == b || (a - b).abs() <= 1e-12 * a.abs(), "{a} vs {b}");
        }
        assert!(r.ks_omega <= 1.63 / (5000f64).sqrt());
    }

    #[test]
    fn rejects_small_samples() {
        let p = DensityParams::new(HessianKind::Discus, 4, 10.0, 10, 10, 8);
        assert!(density_experiment(&p).is_err());
    }
}
