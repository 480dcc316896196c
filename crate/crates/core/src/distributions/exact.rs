//! Exact CDF of ψ = Σ Δⱼ χ²₁ by numerical inversion of its characteristic
//! function φ(t) = Π (1 − 2iΔⱼt)^{−1/2}.
//!
//! For a nonnegative variable,
//!
//! ```text
//! F(ψ) = (2/π) ∫₀^∞ sin(tψ/2)/t · cos(θ(t) − tψ/2) / ρ(t) dt
//! θ(t) = ½ Σ atan(2Δⱼt),   ρ(t) = Π (1 + 4Δⱼ²t²)^{1/4}
//! ```
//!
//! Expanding sin·cos, the non-oscillating half integrates to exactly π/2
//! (it is the same integral evaluated at ψ = 0, where F vanishes). What is
//! left is the Gil–Pelaez form
//!
//! ```text
//! F(ψ) = ½ − (1/π) ∫₀^∞ sin(θ(t) − tψ) / (t ρ(t)) dt,
//! ```
//!
//! whose integrand oscillates with half-period → π/ψ and is bounded by the
//! envelope 1/(t ρ(t)). The head up to the first asymptotic zero is handled
//! by adaptive Gauss–Kronrod; after that the integral is summed one
//! half-period panel at a time until a panel's envelope bound falls below
//! `envelope_tol`, and the last two partial sums are averaged (the tail is
//! an alternating series).

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

#[derive(Debug, Clone, Copy)]
pub struct ExactChi2Options {
    /// Stop once a half-period panel's envelope bound is below this.
    pub envelope_tol: f64,
    /// Absolute quadrature tolerance per panel.
    pub panel_tol: f64,
    pub max_panels: usize,
}

impl Default for ExactChi2Options {
    fn default() -> Self {
        ExactChi2Options {
            envelope_tol: 1e-8,
            panel_tol: 1e-12,
            max_panels: 2_000_000,
        }
    }
}

struct Integrand<'a> {
    spectrum: &'a [f64],
    psi: f64,
}

impl Integrand<'_> {
    fn theta_and_ln_rho(&self, t: f64) -> (f64, f64) {
        let mut theta = 0.0;
        let mut ln_rho = 0.0;
        for &d in self.spectrum {
            let x = 2.0 * d * t;
            theta += 0.5 * x.atan();
            ln_rho += 0.25 * (x * x).ln_1p();
        }
        (theta, ln_rho)
    }

    fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return self.spectrum.iter().sum::<f64>() - self.psi;
        }
        let (theta, ln_rho) = self.theta_and_ln_rho(t);
        (theta - t * self.psi).sin() / t * (-ln_rho).exp()
    }

    fn envelope(&self, t: f64) -> f64 {
        let (_, ln_rho) = self.theta_and_ln_rho(t);
        (-ln_rho).exp() / t
    }
}

/// Exact generalized χ² CDF with default accuracy settings.
pub fn cdf_exact_gen_chi2(psi: f64, spectrum: &[f64]) -> Result<f64> {
    cdf_exact_gen_chi2_with(psi, spectrum, &ExactChi2Options::default())
}

pub fn cdf_exact_gen_chi2_with(psi: f64, spectrum: &[f64], opts: &ExactChi2Options) -> Result<f64> {
    if !(psi >= 0.0) || !psi.is_finite() {
        return Err(Error::domain(format!("value must be finite and >= 0, got {psi}")));
    }
    if spectrum.is_empty() || spectrum.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::param("spectrum must be non-empty and strictly positive"));
    }
    if psi == 0.0 {
        return Ok(0.0);
    }

    let f = Integrand { spectrum, psi };
    let tol = Tolerance {
        abs: opts.panel_tol,
        rel: 0.0,
        max_intervals: 4000,
    };
    let theta_inf = spectrum.len() as f64 * FRAC_PI_4;
    let half_period = PI / psi;
    let zero = |k: usize| (k as f64 * PI + theta_inf) / psi;

    let head = integrate(|t| f.eval(t), 0.0, zero(1), tol)?;
    let mut sum = head.value;
    let mut quad_err = head.error;
    let mut prev_sum;
    let mut k = 1;
    loop {
        if k > opts.max_panels {
            return Err(Error::NonConvergence {
                what: "generalized chi-square tail",
                estimate: half_period * f.envelope(zero(k)) / PI,
            });
        }
        let (a, b) = (zero(k), zero(k + 1));
        let panel = integrate(|t| f.eval(t), a, b, tol)?;
        prev_sum = sum;
        sum += panel.value;
        quad_err += panel.error;
        k += 1;
        if half_period * f.envelope(b) / PI < opts.envelope_tol {
            break;
        }
    }
    let integral = 0.5 * (sum + prev_sum);
    let cdf = 0.5 - integral / PI;
    if quad_err / PI > 1e3 * opts.envelope_tol {
        return Err(Error::NonConvergence {
            what: "generalized chi-square quadrature",
            estimate: quad_err / PI,
        });
    }
    Ok(cdf.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn zero_and_closed_forms() {
        assert_eq!(cdf_exact_gen_chi2(0.0, &[1.0, 1.0]).unwrap(), 0.0);
        let f = cdf_exact_gen_chi2(2.0, &[1.0, 1.0]).unwrap();
        assert!((f - (1.0 - (-1.0f64).exp())).abs() < 1e-6, "{f}");
        let f = cdf_exact_gen_chi2(4.0, &[1.0; 4]).unwrap();
        let closed = 1.0 - (-2.0f64).exp() * 3.0;
        assert!((f - closed).abs() < 1e-6, "{f} vs {closed}");
        assert!((f - 0.5939942).abs() < 1e-6);
    }

    #[test]
    fn scaled_chi_square() {
        // 3·χ²₃ evaluated at ψ equals the χ²₃ CDF at ψ/3.
        let chi3 = ChiSquared::new(3.0).unwrap();
        for psi in [0.05, 0.9, 4.0, 11.0, 40.0] {
            let f = cdf_exact_gen_chi2(psi, &[3.0; 3]).unwrap();
            assert!((f - chi3.cdf(psi / 3.0)).abs() < 1e-6, "psi={psi}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(cdf_exact_gen_chi2(-1.0, &[1.0]).is_err());
        assert!(cdf_exact_gen_chi2(1.0, &[]).is_err());
        assert!(cdf_exact_gen_chi2(1.0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = ExactChi2Options {
            max_panels: 3,
            ..ExactChi2Options::default()
        };
        let err = cdf_exact_gen_chi2_with(1.0, &[1.0], &opts).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }
}
