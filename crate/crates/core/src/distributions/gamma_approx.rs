use statrs::function::gamma::ln_gamma;

use super::special::incomplete_gamma_pair;
use crate::error::{Error, Result};

/// Gamma law with rate `upsilon` and shape `eta`, moment-matched to a
/// positive quadratic form: mean ΣΔᵢ, variance 2ΣΔᵢ².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaApprox {
    pub upsilon: f64,
    pub eta: f64,
}

/// Υ = ½ ΣΔ / ΣΔ², η = ½ (ΣΔ)² / ΣΔ².
pub fn gamma_params(sum: f64, sum_sq: f64) -> Result<GammaApprox> {
    if !(sum > 0.0 && sum_sq > 0.0) || !sum.is_finite() || !sum_sq.is_finite() {
        return Err(Error::param(format!(
            "spectrum sums must be positive, got ({sum}, {sum_sq})"
        )));
    }
    Ok(GammaApprox {
        upsilon: 0.5 * sum / sum_sq,
        eta: 0.5 * sum * sum / sum_sq,
    })
}

impl GammaApprox {
    pub fn from_spectrum(spectrum: &[f64]) -> Result<Self> {
        let (s1, s2) = spectrum
            .iter()
            .fold((0.0, 0.0), |(a, b), &d| (a + d, b + d * d));
        gamma_params(s1, s2)
    }

    pub fn mean(&self) -> f64 {
        self.eta / self.upsilon
    }

    pub fn variance(&self) -> f64 {
        self.eta / (self.upsilon * self.upsilon)
    }

    pub fn cdf(&self, psi: f64) -> Result<f64> {
        self.cdf_sf(psi).map(|(p, _)| p)
    }

    /// (CDF, survival) evaluated without cancellation on either side.
    pub fn cdf_sf(&self, psi: f64) -> Result<(f64, f64)> {
        if !(psi >= 0.0) {
            return Err(Error::domain(format!("value must be >= 0, got {psi}")));
        }
        incomplete_gamma_pair(self.eta, self.upsilon * psi)
    }

    /// Density on [0, ∞). At ψ = 0 the density is 0 for η > 1, Υ for η = 1
    /// and +∞ for η < 1.
    pub fn pdf(&self, psi: f64) -> Result<f64> {
        if !(psi >= 0.0) {
            return Err(Error::domain(format!("value must be >= 0, got {psi}")));
        }
        if psi == 0.0 {
            return Ok(match self.eta.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => 0.0,
                Some(std::cmp::Ordering::Equal) => self.upsilon,
                _ => f64::INFINITY,
            });
        }
        Ok(self.ln_pdf(psi).exp())
    }

    pub(crate) fn ln_pdf(&self, psi: f64) -> f64 {
        self.eta * self.upsilon.ln() + (self.eta - 1.0) * psi.ln()
            - self.upsilon * psi
            - ln_gamma(self.eta)
    }

    /// Smallest ψ with CDF(ψ) ≥ p, by bracketing and bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        quantile_by_bisection(|x| self.cdf(x), p, self.mean() + 10.0 * self.variance().sqrt())
    }
}

/// F_τχ²(ψ) = P(η, Υψ).
pub fn cdf_tau_chi2(psi: f64, params: &GammaApprox) -> Result<f64> {
    params.cdf(psi)
}

/// f_τχ²(ψ) = Υ^η / Γ(η) · ψ^{η−1} e^{−Υψ}.
pub fn pdf_tau_chi2(psi: f64, params: &GammaApprox) -> Result<f64> {
    params.pdf(psi)
}

/// Inverts a continuous nondecreasing CDF on [0, ∞).
pub(crate) fn quantile_by_bisection<F>(cdf: F, p: f64, initial_hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability must lie in [0, 1], got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let mut hi = initial_hi.max(f64::MIN_POSITIVE);
    while cdf(hi)? < p {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("quantile bracket overflowed"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
