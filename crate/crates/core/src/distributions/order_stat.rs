//! Laws of the winning value ω = min ψ₁…ψ_λ and, more generally, of the
//! ℓth smallest of λ i.i.d. values, on top of the gamma approximation.

use statrs::function::factorial::ln_binomial;

use super::gamma_approx::{quantile_by_bisection, GammaApprox};
use crate::error::{Error, Result};

/// Distribution of the ℓth-degree winning value among `lambda` competitors.
/// `ell = 1` is the plain (1,λ) winner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinnerValueDist {
    pub base: GammaApprox,
    pub lambda: u64,
    pub ell: u64,
}

impl WinnerValueDist {
    pub fn new(base: GammaApprox, lambda: u64, ell: u64) -> Result<Self> {
        check_degree(ell, lambda)?;
        Ok(WinnerValueDist { base, lambda, ell })
    }

    pub fn cdf(&self, v: f64) -> Result<f64> {
        order_stat_cdf(v, self.ell, self.lambda, &self.base)
    }

    pub fn pdf(&self, v: f64) -> Result<f64> {
        order_stat_pdf(v, self.ell, self.lambda, &self.base)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let hi = self.base.quantile(0.5)?.max(1e-12);
        quantile_by_bisection(|x| self.cdf(x), p, hi)
    }
}

fn check_degree(ell: u64, lambda: u64) -> Result<()> {
    if lambda == 0 || ell == 0 || ell > lambda {
        return Err(Error::param(format!(
            "degree must satisfy 1 <= ell <= lambda, got ell={ell}, lambda={lambda}"
        )));
    }
    Ok(())
}

fn check_value(v: f64) -> Result<()> {
    if !(v >= 0.0) {
        return Err(Error::domain(format!("value must be >= 0, got {v}")));
    }
    Ok(())
}

/// ln F and ln(1 − F), each taken from whichever side is accurate.
fn log_cdf_sf(base: &GammaApprox, v: f64) -> Result<(f64, f64)> {
    let (p, q) = base.cdf_sf(v)?;
    let ln_p = if p < 0.5 { p.ln() } else { (-q).ln_1p() };
    let ln_q = if p < 0.5 { (-p).ln_1p() } else { q.ln() };
    Ok((ln_p, ln_q))
}

/// 1 − (1 − F(v))^λ.
pub fn winner_value_cdf(v: f64, dist: &WinnerValueDist) -> Result<f64> {
    check_value(v)?;
    let (_, ln_q) = log_cdf_sf(&dist.base, v)?;
    Ok(-(dist.lambda as f64 * ln_q).exp_m1())
}

/// λ (1 − F(v))^{λ−1} f(v).
pub fn winner_value_pdf(v: f64, dist: &WinnerValueDist) -> Result<f64> {
    check_value(v)?;
    let f = dist.base.pdf(v)?;
    if f == 0.0 || f.is_infinite() {
        return Ok(f);
    }
    let (_, ln_q) = log_cdf_sf(&dist.base, v)?;
    let lambda = dist.lambda as f64;
    Ok((lambda.ln() + (lambda - 1.0) * ln_q + dist.base.ln_pdf(v)).exp())
}

/// Σ_{k=ℓ}^{λ} C(λ,k) F^k (1−F)^{λ−k}, summed in log space from k = ℓ
/// upward via the term ratio, stopping once past the mode and negligible.
pub fn order_stat_cdf(v: f64, ell: u64, lambda: u64, base: &GammaApprox) -> Result<f64> {
    check_degree(ell, lambda)?;
    check_value(v)?;
    let (ln_p, ln_q) = log_cdf_sf(base, v)?;
    if ln_p == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if ln_q == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    let ratio = ln_p - ln_q;
    let mode = (lambda as f64 + 1.0) * ln_p.exp();
    let mut ln_term = ln_binomial(lambda, ell) + ell as f64 * ln_p + (lambda - ell) as f64 * ln_q;
    let anchor = ln_term;
    let mut scaled = 0.0;
    let mut k = ell;
    loop {
        let rel = (ln_term - anchor).exp();
        scaled += rel;
        if k == lambda || (k as f64 > mode && rel < 1e-18 * scaled) {
            break;
        }
        ln_term += ((lambda - k) as f64).ln() - ((k + 1) as f64).ln() + ratio;
        k += 1;
    }
    Ok((anchor + scaled.ln()).exp().min(1.0))
}

/// λ f(v) C(λ−1, ℓ−1) F^{ℓ−1} (1−F)^{λ−ℓ}.
pub fn order_stat_pdf(v: f64, ell: u64, lambda: u64, base: &GammaApprox) -> Result<f64> {
    check_degree(ell, lambda)?;
    check_value(v)?;
    let f = base.pdf(v)?;
    if f == 0.0 {
        return Ok(0.0);
    }
    if v == 0.0 {
        // F(0) = 0: only the first order statistic keeps mass at the origin.
        return Ok(if ell == 1 { lambda as f64 * f } else { 0.0 });
    }
    let (ln_p, ln_q) = log_cdf_sf(base, v)?;
    let pow = |e: u64, ln: f64| if e == 0 { 0.0 } else { e as f64 * ln };
    let ln = (lambda as f64).ln()
        + base.ln_pdf(v)
        + ln_binomial(lambda - 1, ell - 1)
        + pow(ell - 1, ln_p)
        + pow(lambda - ell, ln_q);
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
    use proptest::prelude::*;

    const EXPO: GammaApprox = GammaApprox { upsilon: 0.5, eta: 1.0 };

    fn winner(base: GammaApprox, lambda: u64) -> WinnerValueDist {
        WinnerValueDist::new(base, lambda, 1).unwrap()
    }

    /// Binomial tail by direct summation, for small λ.
    fn brute_cdf(f: f64, ell: u64, lambda: u64) -> f64 {
        let mut total = 0.0;
        for k in ell..=lambda {
            let mut c = 1.0;
            for j in 0..k {
                c *= (lambda - j) as f64 / (j + 1) as f64;
            }
            total += c * f.powi(k as i32) * (1.0 - f).powi((lambda - k) as i32);
        }
        total
    }

    #[test]
    fn winner_pdf_examples() {
        let base = GammaApprox { upsilon: 0.3, eta: 2.5 };
        for v in [0.1, 1.0, 7.0] {
            assert!((winner_value_pdf(v, &winner(base, 1)).unwrap() - base.pdf(v).unwrap()).abs() < 1e-15);
        }
        let median = base.quantile(0.5).unwrap();
        let w = winner_value_pdf(median, &winner(base, 2)).unwrap();
        assert!((w / base.pdf(median).unwrap() - 1.0).abs() < 1e-10);
        let w = winner_value_pdf(1.0, &winner(EXPO, 3)).unwrap();
        assert!((w - 1.5 * (-1.5f64).exp()).abs() < 1e-14);
        assert!((w - 0.3346952).abs() < 1e-7);
    }

    #[test]
    fn winner_cdf_examples() {
        assert_eq!(winner_value_cdf(0.0, &winner(EXPO, 5)).unwrap(), 0.0);
        let base = GammaApprox { upsilon: 0.3, eta: 2.5 };
        for v in [0.1, 1.0, 7.0] {
            let a = winner_value_cdf(v, &winner(base, 1)).unwrap();
            assert!((a - base.cdf(v).unwrap()).abs() < 1e-14);
        }
        let c = winner_value_cdf(2.0, &winner(EXPO, 4)).unwrap();
        assert!((c - (1.0 - (-4.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn winner_pdf_integrates_to_one_and_matches_cdf() {
        let base = GammaApprox { upsilon: 13.0 / 206.0, eta: 169.0 / 206.0 };
        for lambda in [1u64, 10, 1000] {
            let dist = winner(base, lambda);
            let split = dist.quantile(0.5).unwrap();
            let tol = Tolerance { abs: 1e-10, rel: 0.0, max_intervals: 5000 };
            let head = integrate(|x| dist.pdf(x).unwrap(), 0.0, split, tol).unwrap();
            let tail = integrate_to_infinity(|x| dist.pdf(x).unwrap(), split, tol).unwrap();
            assert!((head.value + tail.value - 1.0).abs() < 1e-6, "lambda={lambda}");
            assert!((head.value - dist.cdf(split).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn order_stat_examples() {
        let base = GammaApprox { upsilon: 0.4, eta: 3.0 };
        for v in [0.2, 2.0, 9.0] {
            let a = order_stat_cdf(v, 1, 7, &base).unwrap();
            let b = winner_value_cdf(v, &winner(base, 7)).unwrap();
            assert!((a - b).abs() < 1e-14);
            let a = order_stat_pdf(v, 1, 7, &base).unwrap();
            let b = winner_value_pdf(v, &winner(base, 7)).unwrap();
            assert!((a / b - 1.0).abs() < 1e-12);
            let f = base.cdf(v).unwrap();
            assert!((order_stat_cdf(v, 7, 7, &base).unwrap() - f.powi(7)).abs() < 1e-14);
        }
        let median = base.quantile(0.5).unwrap();
        assert!((order_stat_cdf(median, 2, 3, &base).unwrap() - 0.5).abs() < 1e-12);
        assert!(order_stat_cdf(1.0, 4, 3, &base).is_err());
        assert!(order_stat_pdf(1.0, 0, 3, &base).is_err());
    }

    #[test]
    fn order_stat_cdf_matches_direct_sum() {
        let base = GammaApprox { upsilon: 0.5, eta: 2.0 };
        for lambda in [1u64, 2, 5, 12, 30] {
            for ell in 1..=lambda {
                for v in [0.05, 0.7, 3.0, 12.0] {
                    let f = base.cdf(v).unwrap();
                    let got = order_stat_cdf(v, ell, lambda, &base).unwrap();
                    assert!((got - brute_cdf(f, ell, lambda)).abs() < 1e-12, "l={lambda} k={ell} v={v}");
                }
            }
        }
    }

    #[test]
    fn order_stat_pdf_is_derivative_of_cdf() {
        let base = GammaApprox { upsilon: 21.0 / 402.0, eta: 441.0 / 402.0 };
        for (ell, lambda) in [(1u64, 10u64), (2, 100), (5, 1000), (3, 3)] {
            let d = WinnerValueDist::new(base, lambda, ell).unwrap();
            for q in [0.2, 0.5, 0.8] {
                let v = d.quantile(q).unwrap();
                let h = 1e-5 * v;
                let fd = (d.cdf(v + h).unwrap() - d.cdf(v - h).unwrap()) / (2.0 * h);
                assert!((fd / d.pdf(v).unwrap() - 1.0).abs() < 1e-6, "ell={ell} lambda={lambda}");
            }
        }
    }

    #[test]
    fn large_population_stays_finite() {
        let base = GammaApprox { upsilon: 0.5, eta: 32.0 };
        let d = WinnerValueDist::new(base, 1_000_000, 2).unwrap();
        let v = d.quantile(0.5).unwrap();
        assert!(v > 0.0 && v.is_finite());
        let pdf = d.pdf(v).unwrap();
        assert!(pdf.is_finite() && pdf > 0.0);
        // Far in the tail everything has been beaten long ago.
        assert_eq!(winner_value_pdf(200.0, &WinnerValueDist::new(base, 1_000_000, 1).unwrap()).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn stochastic_dominance_in_lambda(lambda in 1u64..500, v in 0.0f64..60.0) {
            let base = GammaApprox { upsilon: 0.25, eta: 2.2 };
            let a = winner_value_cdf(v, &winner(base, lambda)).unwrap();
            let b = winner_value_cdf(v, &winner(base, lambda + 1)).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn order_stat_densities_telescope(lambda in 1u64..60, v in 0.01f64..40.0) {
            let base = GammaApprox { upsilon: 0.3, eta: 1.7 };
            let total: f64 = (1..=lambda).map(|l| order_stat_pdf(v, l, lambda, &base).unwrap()).sum();
            let expect = lambda as f64 * base.pdf(v).unwrap();
            prop_assert!((total - expect).abs() <= 1e-8 * expect.max(1.0));
        }
    }
}
