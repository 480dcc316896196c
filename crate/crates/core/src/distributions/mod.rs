//! Value distributions of a single mutation and of selected winners.
//!
//! The single-mutation value ψ = zᵀHz is a generalized χ² variable. The
//! winner machinery uses the moment-matched gamma law ([`GammaApprox`]);
//! the exact CDF in [`exact`] exists for accuracy audits.

pub mod exact;
mod gamma_approx;
mod order_stat;
pub mod special;

pub use exact::{cdf_exact_gen_chi2, ExactChi2Options};
pub use gamma_approx::{cdf_tau_chi2, gamma_params, pdf_tau_chi2, GammaApprox};
pub use order_stat::{
    order_stat_cdf, order_stat_pdf, winner_value_cdf, winner_value_pdf, WinnerValueDist,
};
pub use special::{regularized_lower_gamma, regularized_upper_gamma};
