//! Special functions and P-value bookkeeping shared by every test.

mod pvalue;
pub mod quad;
mod special;

pub use pvalue::{
    chi2_pvalue, chi2_pvalue_at, erfc_pvalue, erfc_pvalue_at, proportion_check, proportion_interval, pvalue_uniformity,
    BatchProportion, PValue, ProportionInterval, Uniformity, DEFAULT_ALPHA, UNIFORMITY_MIN_SAMPLES,
    UNIFORMITY_THRESHOLD,
};
pub use special::{
    erf, erfc, expint_e1, incomplete_gamma_p, incomplete_gamma_q, ln_gamma, normal_cdf, zeta, EULER_GAMMA,
};
