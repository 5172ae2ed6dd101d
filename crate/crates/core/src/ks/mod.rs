//! Kolmogorov statistic, its null law, critical values and the DKW bound.

mod ecdf;
mod null_law;

pub use ecdf::{empirical_statistic, two_sample_statistic, EmpiricalCdf, TestDecision};
pub(crate) use ecdf::statistic_unchecked;
pub use null_law::{
    critical_value, dkw_bound, dkw_bound_raw, exact_null_cdf, kolmogorov_cdf_asymptotic, kolmogorov_quantile,
    null_cdf, CriticalValue, NullCdf, NullLawMethod, EXACT_MAX_N,
};

use crate::error::Result;

/// Kolmogorov test of `sample` against uniformity on `[e1, e2]` at level `alpha`.
pub fn kolmogorov_test(sample: &EmpiricalCdf, alpha: f64, e1: f64, e2: f64) -> Result<TestDecision> {
    let statistic = sample.statistic(e1, e2)?;
    let critical = critical_value(sample.n(), alpha)?;
    Ok(TestDecision::new(statistic, critical.value, alpha))
}
