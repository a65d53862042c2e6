//! Estimators applied to recorded price paths. All of them are
//! deterministic given their inputs (and an explicit seed where resampling
//! is involved).

pub mod autocorr;
pub mod collapse;
pub mod fit;
pub mod histogram;
pub mod hurst;
pub mod interevent;
pub mod series;

pub use autocorr::{abs_return_autocorrelation, abs_return_noise, decay_window, log_lags, return_autocorrelation};
pub use collapse::{collapse_error, collapse_noise_floor, fit_scale, log_concave_beyond_mode, scaling_factor_bps};
pub use fit::{
    compare_decay_models, hill_tail, linear_fit, log_quadratic_fit, plateau_decay_window, power_law_cutoff_test,
    powerlaw_slope,
};
pub use histogram::{return_distribution, Binning, Histogram, ReturnMode};
pub use hurst::{hurst_normalized, hurst_simplified, WindowLayout};
pub use interevent::{interevent_statistics, ks_exponential};
pub use series::{MergeRule, StatPoint, StatSeries};

use crate::error::StatsError;

/// Mean of `v` over the index window `[from, to)`.
pub fn mean_volatility(v: &[f64], from: usize, to: usize) -> Result<f64, StatsError> {
    let to = to.min(v.len());
    if from >= to {
        return Err(StatsError::EmptyWindow);
    }
    Ok(v[from..to].iter().sum::<f64>() / (to - from) as f64)
}

/// Mean absolute value of integer samples.
pub fn mean_abs(values: &[u64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}
