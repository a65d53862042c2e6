//! Range statistics of the price over windows of length `lag`.
//!
//! A window of lag `Δ` spans `Δ + 1` samples `x[t..=t+Δ]`. The simplified
//! statistic is the mean of `max - min` over windows; the normalized one
//! divides each range by the standard deviation of the `Δ` returns inside
//! the window and skips windows whose returns do not vary.

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::par;
use crate::path::PricePath;
use crate::stats::series::StatSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowLayout {
    /// Consecutive windows share only their boundary sample.
    #[default]
    Disjoint,
    /// Windows start every `max(1, lag / 4)` samples.
    Overlapping,
}

impl WindowLayout {
    fn stride(self, lag: usize) -> usize {
        match self {
            WindowLayout::Disjoint => lag,
            WindowLayout::Overlapping => (lag / 4).max(1),
        }
    }
}

fn window_starts(len: usize, lag: usize, layout: WindowLayout) -> impl Iterator<Item = usize> {
    let last = len - 1 - lag;
    (0..=last).step_by(layout.stride(lag))
}

fn check(len: usize, lags: &[usize]) -> Result<(), StatsError> {
    if lags.is_empty() || lags.contains(&0) {
        return Err(StatsError::InvalidArgument("lags must be positive".into()));
    }
    let max = *lags.iter().max().unwrap();
    // at least four disjoint windows at the largest lag
    let need = 4 * max + 1;
    if len < need {
        return Err(StatsError::WindowTooShort { len, lag: max, need });
    }
    Ok(())
}

fn range(w: &[i64]) -> i64 {
    let (mut lo, mut hi) = (w[0], w[0]);
    for &v in &w[1..] {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

fn sorted_lags(lags: &[usize]) -> Vec<usize> {
    let mut v = lags.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Mean price range per window, for each lag (in samples). The abscissa
/// of the result is the lag in model time.
pub fn hurst_simplified(
    path: &PricePath,
    lags: &[usize],
    layout: WindowLayout,
) -> Result<StatSeries, StatsError> {
    let x = &path.x;
    check(x.len(), lags)?;
    let lags = sorted_lags(lags);
    let rows = par::map_indexed(lags.len(), |k| {
        let lag = lags[k];
        let mut sum: u128 = 0;
        let mut n = 0u64;
        for t in window_starts(x.len(), lag, layout) {
            sum += range(&x[t..=t + lag]) as u128;
            n += 1;
        }
        (sum as f64 / n as f64, n)
    });
    let dt = path.sample_dt();
    let mut s = StatSeries::new("hurst_simplified");
    for (&lag, (mean, n)) in lags.iter().zip(rows) {
        s.push(lag as f64 * dt, mean, n);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRange {
    pub series: StatSeries,
    /// Per lag, the fraction of windows skipped for zero return variance.
    pub excluded_fraction: Vec<(usize, f64)>,
}

/// Mean of `range / std(returns)` over windows with non-zero variance.
pub fn hurst_normalized(
    path: &PricePath,
    lags: &[usize],
    layout: WindowLayout,
) -> Result<NormalizedRange, StatsError> {
    let x = &path.x;
    check(x.len(), lags)?;
    let lags = sorted_lags(lags);
    let rows = par::map_indexed(lags.len(), |k| {
        let lag = lags[k];
        let mut sum = 0.0;
        let (mut used, mut skipped) = (0u64, 0u64);
        for t in window_starts(x.len(), lag, layout) {
            let w = &x[t..=t + lag];
            let (mut s1, mut s2) = (0i128, 0i128);
            for p in w.windows(2) {
                let r = (p[1] - p[0]) as i128;
                s1 += r;
                s2 += r * r;
            }
            // lag^2 * variance, exact
            let scaled_var = lag as i128 * s2 - s1 * s1;
            if scaled_var <= 0 {
                skipped += 1;
                continue;
            }
            let sd = (scaled_var as f64).sqrt() / lag as f64;
            sum += range(w) as f64 / sd;
            used += 1;
        }
        (sum, used, skipped)
    });
    let mut series = StatSeries::new("hurst_normalized");
    let mut excluded = Vec::with_capacity(lags.len());
    for (&lag, (sum, used, skipped)) in lags.iter().zip(rows) {
        let frac = skipped as f64 / (used + skipped) as f64;
        excluded.push((lag, frac));
        if used > 0 {
            series.push(lag as f64 * path.sample_dt(), sum / used as f64, used);
        }
    }
    if series.is_empty() {
        return Err(StatsError::AllWindowsExcluded);
    }
    series.set_meta(
        "excluded_fraction",
        excluded.iter().map(|&(l, f)| serde_json::json!([l, f])).collect::<Vec<_>>(),
    );
    Ok(NormalizedRange {
        series,
        excluded_fraction: excluded,
    })
}
