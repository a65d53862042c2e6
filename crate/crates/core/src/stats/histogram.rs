//! Histograms of integer and real samples on linear or logarithmic bins, and
//! return distributions built from a price path.

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::path::PricePath;
use crate::stats::series::StatSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Binning {
    /// Equal-width bins starting at the lower bound.
    Linear { width: f64 },
    /// Bins whose edges grow by `ratio`.
    Log { ratio: f64 },
}

impl Binning {
    pub const LOG_DEFAULT: Binning = Binning::Log { ratio: 1.25 };
    pub const UNIT: Binning = Binning::Linear { width: 1.0 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub binning: Binning,
    /// Bin `k` is `[edges[k], edges[k + 1])`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Every sample offered, including the excluded ones.
    pub total: u64,
    /// Samples below the first edge (zeros for integer log bins).
    pub excluded: u64,
    integer: bool,
}

/// Integer log edges: `e0 = 1`, `e(k+1) = max(e(k) + 1, ceil(e(k) * ratio))`.
pub fn integer_log_edges(ratio: f64, max_value: u64) -> Vec<u64> {
    assert!(ratio > 1.0, "log bins need ratio > 1");
    let mut edges = vec![1u64];
    while *edges.last().unwrap() <= max_value {
        let e = *edges.last().unwrap();
        edges.push((e + 1).max((e as f64 * ratio).ceil() as u64));
    }
    edges
}

impl Histogram {
    /// Bins non-negative integers. Linear bins start at 0 with integer width;
    /// log bins start at 1, so zeros are counted as excluded mass.
    pub fn of_integers(values: &[u64], binning: Binning) -> Self {
        let max = values.iter().copied().max().unwrap_or(0);
        let int_edges: Vec<u64> = match binning {
            Binning::Linear { width } => {
                let w = (width.round() as u64).max(1);
                (0..=max / w + 1).map(|k| k * w).collect()
            }
            Binning::Log { ratio } => integer_log_edges(ratio, max),
        };
        let mut counts = vec![0u64; int_edges.len() - 1];
        let mut excluded = 0;
        for &v in values {
            if v < int_edges[0] {
                excluded += 1;
                continue;
            }
            let k = match binning {
                Binning::Linear { width } => (v / (width.round() as u64).max(1)) as usize,
                Binning::Log { .. } => int_edges.partition_point(|&e| e <= v) - 1,
            };
            counts[k] += 1;
        }
        Self {
            binning,
            edges: int_edges.iter().map(|&e| e as f64).collect(),
            counts,
            total: values.len() as u64,
            excluded,
            integer: true,
        }
    }

    /// Bins real samples at or above `lower` (which must be positive for log
    /// bins); smaller values are excluded.
    pub fn of_reals(values: &[f64], binning: Binning, lower: f64) -> Self {
        let max = values.iter().copied().fold(lower, f64::max);
        let mut edges = vec![lower];
        match binning {
            Binning::Linear { width } => {
                assert!(width > 0.0);
                let n = ((max - lower) / width).floor() as usize + 1;
                edges.extend((1..=n).map(|k| lower + k as f64 * width));
            }
            Binning::Log { ratio } => {
                assert!(ratio > 1.0 && lower > 0.0);
                while *edges.last().unwrap() <= max {
                    let e = *edges.last().unwrap();
                    edges.push(e * ratio);
                }
            }
        }
        let mut counts = vec![0u64; edges.len() - 1];
        let mut excluded = 0;
        for &v in values {
            if !(v >= lower) {
                excluded += 1;
                continue;
            }
            let k = match binning {
                Binning::Linear { width } => ((v - lower) / width).floor() as usize,
                Binning::Log { .. } => edges.partition_point(|&e| e <= v) - 1,
            };
            let last = counts.len() - 1;
            counts[k.min(last)] += 1;
        }
        Self {
            binning,
            edges,
            counts,
            total: values.len() as u64,
            excluded,
            integer: false,
        }
    }

    /// Number of integers (or real length) covered by bin `k`.
    pub fn width(&self, k: usize) -> f64 {
        self.edges[k + 1] - self.edges[k]
    }

    /// Representative abscissa of bin `k`. Integer bins use the integers they
    /// contain: the midpoint for linear bins, the geometric mean of the first
    /// and last member for log bins.
    pub fn centre(&self, k: usize) -> f64 {
        let (lo, hi) = (self.edges[k], self.edges[k + 1]);
        let last = if self.integer { hi - 1.0 } else { hi };
        match self.binning {
            Binning::Linear { .. } => 0.5 * (lo + last),
            Binning::Log { .. } => (lo * last).sqrt(),
        }
    }

    /// Probability density: count over total samples and bin width.
    pub fn density(&self, k: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts[k] as f64 / (self.total as f64 * self.width(k))
    }

    pub fn excluded_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.excluded as f64 / self.total as f64
        }
    }

    /// Non-empty bins as `(centre, density, count)`.
    pub fn to_series(&self, name: &str) -> StatSeries {
        let mut s = StatSeries::new(name);
        for k in 0..self.counts.len() {
            if self.counts[k] > 0 {
                s.push(self.centre(k), self.density(k), self.counts[k]);
            }
        }
        s.set_meta("excluded_fraction", self.excluded_fraction());
        s.set_meta("samples", self.total);
        s
    }
}

/// Which returns a distribution is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMode {
    /// `x(t) - x(t - lag)` on the sampled path, overlapping windows.
    PerStep,
    /// Differences between trade prices `lag` trades apart.
    PerTrade,
}

/// `|x(t) - x(t - lag)|` in the chosen mode.
pub fn abs_returns(path: &PricePath, lag: usize, mode: ReturnMode) -> Result<Vec<u64>, StatsError> {
    if lag == 0 {
        return Err(StatsError::InvalidArgument("lag must be at least 1".into()));
    }
    let prices: Vec<i64> = match mode {
        ReturnMode::PerStep => path.x.clone(),
        ReturnMode::PerTrade => path.trades.iter().map(|t| t.price).collect(),
    };
    if prices.len() <= lag {
        return Err(StatsError::WindowTooShort {
            len: prices.len(),
            lag,
            need: lag + 1,
        });
    }
    Ok(prices
        .windows(lag + 1)
        .map(|w| (w[lag] - w[0]).unsigned_abs())
        .collect())
}

/// One histogram of `|r|` per lag.
pub fn return_distribution(
    path: &PricePath,
    lags: &[usize],
    mode: ReturnMode,
    binning: Binning,
) -> Result<Vec<(usize, Histogram)>, StatsError> {
    lags.iter()
        .map(|&lag| {
            let r = abs_returns(path, lag, mode)?;
            Ok((lag, Histogram::of_integers(&r, binning)))
        })
        .collect()
}
