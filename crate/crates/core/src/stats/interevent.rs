//! Statistics of the times between trades: the waiting-time distribution,
//! its agreement with an exponential law, and the mean size of a price jump
//! as a function of the wait that preceded it.

use crate::error::StatsError;
use crate::path::PricePath;
use crate::stats::series::StatSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// `sup |F_n - F|`.
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Jacobi-transformed series, accurate for small arguments
        let c = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (0..20)
            .map(|k| (-((2 * k + 1) as f64).powi(2) * c).exp())
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against an exponential law whose rate
/// is the inverse sample mean. Uses Stephens' finite-size correction.
pub fn ks_exponential(samples: &[f64]) -> Result<KsResult, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::InsufficientPoints {
            need: 2,
            got: samples.len(),
        });
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let rate = n / v.iter().sum::<f64>();
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = 1.0 - (-rate * x).exp();
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
        n: v.len(),
    })
}

/// Empirical CDF: one point per distinct value, `count` being its
/// multiplicity.
pub fn ecdf(samples: &[f64]) -> StatSeries {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut s = StatSeries::new("waiting_time_cdf");
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        s.push(v[i], j as f64 / n, (j - i) as u64);
        i = j;
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterEvent {
    pub waiting_cdf: StatSeries,
    /// Mean `|jump|` against the preceding waiting time, on log bins.
    pub conditional_return: StatSeries,
    pub mean_wait: f64,
    pub ks: KsResult,
    pub trades: usize,
}

/// Inter-trade statistics of a recorded path. Each price jump is paired with
/// the wait since the previous trade; bins of that wait grow geometrically
/// by `ratio` from one elementary update, and their abscissa is the
/// geometric mean of the bin edges.
pub fn interevent_statistics(path: &PricePath, ratio: f64, min_trades: usize) -> Result<InterEvent, StatsError> {
    let trades = &path.trades;
    if trades.len() < min_trades.max(3) {
        return Err(StatsError::TooFewTrades {
            need: min_trades.max(3),
            got: trades.len(),
        });
    }
    if !(ratio > 1.0) {
        return Err(StatsError::InvalidArgument("bin ratio must exceed 1".into()));
    }
    let waits = path.waiting_times();
    let ks = ks_exponential(&waits)?;
    let mean_wait = waits.iter().sum::<f64>() / waits.len() as f64;

    let w0 = path.time_unit;
    let bin = |w: f64| ((w / w0).ln() / ratio.ln() + 1e-9).floor().max(0.0) as usize;
    let nbins = waits.iter().map(|&w| bin(w)).max().unwrap_or(0) + 1;
    let mut sums = vec![0u128; nbins];
    let mut counts = vec![0u64; nbins];
    for (w, t) in waits.iter().zip(&trades[1..]) {
        let k = bin(*w);
        sums[k] += t.ret.unsigned_abs() as u128;
        counts[k] += 1;
    }
    let mut conditional = StatSeries::new("conditional_return");
    for k in 0..nbins {
        if counts[k] > 0 {
            let centre = w0 * ratio.powf(k as f64 + 0.5);
            conditional.push(centre, sums[k] as f64 / counts[k] as f64, counts[k]);
        }
    }
    let mut waiting_cdf = ecdf(&waits);
    waiting_cdf.set_meta("ks_statistic", ks.statistic);
    waiting_cdf.set_meta("ks_p_value", ks.p_value);
    waiting_cdf.set_meta("mean_wait", mean_wait);
    Ok(InterEvent {
        waiting_cdf,
        conditional_return: conditional,
        mean_wait,
        ks,
        trades: trades.len(),
    })
}
