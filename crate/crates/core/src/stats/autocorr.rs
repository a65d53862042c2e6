//! Connected autocorrelation of returns and of absolute returns.
//!
//! `C(lag) = <a(t) a(t - lag)> - <a(t)> <a(t - lag)>`, with both averages
//! taken over the same `n - lag` pairs. Sums are accumulated exactly in
//! 128-bit integers, so results do not depend on summation order.

use crate::error::StatsError;
use crate::par;
use crate::path::PricePath;
use crate::stats::series::StatSeries;

/// Log-spaced integer lags in `[min, max]`, about `per_decade` per decade,
/// deduplicated.
pub fn log_lags(min: usize, max: usize, per_decade: usize) -> Vec<usize> {
    assert!(min >= 1 && max >= min && per_decade >= 1);
    let decades = (max as f64 / min as f64).log10();
    let n = (decades * per_decade as f64).round() as usize;
    let mut lags: Vec<usize> = (0..=n)
        .map(|k| {
            let f = if n == 0 { 0.0 } else { k as f64 / n as f64 };
            (min as f64 * (max as f64 / min as f64).powf(f)).round() as usize
        })
        .collect();
    lags.dedup();
    lags
}

fn check_length(len: usize, lags: &[usize]) -> Result<(), StatsError> {
    if lags.is_empty() {
        return Err(StatsError::InvalidArgument("no lags given".into()));
    }
    if lags.contains(&0) {
        return Err(StatsError::InvalidArgument("lags must be positive".into()));
    }
    let max = *lags.iter().max().unwrap();
    let need = 10 * max;
    if len < need {
        return Err(StatsError::WindowTooShort { len, lag: max, need });
    }
    Ok(())
}

/// Connected correlation at one lag of an integer series.
pub fn connected_at(a: &[i64], lag: usize) -> f64 {
    let m = a.len() - lag;
    let (head, tail) = (&a[..m], &a[lag..]);
    let mut s_ab: i128 = 0;
    let mut s_a: i128 = 0;
    let mut s_b: i128 = 0;
    for (&x, &y) in tail.iter().zip(head) {
        s_ab += x as i128 * y as i128;
        s_a += x as i128;
        s_b += y as i128;
    }
    let m = m as i128;
    match m
        .checked_mul(s_ab)
        .and_then(|p| s_a.checked_mul(s_b).map(|q| p - q))
    {
        Some(num) => num as f64 / (m as f64 * m as f64),
        None => {
            let mf = m as f64;
            s_ab as f64 / mf - (s_a as f64 / mf) * (s_b as f64 / mf)
        }
    }
}

/// Autocorrelation of an arbitrary integer series at each lag (lags in
/// ascending order). Requires the series to be at least ten times the
/// largest lag.
pub fn autocorrelation_of(values: &[i64], lags: &[usize]) -> Result<StatSeries, StatsError> {
    check_length(values.len(), lags)?;
    let mut sorted = lags.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let cs = par::map_indexed(sorted.len(), |k| connected_at(values, sorted[k]));
    let mut s = StatSeries::new("autocorrelation");
    for (&lag, c) in sorted.iter().zip(cs) {
        s.push(lag as f64, c, (values.len() - lag) as u64);
    }
    Ok(s)
}

/// Autocorrelation of `|r|` for one-sample returns; zero returns included.
/// Lags are in samples; the abscissa of the result is in model time.
pub fn abs_return_autocorrelation(path: &PricePath, lags: &[usize]) -> Result<StatSeries, StatsError> {
    let abs: Vec<i64> = path.returns().into_iter().map(|r| r.abs()).collect();
    let s = autocorrelation_of(&abs, lags)?;
    Ok(in_model_time(s, path, "abs_return_autocorrelation"))
}

/// Autocorrelation of the signed returns.
pub fn return_autocorrelation(path: &PricePath, lags: &[usize]) -> Result<StatSeries, StatsError> {
    let s = autocorrelation_of(&path.returns(), lags)?;
    Ok(in_model_time(s, path, "return_autocorrelation"))
}

fn in_model_time(mut s: StatSeries, path: &PricePath, name: &str) -> StatSeries {
    let dt = path.sample_dt();
    for p in &mut s.points {
        p.x *= dt;
    }
    s.name = name.into();
    s
}

/// Standard error of a connected correlation between independent samples
/// of the series: `Var(a) / sqrt(n)`.
pub fn noise_level(values: &[i64]) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return f64::INFINITY;
    }
    let m = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values.iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / n;
    var / n.sqrt()
}

/// Noise level of the absolute one-sample returns of a path.
pub fn abs_return_noise(path: &PricePath) -> f64 {
    let abs: Vec<i64> = path.returns().into_iter().map(|r| r.abs()).collect();
    noise_level(&abs)
}

/// Abscissa range over which a decaying correlation is fitted: from
/// `start_factor` times the position of its maximum to the last point
/// before it first drops below `k_sigma * noise`.
pub fn decay_window(series: &StatSeries, noise: f64, start_factor: f64, k_sigma: f64) -> Option<(f64, f64)> {
    let peak = series
        .points
        .iter()
        .max_by(|a, b| a.y.total_cmp(&b.y))?
        .x;
    let start = series.points.iter().position(|p| p.x >= start_factor * peak)?;
    let mut end = None;
    for p in &series.points[start..] {
        if p.y < k_sigma * noise {
            break;
        }
        end = Some(p.x);
    }
    end.filter(|&e| e > series.points[start].x).map(|e| (series.points[start].x, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[i64], lag: usize) -> f64 {
        let m = (a.len() - lag) as f64;
        let x: Vec<f64> = a[lag..].iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = a[..a.len() - lag].iter().map(|&v| v as f64).collect();
        let mx = x.iter().sum::<f64>() / m;
        let my = y.iter().sum::<f64>() / m;
        x.iter().zip(&y).map(|(p, q)| (p - mx) * (q - my)).sum::<f64>() / m
    }

    #[test]
    fn matches_two_pass_formula() {
        let a: Vec<i64> = (0..500).map(|k| ((k * 7919) % 13) as i64 - 4).collect();
        for lag in [1, 2, 5, 17, 49] {
            assert!((connected_at(&a, lag) - naive(&a, lag)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_series_is_uncorrelated() {
        let a = vec![3i64; 1000];
        let s = autocorrelation_of(&a, &[1, 10, 50]).unwrap();
        assert!(s.ys().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn too_short_is_an_error() {
        let a = vec![1i64; 99];
        assert!(matches!(
            autocorrelation_of(&a, &[10]),
            Err(StatsError::WindowTooShort { need: 100, .. })
        ));
        assert!(autocorrelation_of(&vec![1i64; 100], &[10]).is_ok());
    }

    #[test]
    fn log_lags_span_range() {
        let l = log_lags(1, 1000, 5);
        assert_eq!(l.first(), Some(&1));
        assert_eq!(l.last(), Some(&1000));
        assert!(l.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn decay_window_stops_at_noise() {
        let mut s = StatSeries::new("c");
        for (x, y) in [(1.0, 2.0), (2.0, 5.0), (4.0, 3.0), (8.0, 1.0), (16.0, 0.4), (32.0, 0.05), (64.0, 0.3)] {
            s.push(x, y, 1);
        }
        assert_eq!(decay_window(&s, 0.1, 2.0, 3.0), Some((4.0, 16.0)));
        assert_eq!(decay_window(&s, 10.0, 2.0, 3.0), None);
    }
}
