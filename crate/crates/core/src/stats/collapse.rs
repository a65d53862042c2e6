//! Data collapse of return distributions measured at different parameters.
//!
//! Each histogram comes with a scale factor `s`; the rescaled curve is
//! `(x / s, s * P(x))`. The collapse error is the largest, over pairs of
//! curves, mean absolute difference of `ln(s P)` on a common grid spanning
//! the overlap of their supports.

use crate::error::StatsError;
use crate::rng::RngStream;
use crate::stats::fit::golden_max;
use crate::stats::histogram::{Binning, Histogram};

/// `N^(1/2) L^(-1/4)`, the return scale of the diffusing-particle model.
pub fn scaling_factor_bps(length: f64, particles: f64) -> f64 {
    particles.sqrt() * length.powf(-0.25)
}

const GRID_POINTS: usize = 32;

/// Rescaled `(x, ln density)` points of bins with at least `min_count`
/// samples.
fn rescaled(h: &Histogram, scale: f64, min_count: u64) -> Vec<(f64, f64)> {
    (0..h.counts.len())
        .filter(|&k| h.counts[k] >= min_count)
        .map(|k| (h.centre(k) / scale, (scale * h.density(k)).ln()))
        .collect()
}

fn interp(points: &[(f64, f64)], x: f64, log_x: bool) -> f64 {
    let k = points.partition_point(|p| p.0 < x).clamp(1, points.len() - 1);
    let (a, b) = (points[k - 1], points[k]);
    let (xa, xb, xx) = if log_x {
        (a.0.ln(), b.0.ln(), x.ln())
    } else {
        (a.0, b.0, x)
    };
    if xb == xa {
        return a.1;
    }
    a.1 + (b.1 - a.1) * (xx - xa) / (xb - xa)
}

/// Largest pairwise mean absolute log-density difference.
pub fn collapse_error(curves: &[(&Histogram, f64)], min_count: u64) -> Result<f64, StatsError> {
    if curves.len() < 2 {
        return Err(StatsError::InvalidArgument("collapse needs two curves".into()));
    }
    let pts: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|&(h, s)| rescaled(h, s, min_count))
        .collect();
    if pts.iter().any(|p| p.len() < 2) {
        return Err(StatsError::InsufficientPoints {
            need: 2,
            got: pts.iter().map(Vec::len).min().unwrap_or(0),
        });
    }
    let log_x = curves.iter().all(|(h, _)| matches!(h.binning, Binning::Log { .. }));
    let mut worst: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let lo = pts[i][0].0.max(pts[j][0].0);
            let hi = pts[i].last().unwrap().0.min(pts[j].last().unwrap().0);
            if !(lo < hi) {
                return Err(StatsError::DisjointSupports);
            }
            let mut sum = 0.0;
            for g in 0..GRID_POINTS {
                let f = g as f64 / (GRID_POINTS - 1) as f64;
                let x = if log_x {
                    lo * (hi / lo).powf(f)
                } else {
                    lo + (hi - lo) * f
                };
                sum += (interp(&pts[i], x, log_x) - interp(&pts[j], x, log_x)).abs();
            }
            worst = worst.max(sum / GRID_POINTS as f64);
        }
    }
    Ok(worst)
}

/// Scale `s` in `[lo, hi]` that best collapses `h` onto `reference`
/// (itself rescaled by `ref_scale`): a log-spaced scan followed by a golden
/// refinement around the best grid point.
pub fn fit_scale(
    reference: &Histogram,
    ref_scale: f64,
    h: &Histogram,
    min_count: u64,
    lo: f64,
    hi: f64,
) -> Result<f64, StatsError> {
    if !(lo > 0.0 && hi > lo) {
        return Err(StatsError::InvalidArgument("scale bracket must be positive and ordered".into()));
    }
    let cost = |ln_s: f64| {
        collapse_error(&[(reference, ref_scale), (h, ln_s.exp())], min_count).unwrap_or(f64::INFINITY)
    };
    const SCAN: usize = 64;
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (SCAN - 1) as f64;
    let (best, best_cost) = (0..SCAN)
        .map(|k| {
            let x = a + step * k as f64;
            (x, cost(x))
        })
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    if !best_cost.is_finite() {
        return Err(StatsError::DisjointSupports);
    }
    let (x, _) = golden_max((best - step).max(a), (best + step).min(b), 1e-6, |x| -cost(x));
    Ok(x.exp())
}

fn resample(values: &[u64], rng: &mut RngStream) -> Vec<u64> {
    (0..values.len()).map(|_| values[rng.below(values.len())]).collect()
}

/// Collapse error expected from sampling noise alone: for each data set,
/// two bootstrap resamples are collapsed onto each other; the largest such
/// error is averaged over `reps` rounds.
pub fn collapse_noise_floor(
    samples: &[(&[u64], f64)],
    binning: Binning,
    min_count: u64,
    reps: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    let mut rng = RngStream::new(seed);
    let mut total = 0.0;
    for _ in 0..reps.max(1) {
        let mut worst: f64 = 0.0;
        for &(values, scale) in samples {
            let a = Histogram::of_integers(&resample(values, &mut rng), binning);
            let b = Histogram::of_integers(&resample(values, &mut rng), binning);
            worst = worst.max(collapse_error(&[(&a, scale), (&b, scale)], min_count)?);
        }
        total += worst;
    }
    Ok(total / reps.max(1) as f64)
}

/// `ln P` is concave on the bins beyond the mode when every discrete second
/// difference (on the bin abscissae) is at most `tol`. Uses bins with at
/// least `min_count` samples.
pub fn log_concave_beyond_mode(h: &Histogram, min_count: u64, tol: f64) -> bool {
    let pts: Vec<(f64, f64)> = rescaled(h, 1.0, min_count);
    let Some(mode) = (0..pts.len()).max_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1)) else {
        return false;
    };
    let tail = &pts[mode..];
    tail.windows(3).all(|w| {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        s2 - s1 <= tol
    })
}
