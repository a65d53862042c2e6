//! Estimators on inputs whose answer is known in closed form.

use obsim_core::path::Trade;
use obsim_core::stats::fit::{hill_tail, power_law_cutoff_test};
use obsim_core::stats::{
    abs_return_autocorrelation, collapse_error, fit_scale, hurst_normalized, hurst_simplified, interevent_statistics,
    ks_exponential, log_lags, powerlaw_slope, return_autocorrelation, Binning, Histogram, StatSeries, WindowLayout,
};
use obsim_core::{PricePath, RngStream};

fn slope(s: &StatSeries) -> f64 {
    powerlaw_slope(s, 0.0, f64::INFINITY, 1).unwrap().slope
}

#[test]
fn ballistic_path_has_unit_range_slope() {
    let path = PricePath::from_prices((0..20_001).collect());
    let lags = log_lags(1, 1000, 5);
    let s = hurst_simplified(&path, &lags, WindowLayout::Disjoint).unwrap();
    for p in &s.points {
        assert_eq!(p.y, p.x, "range of a unit-speed ramp equals the lag");
    }
    assert!((slope(&s) - 1.0).abs() < 1e-12);
}

#[test]
fn alternating_path_is_saturated() {
    let path = PricePath::from_prices((0..20_001).map(|k| k % 2).collect());
    let s = hurst_simplified(&path, &log_lags(1, 1000, 5), WindowLayout::Overlapping).unwrap();
    assert!(s.points.iter().all(|p| p.y == 1.0));
    let n = hurst_normalized(&path, &log_lags(10, 1000, 5), WindowLayout::Disjoint).unwrap();
    // range 1 over a return deviation of about 1
    assert!(slope(&n.series).abs() < 0.01);
}

#[test]
fn constant_windows_are_excluded_from_normalized_range() {
    let mut x = vec![0i64; 1000];
    x.extend((0..1001).map(|k| k % 3));
    let n = hurst_normalized(&PricePath::from_prices(x), &[100], WindowLayout::Disjoint).unwrap();
    let (_, frac) = n.excluded_fraction[0];
    assert!((frac - 0.5).abs() < 0.06, "{frac}");
}

#[test]
fn white_noise_has_no_autocorrelation() {
    let mut rng = RngStream::new(9);
    let mut x = vec![0i64];
    for _ in 0..400_000 {
        let r = rng.uniform_int(-3, 3);
        x.push(x.last().unwrap() + r);
    }
    let path = PricePath::from_prices(x);
    let lags = [1, 2, 5, 10, 100];
    for s in [abs_return_autocorrelation(&path, &lags).unwrap(), return_autocorrelation(&path, &lags).unwrap()] {
        for p in &s.points {
            assert!(p.y.abs() < 0.03, "lag {}: {}", p.x, p.y);
        }
    }
}

#[test]
fn period_two_returns_anticorrelate() {
    let x: Vec<i64> = (0..10_001).map(|k| k % 2).collect();
    let c = return_autocorrelation(&PricePath::from_prices(x), &[1, 2]).unwrap();
    // returns alternate +1, -1: covariance -1 at odd lags, +1 at even ones
    assert!((c.points[0].y + 1.0).abs() < 1e-3);
    assert!((c.points[1].y - 1.0).abs() < 1e-3);
}

#[test]
fn exponential_quantiles_pass_ks() {
    let n = 5000;
    let v: Vec<f64> = (0..n).map(|k| -(1.0 - (k as f64 + 0.5) / n as f64).ln() * 3.0).collect();
    let ks = ks_exponential(&v).unwrap();
    assert!(ks.p_value > 0.5, "{ks:?}");
    let uniform: Vec<f64> = (0..n).map(|k| k as f64).collect();
    assert!(ks_exponential(&uniform).unwrap().p_value < 1e-10);
}

#[test]
fn hill_recovers_discrete_pareto_tail() {
    let mut rng = RngStream::new(4);
    let samples: Vec<f64> = (0..200_000).map(|_| (rng.unit().powf(-1.0 / 1.5)).floor()).collect();
    let fit = hill_tail(&samples, 20.0, true).unwrap();
    assert!((fit.alpha - 1.5).abs() < 0.06, "{fit:?}");
}

#[test]
fn cutoff_test_p_value_is_bounded() {
    let mut rng = RngStream::new(5);
    let samples: Vec<u64> = (0..20_000).map(|_| (rng.unit().powf(-0.5)).floor() as u64).collect();
    let t = power_law_cutoff_test(&samples, 3).unwrap();
    assert!((0.0..=0.5).contains(&t.p_value) && t.statistic >= 0.0);
}

#[test]
fn scaled_data_collapses_at_the_true_scale() {
    let mut rng = RngStream::new(6);
    let base: Vec<u64> = (0..200_000).map(|_| (rng.unit().powf(-0.4) * 3.0) as u64).collect();
    let scaled: Vec<u64> = base.iter().map(|v| v * 4).collect();
    let h1 = Histogram::of_integers(&base, Binning::LOG_DEFAULT);
    let h4 = Histogram::of_integers(&scaled, Binning::LOG_DEFAULT);
    let s = fit_scale(&h1, 1.0, &h4, 10, 1e-2, 1e2).unwrap();
    assert!((s / 4.0 - 1.0).abs() < 0.1, "{s}");
    let good = collapse_error(&[(&h1, 1.0), (&h4, 4.0)], 10).unwrap();
    let bad = collapse_error(&[(&h1, 1.0), (&h4, 1.0)], 10).unwrap();
    assert!(good < 0.2 * bad, "{good} vs {bad}");
    assert_eq!(collapse_error(&[(&h1, 1.0), (&h1, 1.0)], 10).unwrap(), 0.0);
}

#[test]
fn interevent_pairs_jumps_with_preceding_waits() {
    // waits alternate 1 and 8 updates; jumps after the long waits are 5, after short 1
    let mut trades = Vec::new();
    let (mut step, mut price) = (0u64, 0i64);
    for k in 0..2000 {
        let (wait, jump) = if k % 2 == 0 { (1, 1) } else { (8, 5) };
        step += wait;
        price += jump;
        trades.push(Trade { step, price, ret: jump });
    }
    let mut path = PricePath::from_prices(vec![0; step as usize + 1]);
    path.trades = trades;
    let ie = interevent_statistics(&path, 2.0, 10).unwrap();
    assert!((ie.mean_wait - 4.5).abs() < 0.01, "{}", ie.mean_wait);
    let ys: Vec<f64> = ie.conditional_return.points.iter().map(|p| p.y).collect();
    assert_eq!(ys, vec![1.0, 5.0]);
}
