//! Volatility-feedback market: free aging-order dynamics whose deposition
//! window follows an exponential moving average of absolute returns.
//!
//! Window width is `d = max(1, ceil(g v))` and shift `s = floor(d / b)`.
//! Above a critical feedback `g_c` the volatility runs away; the run then
//! clamps `v` at `v_cap` and flags itself as diverged.

use serde::{Deserialize, Serialize};

use crate::book::Side;
use crate::error::ConfigError;
use crate::models::stigler::{free_window, StiglerConfig, StiglerState};
use crate::models::{record_with, Market};
use crate::path::PricePath;
use crate::rng::RngStream;
use crate::stats::fit::{hill_tail, linear_fit};

pub const DEFAULT_LAMBDA: f64 = 1e-3;
pub const DEFAULT_V_CAP: f64 = 1e8;

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn default_v_cap() -> f64 {
    DEFAULT_V_CAP
}
fn default_v0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenoaConfig {
    /// Order lifetime / book capacity `N`.
    pub lifetime: u64,
    /// Width-to-shift ratio `b`.
    pub ratio: f64,
    /// Feedback factor `g`.
    pub gain: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_v_cap")]
    pub v_cap: f64,
    /// Initial volatility.
    #[serde(default = "default_v0")]
    pub v0: f64,
    pub steps: u64,
    pub burn_in: u64,
}

impl GenoaConfig {
    pub fn new(lifetime: u64, ratio: f64, gain: f64) -> Self {
        Self {
            lifetime,
            ratio,
            gain,
            lambda: DEFAULT_LAMBDA,
            v_cap: DEFAULT_V_CAP,
            v0: 1.0,
            steps: 0,
            burn_in: 10 * lifetime,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lifetime < 1 {
            return Err(ConfigError::invariant("lifetime", "order lifetime N must be at least 1"));
        }
        if !(self.ratio > 2.0) {
            return Err(ConfigError::invariant(
                "ratio",
                format!("b must exceed 2: trades impossible otherwise (got {})", self.ratio),
            ));
        }
        if !(self.gain > 0.0) {
            return Err(ConfigError::invariant("gain", "feedback factor g must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(ConfigError::invariant("lambda", "EMA weight must lie in (0, 1)"));
        }
        if !(self.v_cap > 0.0) {
            return Err(ConfigError::invariant("v_cap", "volatility ceiling must be positive"));
        }
        if !(self.v0 >= 0.0 && self.v0 <= self.v_cap) {
            return Err(ConfigError::invariant("v0", "initial volatility must lie in [0, v_cap]"));
        }
        Ok(())
    }
}

/// One step of the exponential kernel: `(1 - lambda) v + lambda |r|`.
#[inline]
pub fn update_volatility(v: f64, ret: i64, lambda: f64) -> f64 {
    (1.0 - lambda) * v + lambda * ret.unsigned_abs() as f64
}

/// Deposition window `(d, s)` for volatility `v`.
#[inline]
pub fn window(v: f64, gain: f64, ratio: f64) -> (i64, i64) {
    let d = ((gain * v).ceil() as i64).max(1);
    let s = (d as f64 / ratio).floor() as i64;
    (d, s)
}

#[derive(Debug, Clone)]
pub struct GenoaState {
    pub inner: StiglerState,
    pub v: f64,
    pub diverged: bool,
    gain: f64,
    ratio: f64,
    lambda: f64,
    v_cap: f64,
}

impl GenoaState {
    pub fn new(config: &GenoaConfig) -> Self {
        let inner = StiglerState::new(&StiglerConfig::free(0, 1, config.lifetime));
        Self {
            inner,
            v: config.v0,
            diverged: false,
            gain: config.gain,
            ratio: config.ratio,
            lambda: config.lambda,
            v_cap: config.v_cap,
        }
    }

    /// Keeps book, price and volatility but switches to new parameters.
    /// Used by warm-started sweeps.
    pub fn retune(&mut self, config: &GenoaConfig) {
        self.gain = config.gain;
        self.ratio = config.ratio;
        self.lambda = config.lambda;
        self.v_cap = config.v_cap;
        self.diverged = false;
    }

    pub fn price(&self) -> i64 {
        self.inner.price
    }

    pub fn current_window(&self) -> (i64, i64) {
        window(self.v, self.gain, self.ratio)
    }

    pub fn step(&mut self, rng: &mut RngStream) -> Option<i64> {
        let (width, shift) = self.current_window();
        let before = self.inner.price;
        let trade = self.inner.step_in(rng, |price, side: Side, rng| {
            let (lo, hi) = free_window(price, shift, width, side);
            rng.uniform_int(lo, hi)
        });
        let v = update_volatility(self.v, self.inner.price - before, self.lambda);
        if v >= self.v_cap {
            self.v = self.v_cap;
            self.diverged = true;
        } else {
            self.v = v;
        }
        trade
    }
}

impl Market for GenoaState {
    fn price(&self) -> i64 {
        self.inner.price
    }

    fn advance(&mut self, rng: &mut RngStream) -> bool {
        self.step(rng).is_some()
    }

    fn updates(&self) -> u64 {
        self.inner.t
    }

    fn quotes(&self) -> (Option<i64>, Option<i64>) {
        self.inner.quotes()
    }
}

/// Outcome of one run: the price path plus volatility diagnostics over the
/// recorded window.
#[derive(Debug, Clone)]
pub struct GenoaRun {
    pub path: PricePath,
    pub mean_v: f64,
    pub max_v: f64,
    pub diverged: bool,
    pub state: GenoaState,
}

pub fn run(config: &GenoaConfig, rng: &mut RngStream) -> GenoaRun {
    run_from(GenoaState::new(config), config, rng)
}

/// Continues from `state` (retuned to `config`), as in warm-started sweeps.
pub fn run_from(mut state: GenoaState, config: &GenoaConfig, rng: &mut RngStream) -> GenoaRun {
    state.retune(config);
    let mut sum = 0.0;
    let mut max_v: f64 = 0.0;
    let path = record_with(&mut state, rng, config.burn_in, config.steps, 1, |s| {
        sum += s.v;
        max_v = max_v.max(s.v);
    });
    let mean_v = if config.steps > 0 {
        sum / config.steps as f64
    } else {
        state.v
    };
    GenoaRun {
        path,
        mean_v,
        max_v,
        diverged: state.diverged,
        state,
    }
}

/// One point of a feedback-factor sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gain: f64,
    pub mean_v: f64,
    /// Tail exponent `alpha` of `P(r) ~ r^(-1-alpha)`, Hill estimate above
    /// the `tail_quantile` of nonzero one-step returns.
    pub alpha: Option<f64>,
    pub tail_cutoff: Option<f64>,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub points: Vec<SweepPoint>,
    /// Smallest swept `g` whose run diverged.
    pub gc_divergence: Option<f64>,
    /// Zero of the least-squares line through `(g, alpha - 1)` over the
    /// non-diverged points.
    pub gc_extrapolated: Option<f64>,
}

/// Tail exponent of the nonzero absolute one-step returns of a path.
pub fn tail_alpha(path: &PricePath, tail_quantile: f64) -> Option<(f64, f64)> {
    let mut abs: Vec<f64> = path
        .returns()
        .into_iter()
        .filter(|&r| r != 0)
        .map(|r| r.unsigned_abs() as f64)
        .collect();
    if abs.len() < 20 {
        return None;
    }
    abs.sort_by(f64::total_cmp);
    let k = ((abs.len() as f64 * tail_quantile) as usize).min(abs.len() - 1);
    let xmin = abs[k];
    hill_tail(&abs, xmin, false).map(|fit| (fit.alpha, xmin))
}

pub fn sweep_point(config: &GenoaConfig, seed: u64, tail_quantile: f64) -> SweepPoint {
    let mut rng = RngStream::new(seed);
    let out = run(config, &mut rng);
    let tail = if out.diverged {
        None
    } else {
        tail_alpha(&out.path, tail_quantile)
    };
    SweepPoint {
        gain: config.gain,
        mean_v: out.mean_v,
        alpha: tail.map(|t| t.0),
        tail_cutoff: tail.map(|t| t.1),
        diverged: out.diverged,
    }
}

/// Both critical-point estimates from a set of sweep points.
pub fn estimate_gc(points: &[SweepPoint]) -> (Option<f64>, Option<f64>) {
    let by_divergence = points
        .iter()
        .filter(|p| p.diverged)
        .map(|p| p.gain)
        .min_by(f64::total_cmp);
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.diverged)
        .filter_map(|p| p.alpha.map(|a| (p.gain, a - 1.0)))
        .unzip();
    let extrapolated = if xs.len() >= 2 {
        let fit = linear_fit(&xs, &ys);
        (fit.slope < 0.0).then(|| -fit.intercept / fit.slope)
    } else {
        None
    };
    (by_divergence, extrapolated)
}

/// Runs every `g` in `gains` independently (in parallel when enabled).
pub fn sweep_gc(
    base: &GenoaConfig,
    gains: &[f64],
    seed: u64,
    tail_quantile: f64,
) -> PhaseTable {
    let points = crate::par::map_indexed(gains.len(), |k| {
        let mut cfg = base.clone();
        cfg.gain = gains[k];
        sweep_point(&cfg, seed.wrapping_add(k as u64), tail_quantile)
    });
    let (gc_divergence, gc_extrapolated) = estimate_gc(&points);
    PhaseTable {
        points,
        gc_divergence,
        gc_extrapolated,
    }
}

/// Sequential sweep where each run starts from the previous final state.
/// `gains` usually rises then falls; returns the `(g, <v>)` sequence.
pub fn hysteresis(base: &GenoaConfig, gains: &[f64], seed: u64) -> Vec<SweepPoint> {
    let mut rng = RngStream::new(seed);
    let mut state = GenoaState::new(base);
    let mut out = Vec::with_capacity(gains.len());
    for &gain in gains {
        let mut cfg = base.clone();
        cfg.gain = gain;
        let result = run_from(state, &cfg, &mut rng);
        out.push(SweepPoint {
            gain,
            mean_v: result.mean_v,
            alpha: None,
            tail_cutoff: None,
            diverged: result.diverged,
        });
        state = result.state;
    }
    out
}

/// Critical feedback by bisection on divergence within a fixed run length.
pub fn bisect_gc(base: &GenoaConfig, lo: f64, hi: f64, iterations: usize, seed: u64) -> f64 {
    let diverges = |g: f64| {
        let mut cfg = base.clone();
        cfg.gain = g;
        run(&cfg, &mut RngStream::new(seed)).diverged
    };
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if diverges(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volatility_recursion_values() {
        assert_eq!(update_volatility(0.0, 0, 1e-3), 0.0);
        assert!((update_volatility(100.0, 0, 1e-3) - 99.9).abs() < 1e-12);
        let mut v = 0.0;
        for _ in 0..200_000 {
            v = update_volatility(v, 7, 1e-3);
        }
        assert!((v - 7.0).abs() < 1e-9);
    }

    #[test]
    fn window_values() {
        assert_eq!(window(7.3, 51.0, 7.0), (373, 53));
        assert_eq!(window(0.0, 51.0, 7.0), (1, 0));
        assert_eq!(window(2.0, 50.0, 7.0), (100, 14));
    }

    #[test]
    fn window_is_monotone() {
        let mut prev = (0, 0);
        for k in 0..20_000 {
            let w = window(k as f64 * 0.013, 52.4, 7.0);
            assert!(w.0 >= prev.0 && w.1 >= prev.1);
            prev = w;
        }
    }

    #[test]
    fn frozen_volatility_reduces_to_free_stigler() {
        let cfg = GenoaConfig::new(200, 7.0, 50.0);
        let mut genoa = GenoaState::new(&cfg);
        genoa.lambda = f64::MIN_POSITIVE; // v effectively frozen at v0
        genoa.v = 20.0;
        let (d, s) = genoa.current_window();
        let mut free = StiglerState::new(&StiglerConfig::free(s, d, 200));
        let mut r1 = RngStream::new(4);
        let mut r2 = RngStream::new(4);
        for _ in 0..20_000 {
            assert_eq!(genoa.step(&mut r1), free.step(&mut r2));
            assert_eq!(genoa.price(), free.price);
        }
    }

    #[test]
    fn trade_with_large_return_raises_volatility() {
        let cfg = GenoaConfig::new(100, 7.0, 30.0);
        let mut rng = RngStream::new(1);
        let mut s = GenoaState::new(&cfg);
        for _ in 0..50_000 {
            let (v, p) = (s.v, s.price());
            s.step(&mut rng);
            let r = (s.price() - p).abs() as f64;
            if r > v {
                assert!(s.v > v);
            }
        }
    }

    #[test]
    fn cap_sets_diverged_flag() {
        let mut cfg = GenoaConfig::new(100, 7.0, 80.0);
        cfg.v_cap = 50.0;
        cfg.v0 = 49.0;
        cfg.burn_in = 0;
        cfg.steps = 200_000;
        let out = run(&cfg, &mut RngStream::new(2));
        assert!(out.diverged);
        assert!(out.max_v <= 50.0);
        assert!(out.state.v <= 50.0);
    }

    #[test]
    fn gc_from_points() {
        let pts: Vec<SweepPoint> = [(50.0, 3.0, false), (51.0, 2.0, false), (53.0, 0.0, true)]
            .iter()
            .map(|&(g, a, d)| SweepPoint {
                gain: g,
                mean_v: 0.0,
                alpha: (!d).then_some(a),
                tail_cutoff: None,
                diverged: d,
            })
            .collect();
        let (a, b) = estimate_gc(&pts);
        assert_eq!(a, Some(53.0));
        assert!((b.unwrap() - 52.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(GenoaConfig::new(10, 2.0, 5.0).validate().is_err());
        assert!(GenoaConfig::new(10, 2.5, 5.0).validate().is_ok());
        let err = GenoaConfig::new(10, 2.0, 5.0).validate().unwrap_err();
        assert!(err.to_string().contains("b must exceed 2"));
    }
}
