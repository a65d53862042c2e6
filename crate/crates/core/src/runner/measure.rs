//! Estimator requests and their application to simulated runs.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, RunError, StatsError};
use crate::models::genoa::{self, GenoaConfig};
use crate::path::{write_event_log, OrderEvent, PricePath};
use crate::runner::config::ModelConfig;
use crate::stats::autocorr::{abs_return_autocorrelation, abs_return_noise, log_lags, return_autocorrelation};
use crate::stats::collapse::{collapse_error, fit_scale};
use crate::stats::fit::{hill_tail, linear_fit, power_law_cutoff_test};
use crate::stats::histogram::{abs_returns, Binning, Histogram, ReturnMode};
use crate::stats::hurst::{hurst_normalized, hurst_simplified, WindowLayout};
use crate::stats::interevent::interevent_statistics;
use crate::stats::series::{MergeRule, StatSeries};

/// Explicit lags, or a log-spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LagSpec {
    List(Vec<usize>),
    Range { min: usize, max: usize, per_decade: usize },
}

impl LagSpec {
    fn resolve(&self) -> Vec<usize> {
        match self {
            LagSpec::List(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
            LagSpec::Range { min, max, per_decade } => log_lags(*min, *max, *per_decade),
        }
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        let ok = match self {
            LagSpec::List(v) => !v.is_empty() && !v.contains(&0),
            LagSpec::Range { min, max, per_decade } => *min >= 1 && max >= min && *per_decade >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(ConfigError::invariant(field, "lags must be positive (range: 1 <= min <= max, per_decade >= 1)"))
        }
    }
}

fn default_mode() -> ReturnMode {
    ReturnMode::PerStep
}
fn default_binning() -> Binning {
    Binning::LOG_DEFAULT
}
fn default_ratio() -> f64 {
    1.5
}
fn default_quantile() -> f64 {
    0.95
}
fn default_min_count() -> u64 {
    10
}
fn default_bracket() -> [f64; 2] {
    [1e-3, 1e3]
}
fn one_lag() -> Vec<usize> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Measure {
    /// The recorded price path (`t,x`) and trade list (`t,price,return`).
    Path {},
    /// Order lifecycle log (adjacent- and uniform-deposition models only).
    EventLog {},
    /// Histogram of `|x(t) - x(t - lag)|`, one series per lag.
    ReturnDistribution {
        #[serde(default = "one_lag")]
        lags: Vec<usize>,
        #[serde(default = "default_mode")]
        mode: ReturnMode,
        #[serde(default = "default_binning")]
        binning: Binning,
    },
    HurstSimplified {
        #[serde(default)]
        lags: Option<LagSpec>,
        #[serde(default)]
        layout: WindowLayout,
    },
    HurstNormalized {
        #[serde(default)]
        lags: Option<LagSpec>,
        #[serde(default)]
        layout: WindowLayout,
    },
    AbsAutocorrelation {
        #[serde(default)]
        lags: Option<LagSpec>,
    },
    ReturnAutocorrelation {
        #[serde(default)]
        lags: Option<LagSpec>,
    },
    /// Waiting-time CDF and mean jump against the preceding wait.
    Interevent {
        #[serde(default = "default_ratio")]
        ratio: f64,
    },
    /// Hill tail index of nonzero one-step `|r|` above a sample quantile.
    TailExponent {
        #[serde(default = "default_quantile")]
        quantile: f64,
    },
    /// Likelihood-ratio test of a pure power law against one with an
    /// exponential cutoff, on one-step `|r| >= xmin`.
    CutoffTest { xmin: u64 },
    /// Scale factor collapsing each lag's return histogram onto the
    /// reference lag's.
    CollapseScale {
        lags: Vec<usize>,
        reference_lag: usize,
        #[serde(default = "default_binning")]
        binning: Binning,
        #[serde(default = "default_min_count")]
        min_count: u64,
        #[serde(default = "default_bracket")]
        bracket: [f64; 2],
    },
    /// Independent runs over feedback factors: mean volatility and tail
    /// index against `g`.
    GenoaPhase {
        gains: Vec<f64>,
        #[serde(default = "default_quantile")]
        quantile: f64,
    },
    /// Warm-started sweep, rising then falling in `g`.
    GenoaHysteresis { gains: Vec<f64> },
    /// Critical feedback by bisection, per width-to-shift ratio.
    GenoaCritical {
        ratios: Vec<f64>,
        lo: f64,
        hi: f64,
        iterations: usize,
    },
}

impl Measure {
    pub fn name(&self) -> &'static str {
        match self {
            Measure::Path { .. } => "path",
            Measure::EventLog { .. } => "event_log",
            Measure::ReturnDistribution { .. } => "return_distribution",
            Measure::HurstSimplified { .. } => "hurst_simplified",
            Measure::HurstNormalized { .. } => "hurst_normalized",
            Measure::AbsAutocorrelation { .. } => "abs_autocorrelation",
            Measure::ReturnAutocorrelation { .. } => "return_autocorrelation",
            Measure::Interevent { .. } => "interevent",
            Measure::TailExponent { .. } => "tail_exponent",
            Measure::CutoffTest { .. } => "cutoff_test",
            Measure::CollapseScale { .. } => "collapse_scale",
            Measure::GenoaPhase { .. } => "genoa_phase",
            Measure::GenoaHysteresis { .. } => "genoa_hysteresis",
            Measure::GenoaCritical { .. } => "genoa_critical",
        }
    }

    /// Sweep measures run their own simulations instead of reading the
    /// point's path.
    pub fn is_sweep(&self) -> bool {
        matches!(
            self,
            Measure::GenoaPhase { .. } | Measure::GenoaHysteresis { .. } | Measure::GenoaCritical { .. }
        )
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let field = self.name();
        let lags_positive = |v: &[usize]| {
            if v.is_empty() || v.contains(&0) {
                Err(ConfigError::invariant(field, "lags must be positive"))
            } else {
                Ok(())
            }
        };
        match self {
            Measure::ReturnDistribution { lags, binning, .. } => {
                lags_positive(lags)?;
                check_binning(field, binning)
            }
            Measure::HurstSimplified { lags, .. }
            | Measure::HurstNormalized { lags, .. }
            | Measure::AbsAutocorrelation { lags }
            | Measure::ReturnAutocorrelation { lags } => lags.as_ref().map_or(Ok(()), |l| l.validate(field)),
            Measure::Interevent { ratio } if !(*ratio > 1.0) => {
                Err(ConfigError::invariant(field, "bin ratio must exceed 1"))
            }
            Measure::TailExponent { quantile } | Measure::GenoaPhase { quantile, .. }
                if !(*quantile > 0.0 && *quantile < 1.0) =>
            {
                Err(ConfigError::invariant(field, "quantile must lie in (0, 1)"))
            }
            Measure::CutoffTest { xmin } if *xmin < 1 => Err(ConfigError::invariant(field, "xmin must be at least 1")),
            Measure::CollapseScale {
                lags,
                reference_lag,
                binning,
                bracket,
                ..
            } => {
                lags_positive(lags)?;
                check_binning(field, binning)?;
                if !lags.contains(reference_lag) {
                    return Err(ConfigError::invariant(field, "reference_lag must be one of the lags"));
                }
                if !(bracket[0] > 0.0 && bracket[1] > bracket[0]) {
                    return Err(ConfigError::invariant(field, "bracket must be positive and increasing"));
                }
                Ok(())
            }
            Measure::GenoaPhase { gains, .. } if gains.is_empty() || gains.iter().any(|g| !(*g > 0.0)) => {
                Err(ConfigError::invariant(field, "gains must be a non-empty list of positive numbers"))
            }
            Measure::GenoaHysteresis { gains } => {
                if gains.len() < 2 || gains.iter().any(|g| !(*g > 0.0)) {
                    return Err(ConfigError::invariant(field, "need at least two positive gains"));
                }
                let top = peak_index(gains);
                let rising = gains[..=top].windows(2).all(|w| w[0] < w[1]);
                let falling = gains[top..].windows(2).all(|w| w[0] > w[1]);
                if rising && falling {
                    Ok(())
                } else {
                    Err(ConfigError::invariant(field, "gains must strictly rise, then strictly fall"))
                }
            }
            Measure::GenoaCritical {
                ratios,
                lo,
                hi,
                iterations,
            } => {
                if ratios.is_empty() || ratios.iter().any(|b| !(*b > 2.0)) {
                    return Err(ConfigError::invariant(
                        field,
                        "every ratio b must exceed 2: trades impossible otherwise",
                    ));
                }
                if !(*lo > 0.0 && hi > lo) || *iterations < 1 {
                    return Err(ConfigError::invariant(field, "need 0 < lo < hi and at least one iteration"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Rejects measures that make no sense for a model.
    pub fn check_model(&self, model: &ModelConfig) -> Result<(), ConfigError> {
        let field = self.name();
        match (self, model) {
            (Measure::EventLog { .. }, ModelConfig::Maslov(_) | ModelConfig::Udm(_)) => Ok(()),
            (Measure::EventLog { .. }, _) => Err(ConfigError::invariant(
                field,
                "order event logs exist only for the adjacent- and uniform-deposition models",
            )),
            (m, ModelConfig::Genoa(_)) if m.is_sweep() => Ok(()),
            (m, _) if m.is_sweep() => Err(ConfigError::invariant(field, "needs a genoa model")),
            _ => Ok(()),
        }
    }

    /// Parses `name` or `name:key=value,...` (TOML inline-table syntax).
    pub fn parse_spec(spec: &str) -> Result<Measure, ConfigError> {
        let (name, body) = spec.split_once(':').unwrap_or((spec, ""));
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::invariant("measure", format!("bad estimator name `{name}`")));
        }
        let body = body.trim();
        let sep = if body.is_empty() { "" } else { ", " };
        let text = format!("m = {{ estimator = \"{name}\"{sep}{body} }}");
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::invariant("measure", e.message().trim().to_string()))?;
        let m: Measure = table
            .remove("m")
            .expect("inline table")
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::invariant("measure", e.message().trim().to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

fn check_binning(field: &str, b: &Binning) -> Result<(), ConfigError> {
    match *b {
        Binning::Linear { width } if width >= 1.0 => Ok(()),
        Binning::Log { ratio } if ratio > 1.0 => Ok(()),
        _ => Err(ConfigError::invariant(field, "binning needs width >= 1 or ratio > 1")),
    }
}

fn peak_index(v: &[f64]) -> usize {
    (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

/// One product of a measurement.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    /// Merged across replicas and written as CSV plus JSON side-car.
    Series { stem: String, series: StatSeries, rule: MergeRule },
    /// Written per replica as-is.
    File { stem: String, ext: &'static str, bytes: Vec<u8> },
}

/// What a simulation leaves behind for the estimators.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub path: PricePath,
    pub events: Option<Vec<OrderEvent>>,
    pub meta: serde_json::Map<String, serde_json::Value>,
}

pub fn simulate(model: &ModelConfig, seed: u64, with_events: bool) -> Simulation {
    use crate::models::{bps, maslov, stigler, udm};
    use crate::rng::RngStream;

    let mut rng = RngStream::new(seed);
    let mut meta = serde_json::Map::new();
    let (path, events) = match model {
        ModelConfig::Bps(c) => (bps::run(c, &mut rng), None),
        ModelConfig::Stigler(c) => (stigler::run(c, &mut rng), None),
        ModelConfig::Genoa(c) => {
            let out = genoa::run(c, &mut rng);
            meta.insert("mean_volatility".into(), out.mean_v.into());
            meta.insert("max_volatility".into(), out.max_v.into());
            meta.insert("diverged".into(), out.diverged.into());
            (out.path, None)
        }
        ModelConfig::Maslov(c) if with_events => {
            let (p, e) = maslov::run_logged(c, &mut rng);
            (p, Some(e))
        }
        ModelConfig::Maslov(c) => (maslov::run(c, &mut rng), None),
        ModelConfig::Udm(c) if with_events => {
            let (p, e) = udm::run_logged(c, &mut rng);
            (p, Some(e))
        }
        ModelConfig::Udm(c) => (udm::run(c, &mut rng), None),
    };
    meta.insert("trades".into(), path.trades.len().into());
    Simulation { path, events, meta }
}

/// Keeps the lags `fits` accepts and records the rest in the metadata.
fn feasible(lags: Vec<usize>, fits: impl Fn(usize) -> bool, context: &str) -> Result<(Vec<usize>, Vec<usize>), RunError> {
    let (keep, drop): (Vec<usize>, Vec<usize>) = lags.into_iter().partition(|&l| fits(l));
    if keep.is_empty() {
        return Err(RunError::stats(
            context,
            StatsError::InvalidArgument("the path is too short for every requested lag".into()),
        ));
    }
    Ok((keep, drop))
}

fn series(stem: impl Into<String>, mut s: StatSeries, rule: MergeRule, dropped: &[usize]) -> Artifact {
    if !dropped.is_empty() {
        s.set_meta("lags_dropped", dropped.to_vec());
    }
    Artifact::Series {
        stem: stem.into(),
        series: s,
        rule,
    }
}

/// Applies a path-reading measure. The lag lists are trimmed to what the
/// path length supports.
pub fn apply(measure: &Measure, sim: &Simulation) -> Result<Vec<Artifact>, RunError> {
    let path = &sim.path;
    let name = measure.name();
    let st = |e: StatsError| RunError::stats(name, e);
    let n = path.len();
    let out = match measure {
        Measure::Path { .. } => {
            let mut x = Vec::new();
            let mut t = Vec::new();
            path.write_csv(&mut x).expect("in-memory write");
            path.write_trades_csv(&mut t).expect("in-memory write");
            vec![
                Artifact::File {
                    stem: "pricepath".into(),
                    ext: "csv",
                    bytes: x,
                },
                Artifact::File {
                    stem: "trades".into(),
                    ext: "csv",
                    bytes: t,
                },
            ]
        }
        Measure::EventLog { .. } => {
            let events = sim.events.as_deref().unwrap_or(&[]);
            let mut bytes = Vec::new();
            write_event_log(events, &mut bytes).expect("in-memory write");
            vec![Artifact::File {
                stem: "events".into(),
                ext: "csv",
                bytes,
            }]
        }
        Measure::ReturnDistribution { lags, mode, binning } => {
            let len = match mode {
                ReturnMode::PerStep => n,
                ReturnMode::PerTrade => path.trades.len(),
            };
            let (keep, dropped) = feasible(lags.clone(), |l| l < len, name)?;
            let mut out = Vec::new();
            for lag in keep {
                let r = abs_returns(path, lag, *mode).map_err(st)?;
                let mut s = Histogram::of_integers(&r, *binning).to_series(&format!("return_distribution_lag{lag}"));
                s.set_meta("lag", lag);
                s.set_meta("lag_time", lag as f64 * lag_unit(path, *mode));
                out.push(series(format!("return_distribution_lag{lag}"), s, MergeRule::ZeroFill, &[]));
            }
            if let Some(Artifact::Series { series: s, .. }) = out.first_mut() {
                if !dropped.is_empty() {
                    s.set_meta("lags_dropped", dropped);
                }
            }
            out
        }
        Measure::HurstSimplified { lags, layout } | Measure::HurstNormalized { lags, layout } => {
            let spec = lags.clone().unwrap_or(LagSpec::Range {
                min: 1,
                max: (n.saturating_sub(1) / 4).max(1),
                per_decade: 5,
            });
            let (keep, dropped) = feasible(spec.resolve(), |l| n >= 4 * l + 1, name)?;
            let s = if matches!(measure, Measure::HurstSimplified { .. }) {
                hurst_simplified(path, &keep, *layout).map_err(st)?
            } else {
                hurst_normalized(path, &keep, *layout).map_err(st)?.series
            };
            vec![series(name, s, MergeRule::Pointwise, &dropped)]
        }
        Measure::AbsAutocorrelation { lags } | Measure::ReturnAutocorrelation { lags } => {
            let r = n.saturating_sub(1);
            let spec = lags.clone().unwrap_or(LagSpec::Range {
                min: 1,
                max: (r / 10).max(1),
                per_decade: 5,
            });
            let (keep, dropped) = feasible(spec.resolve(), |l| r >= 10 * l, name)?;
            let mut s = if matches!(measure, Measure::AbsAutocorrelation { .. }) {
                let mut s = abs_return_autocorrelation(path, &keep).map_err(st)?;
                s.set_meta("noise_level", abs_return_noise(path));
                s
            } else {
                return_autocorrelation(path, &keep).map_err(st)?
            };
            s.name = name.to_string();
            vec![series(name, s, MergeRule::Pointwise, &dropped)]
        }
        Measure::Interevent { ratio } => {
            let ie = interevent_statistics(path, *ratio, 3).map_err(st)?;
            let mut cr = ie.conditional_return;
            cr.set_meta("mean_wait", ie.mean_wait);
            vec![
                series("waiting_time_cdf", ie.waiting_cdf, MergeRule::Step, &[]),
                series("conditional_return", cr, MergeRule::Pointwise, &[]),
            ]
        }
        Measure::TailExponent { quantile } => {
            let mut abs: Vec<f64> = path
                .returns()
                .into_iter()
                .filter(|&r| r != 0)
                .map(|r| r.unsigned_abs() as f64)
                .collect();
            abs.sort_by(f64::total_cmp);
            if abs.is_empty() {
                return Err(st(StatsError::EmptyWindow));
            }
            let xmin = abs[((abs.len() as f64 * quantile) as usize).min(abs.len() - 1)];
            let fit = hill_tail(&abs, xmin, false).ok_or_else(|| st(StatsError::InsufficientPoints { need: 2, got: 0 }))?;
            let mut s = StatSeries::new(name);
            s.push(*quantile, fit.alpha, fit.n_tail as u64);
            s.set_meta("xmin", fit.xmin);
            vec![series(name, s, MergeRule::Pointwise, &[])]
        }
        Measure::CutoffTest { xmin } => {
            let abs = abs_returns(path, 1, ReturnMode::PerStep).map_err(st)?;
            let t = power_law_cutoff_test(&abs, *xmin).map_err(st)?;
            let mut s = StatSeries::new(name);
            s.push(*xmin as f64, t.p_value, t.n_tail as u64);
            s.set_meta("statistic", t.statistic);
            s.set_meta("exponent_pure", t.exponent_pure);
            s.set_meta("exponent_cutoff", t.exponent_cutoff);
            s.set_meta("cutoff_rate", t.lambda);
            vec![series(name, s, MergeRule::Pointwise, &[])]
        }
        Measure::CollapseScale {
            lags,
            reference_lag,
            binning,
            min_count,
            bracket,
        } => {
            let (keep, dropped) = feasible(lags.clone(), |l| l < n, name)?;
            if !keep.contains(reference_lag) {
                return Err(st(StatsError::InvalidArgument("path too short for the reference lag".into())));
            }
            let hists: Vec<(usize, Histogram)> = keep
                .iter()
                .map(|&lag| Ok((lag, Histogram::of_integers(&abs_returns(path, lag, ReturnMode::PerStep)?, *binning))))
                .collect::<Result<_, StatsError>>()
                .map_err(st)?;
            let reference = &hists.iter().find(|(l, _)| l == reference_lag).expect("kept").1;
            let mut s = StatSeries::new(name);
            let mut scales = Vec::new();
            for (lag, h) in &hists {
                let scale = if lag == reference_lag {
                    1.0
                } else {
                    fit_scale(reference, 1.0, h, *min_count, bracket[0], bracket[1]).map_err(st)?
                };
                s.push(*lag as f64, scale, h.total);
                scales.push(scale);
            }
            let curves: Vec<(&Histogram, f64)> = hists.iter().map(|(_, h)| h).zip(scales.iter().copied()).collect();
            if curves.len() >= 2 {
                s.set_meta("collapse_error", collapse_error(&curves, *min_count).map_err(st)?);
                let xs: Vec<f64> = keep.iter().map(|&l| (l as f64).ln()).collect();
                let ys: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
                s.set_meta("scaling_exponent", linear_fit(&xs, &ys).slope);
            }
            vec![series(name, s, MergeRule::Pointwise, &dropped)]
        }
        Measure::GenoaPhase { .. } | Measure::GenoaHysteresis { .. } | Measure::GenoaCritical { .. } => {
            unreachable!("sweep measures do not read a path")
        }
    };
    Ok(out)
}

fn lag_unit(path: &PricePath, mode: ReturnMode) -> f64 {
    match mode {
        ReturnMode::PerStep => path.sample_dt(),
        ReturnMode::PerTrade => 1.0,
    }
}

/// Runs a sweep measure from `base` with `seed`.
pub fn apply_sweep(measure: &Measure, base: &GenoaConfig, seed: u64) -> Vec<Artifact> {
    match measure {
        Measure::GenoaPhase { gains, quantile } => {
            let mut order: Vec<usize> = (0..gains.len()).collect();
            order.sort_by(|&a, &b| gains[a].total_cmp(&gains[b]));
            let sorted: Vec<f64> = order.iter().map(|&k| gains[k]).collect();
            let table = genoa::sweep_gc(base, &sorted, seed, *quantile);
            let mut vol = StatSeries::new("phase_volatility");
            let mut alpha = StatSeries::new("phase_alpha");
            let mut diverged = Vec::new();
            for p in &table.points {
                vol.push(p.gain, p.mean_v, base.steps.max(1));
                if let Some(a) = p.alpha {
                    alpha.push(p.gain, a, base.steps.max(1));
                }
                if p.diverged {
                    diverged.push(p.gain);
                }
            }
            for s in [&mut vol, &mut alpha] {
                s.set_meta("gc_divergence", table.gc_divergence);
                s.set_meta("gc_extrapolated", table.gc_extrapolated);
                s.set_meta("diverged_gains", diverged.clone());
            }
            let mut out = vec![series("phase_volatility", vol, MergeRule::Pointwise, &[])];
            if !alpha.is_empty() {
                out.push(series("phase_alpha", alpha, MergeRule::Pointwise, &[]));
            }
            out
        }
        Measure::GenoaHysteresis { gains } => {
            let points = genoa::hysteresis(base, gains, seed);
            let top = peak_index(gains);
            let branch = |label: &str, pts: Vec<&genoa::SweepPoint>| {
                let mut s = StatSeries::new(label);
                let mut pts = pts;
                pts.sort_by(|a, b| a.gain.total_cmp(&b.gain));
                let mut diverged = Vec::new();
                for p in pts {
                    s.push(p.gain, p.mean_v, base.steps.max(1));
                    if p.diverged {
                        diverged.push(p.gain);
                    }
                }
                s.set_meta("diverged_gains", diverged);
                s
            };
            let up = branch("hysteresis_up", points[..=top].iter().collect());
            let down = branch("hysteresis_down", points[top..].iter().collect());
            vec![
                series("hysteresis_up", up, MergeRule::Pointwise, &[]),
                series("hysteresis_down", down, MergeRule::Pointwise, &[]),
            ]
        }
        Measure::GenoaCritical {
            ratios,
            lo,
            hi,
            iterations,
        } => {
            let mut sorted = ratios.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            let gcs = crate::par::map_indexed(sorted.len(), |k| {
                let mut cfg = base.clone();
                cfg.ratio = sorted[k];
                genoa::bisect_gc(&cfg, *lo, *hi, *iterations, seed)
            });
            let mut s = StatSeries::new("inverse_critical_gain");
            for (b, gc) in sorted.iter().zip(&gcs) {
                s.push(*b, 1.0 / gc, 1);
            }
            s.set_meta("critical_gains", gcs);
            vec![series("inverse_critical_gain", s, MergeRule::Pointwise, &[])]
        }
        _ => unreachable!("path measures need a simulation"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings() {
        assert_eq!(Measure::parse_spec("path").unwrap(), Measure::Path {});
        let m = Measure::parse_spec("return_distribution:lags=[1,10],mode=\"per_trade\"").unwrap();
        assert_eq!(
            m,
            Measure::ReturnDistribution {
                lags: vec![1, 10],
                mode: ReturnMode::PerTrade,
                binning: Binning::LOG_DEFAULT
            }
        );
        let m = Measure::parse_spec("hurst_normalized:lags={min=1,max=100,per_decade=2}").unwrap();
        assert!(matches!(m, Measure::HurstNormalized { lags: Some(LagSpec::Range { max: 100, .. }), .. }));
        assert!(Measure::parse_spec("nonsense").is_err());
        assert!(Measure::parse_spec("interevent:ratio=1.0").is_err());
        assert!(Measure::parse_spec("path:extra=1").is_err());
    }

    #[test]
    fn hysteresis_gains_must_rise_then_fall() {
        let ok = Measure::GenoaHysteresis {
            gains: vec![1.0, 2.0, 3.0, 2.0, 1.0],
        };
        assert!(ok.validate().is_ok());
        let bad = Measure::GenoaHysteresis {
            gains: vec![1.0, 3.0, 2.0, 3.0],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn infeasible_lags_are_dropped_and_reported() {
        let sim = Simulation {
            path: PricePath::from_prices((0..101).map(|k| (k % 3) as i64).collect()),
            events: None,
            meta: Default::default(),
        };
        let m = Measure::HurstSimplified {
            lags: Some(LagSpec::List(vec![5, 25, 50])),
            layout: WindowLayout::Disjoint,
        };
        let out = apply(&m, &sim).unwrap();
        let Artifact::Series { series, .. } = &out[0] else { panic!() };
        assert_eq!(series.xs(), vec![5.0, 25.0]);
        assert_eq!(series.meta["lags_dropped"], serde_json::json!([50]));
        let m = Measure::HurstSimplified {
            lags: Some(LagSpec::List(vec![500])),
            layout: WindowLayout::Disjoint,
        };
        assert!(apply(&m, &sim).is_err());
    }
}
