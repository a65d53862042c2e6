//! Experiment documents: parsing, defaults and validation.
//!
//! An experiment is a TOML document:
//!
//! ```toml
//! name = "example"
//! seed = 7            # required
//! replicas = 2        # optional, default 1
//! output = "out"      # optional
//!
//! [model]
//! kind = "maslov"
//! q = 0.0
//! n_bar = 1000
//! steps = 1_000_000   # burn_in optional, model default otherwise
//!
//! [[point]]           # optional parameter sets; each runs the full measure list
//! label = "q0.01"
//! q = 0.01
//!
//! [[measure]]
//! estimator = "hurst_normalized"
//! lags = { min = 1, max = 100000, per_decade = 5 }
//! ```
//!
//! A `[[point]]` table is merged over `[model]`, unless it carries its own
//! `kind`, in which case it replaces the model table outright.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::ConfigError;
use crate::models::bps::BpsConfig;
use crate::models::genoa::GenoaConfig;
use crate::models::maslov::MaslovConfig;
use crate::models::stigler::StiglerConfig;
use crate::models::udm::UdmConfig;
use crate::runner::measure::Measure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Bps(BpsConfig),
    Stigler(StiglerConfig),
    Genoa(GenoaConfig),
    Maslov(MaslovConfig),
    Udm(UdmConfig),
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::Bps(_) => "bps",
            ModelConfig::Stigler(_) => "stigler",
            ModelConfig::Genoa(_) => "genoa",
            ModelConfig::Maslov(_) => "maslov",
            ModelConfig::Udm(_) => "udm",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            ModelConfig::Bps(c) => c.validate(),
            ModelConfig::Stigler(c) => c.validate(),
            ModelConfig::Genoa(c) => c.validate(),
            ModelConfig::Maslov(c) => c.validate(),
            ModelConfig::Udm(c) => c.validate(),
        }
    }

    /// Burn-in used when the document leaves it out.
    pub fn default_burn_in(&self) -> u64 {
        match self {
            ModelConfig::Bps(c) => BpsConfig::default_burn_in(c.length, c.particles),
            ModelConfig::Stigler(c) => 10 * c.lifetime,
            ModelConfig::Genoa(c) => 10 * c.lifetime,
            ModelConfig::Maslov(c) => MaslovConfig::new(c.q, c.n_bar).burn_in,
            ModelConfig::Udm(c) => UdmConfig::default_burn_in(c.q, c.n_bar),
        }
    }

    fn lengths_mut(&mut self) -> (&mut u64, &mut u64) {
        match self {
            ModelConfig::Bps(c) => (&mut c.steps, &mut c.burn_in),
            ModelConfig::Stigler(c) => (&mut c.steps, &mut c.burn_in),
            ModelConfig::Genoa(c) => (&mut c.steps, &mut c.burn_in),
            ModelConfig::Maslov(c) => (&mut c.steps, &mut c.burn_in),
            ModelConfig::Udm(c) => (&mut c.steps, &mut c.burn_in),
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            ModelConfig::Bps(c) => c.steps,
            ModelConfig::Stigler(c) => c.steps,
            ModelConfig::Genoa(c) => c.steps,
            ModelConfig::Maslov(c) => c.steps,
            ModelConfig::Udm(c) => c.steps,
        }
    }

    /// Divides run length and burn-in by `factor` (at least one step kept).
    pub fn scale_down(&mut self, factor: u64) {
        if factor <= 1 {
            return;
        }
        let (steps, burn_in) = self.lengths_mut();
        *steps = (*steps / factor).max(1);
        *burn_in /= factor;
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model config serializes")
    }
}

/// One parameter set of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    pub label: String,
    pub model: ModelConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub replicas: usize,
    pub points: Vec<Point>,
    pub measures: Vec<Measure>,
    pub output: Option<PathBuf>,
    /// Excluded from quick runs.
    pub slow: bool,
}

impl ExperimentConfig {
    /// Seeds of replicas `0..replicas`.
    pub fn replica_seeds(&self) -> Vec<u64> {
        (0..self.replicas as u64).map(|k| self.seed.wrapping_add(k)).collect()
    }

    pub fn scale_down(&mut self, factor: u64) {
        for p in &mut self.points {
            p.model.scale_down(factor);
        }
    }
}

/// Values that replace parts of the document before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
}

/// Parses and validates an experiment document.
pub fn parse_config(text: &str, overrides: Overrides) -> Result<ExperimentConfig, ConfigError> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| located(text, &e))?;
    from_table(doc, overrides)
}

fn located(text: &str, e: &toml::de::Error) -> ConfigError {
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |k| k + 1) + 1;
            ConfigError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        }
        None => ConfigError::Syntax(e.message().to_string()),
    }
}

const TOP_KEYS: &[&str] = &["name", "seed", "replicas", "output", "model", "point", "measure", "slow"];

fn from_table(mut doc: Table, overrides: Overrides) -> Result<ExperimentConfig, ConfigError> {
    if let Some(k) = doc.keys().find(|k| !TOP_KEYS.contains(&k.as_str())) {
        return Err(ConfigError::invariant(k, "unknown top-level key"));
    }
    let name = match doc.remove("name") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(ConfigError::invariant("name", "must be a string")),
        None => "experiment".to_string(),
    };
    let seed = match (overrides.seed, doc.remove("seed")) {
        (Some(s), _) => s,
        (None, Some(Value::Integer(s))) if s >= 0 => s as u64,
        (None, Some(_)) => return Err(ConfigError::invariant("seed", "must be a non-negative integer")),
        (None, None) => {
            return Err(ConfigError::invariant(
                "seed",
                "a seed is required: runs must be reproducible, no implicit entropy is used",
            ))
        }
    };
    let replicas = match doc.remove("replicas") {
        None => 1,
        Some(Value::Integer(r)) if r >= 1 => r as usize,
        Some(_) => return Err(ConfigError::invariant("replicas", "must be an integer of at least 1")),
    };
    let output = match doc.remove("output") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(ConfigError::invariant("output", "must be a path string")),
    };
    let slow = match doc.remove("slow") {
        None => false,
        Some(Value::Boolean(b)) => b,
        Some(_) => return Err(ConfigError::invariant("slow", "must be true or false")),
    };

    let base = match doc.remove("model") {
        Some(Value::Table(t)) => Some(t),
        Some(_) => return Err(ConfigError::invariant("model", "must be a table")),
        None => None,
    };
    let raw_points = match doc.remove("point") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .into_iter()
            .map(|v| match v {
                Value::Table(t) => Ok(t),
                _ => Err(ConfigError::invariant("point", "each point must be a table")),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(ConfigError::invariant("point", "use [[point]] tables")),
    };

    let mut points = Vec::new();
    if raw_points.is_empty() {
        let table = base.ok_or_else(|| ConfigError::invariant("model", "a [model] table is required"))?;
        points.push(Point {
            label: String::new(),
            model: model_from_table(table)?,
        });
    } else {
        for (k, mut p) in raw_points.into_iter().enumerate() {
            let label = match p.remove("label") {
                Some(Value::String(s)) => s,
                Some(_) => return Err(ConfigError::invariant("point.label", "must be a string")),
                None => format!("p{k}"),
            };
            if label.is_empty() || label.contains(['/', '\\']) || label.starts_with('.') {
                return Err(ConfigError::invariant("point.label", "must be a plain, non-empty file name"));
            }
            let table = if p.contains_key("kind") {
                p
            } else {
                let mut t = base
                    .clone()
                    .ok_or_else(|| ConfigError::invariant("model", "points without `kind` need a [model] table"))?;
                t.extend(p);
                t
            };
            let model = model_from_table(table).map_err(|e| in_point(&label, e))?;
            points.push(Point { label, model });
        }
        let mut labels: Vec<&str> = points.iter().map(|p| p.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::invariant("point.label", "labels must be distinct"));
        }
    }

    let measures: Vec<Measure> = match doc.remove("measure") {
        None => Vec::new(),
        Some(v @ Value::Array(_)) => v
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::invariant("measure", e.message().trim().to_string()))?,
        Some(_) => return Err(ConfigError::invariant("measure", "use [[measure]] tables")),
    };
    if measures.is_empty() {
        return Err(ConfigError::invariant("measure", "at least one [[measure]] is required"));
    }
    for m in &measures {
        m.validate()?;
        for p in &points {
            m.check_model(&p.model).map_err(|e| in_point(&p.label, e))?;
        }
    }

    Ok(ExperimentConfig {
        name,
        seed,
        replicas,
        points,
        measures,
        output,
        slow,
    })
}

fn in_point(label: &str, e: ConfigError) -> ConfigError {
    if label.is_empty() {
        return e;
    }
    match e {
        ConfigError::Invariant { field, rule } => ConfigError::Invariant {
            field: format!("point `{label}`: {field}"),
            rule,
        },
        other => other,
    }
}

/// Deserializes a model table, filling in the default burn-in, and checks
/// the model's invariants.
pub fn model_from_table(mut table: Table) -> Result<ModelConfig, ConfigError> {
    if table.get("kind").and_then(Value::as_str) == Some("maslov") && !table.contains_key("removal") {
        table.insert("removal".into(), Value::String("evaporation".into()));
    }
    let has_burn_in = table.contains_key("burn_in");
    if !has_burn_in {
        table.insert("burn_in".into(), Value::Integer(0));
    }
    let mut model: ModelConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::invariant("model", e.message().trim().to_string()))?;
    if !has_burn_in {
        let b = model.default_burn_in();
        *model.lengths_mut().1 = b;
    }
    model.validate()?;
    Ok(model)
}
