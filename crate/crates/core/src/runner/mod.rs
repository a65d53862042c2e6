//! Experiment runner: simulates every parameter point and replica, applies
//! the requested estimators, merges replicas and writes the results along
//! with a manifest of content digests.
//!
//! Replica `k` of an experiment with seed `S` runs on seed `S + k`. Every
//! parameter point reuses the same replica seeds. Replicas run in parallel
//! when the `parallel` feature is on; their results are merged in replica
//! order, so the output never depends on scheduling or thread count.

pub mod config;
pub mod measure;
pub mod presets;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, RunError};
use crate::par;
use crate::path::{PricePath, Trade};
use crate::stats::series::StatSeries;

pub use config::{parse_config, ExperimentConfig, ModelConfig, Overrides, Point};
pub use measure::{Artifact, LagSpec, Measure};
pub use presets::{list_presets, preset, Preset};

/// Loads an experiment from a file path or inline document text.
pub fn load_config(source: &str, overrides: Overrides) -> Result<ExperimentConfig, RunError> {
    let path = Path::new(source);
    if !source.contains('\n') && path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Ok(parse_config(&text, overrides)?)
    } else {
        Ok(parse_config(source, overrides)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub version: String,
    pub scale: u64,
    pub seed: Option<u64>,
    pub replica_seeds: Vec<u64>,
    /// The experiment as run, after scaling.
    pub config: Value,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileDigest>,
}

impl RunManifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn read(dir: &Path) -> Result<Self, RunError> {
        let p = dir.join(Self::FILE);
        let text = fs::read_to_string(&p).map_err(|e| RunError::io(&p, e))?;
        serde_json::from_str(&text).map_err(|e| RunError::Input {
            path: p.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Files whose current digest no longer matches the manifest.
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| fs::read(dir.join(&f.path)).map(|b| sha256_hex(&b)).ok().as_deref() != Some(&f.sha256))
            .map(|f| f.path.clone())
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Divides run lengths and burn-in.
    pub scale: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            scale: 1,
            threads: None,
        }
    }
}

struct Writer {
    root: PathBuf,
    files: Vec<FileDigest>,
}

impl Writer {
    fn new(root: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(root).map_err(|e| RunError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), RunError> {
        let p = self.root.join(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        }
        fs::write(&p, bytes).map_err(|e| RunError::io(&p, e))?;
        self.files.push(FileDigest {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn write_series(&mut self, prefix: &str, stem: &str, s: &StatSeries) -> Result<(), RunError> {
        self.write(&format!("{prefix}{stem}.csv"), s.to_csv().as_bytes())?;
        self.write(&format!("{prefix}{stem}.json"), s.sidecar_json().as_bytes())
    }

    fn finish(self, mut manifest: RunManifest) -> Result<RunManifest, RunError> {
        manifest.files = self.files;
        let p = self.root.join(RunManifest::FILE);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&p, text).map_err(|e| RunError::io(&p, e))?;
        Ok(manifest)
    }
}

/// Per-replica products, tagged with the index of the measure that made them.
type ReplicaOutput = (Vec<(usize, Artifact)>, serde_json::Map<String, Value>);

fn run_replica(cfg: &ExperimentConfig, point: &Point, seed: u64) -> Result<ReplicaOutput, RunError> {
    let mut out = Vec::new();
    let mut sim_meta = serde_json::Map::new();
    let needs_path = cfg.measures.iter().any(|m| !m.is_sweep());
    if needs_path {
        let with_events = cfg.measures.iter().any(|m| matches!(m, Measure::EventLog { .. }));
        let sim = measure::simulate(&point.model, seed, with_events);
        for (i, m) in cfg.measures.iter().enumerate().filter(|(_, m)| !m.is_sweep()) {
            out.extend(measure::apply(m, &sim)?.into_iter().map(|a| (i, a)));
        }
        sim_meta = sim.meta;
    }
    if let ModelConfig::Genoa(base) = &point.model {
        for (i, m) in cfg.measures.iter().enumerate().filter(|(_, m)| m.is_sweep()) {
            out.extend(measure::apply_sweep(m, base, seed).into_iter().map(|a| (i, a)));
        }
    }
    Ok((out, sim_meta))
}

/// Runs an experiment and writes its results under `options.out_dir`.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<RunManifest, RunError> {
    let run = || run_inner(config, options);
    match options.threads {
        Some(t) => par::with_threads(t, run),
        None => run(),
    }
}

fn run_inner(config: &ExperimentConfig, options: &RunOptions) -> Result<RunManifest, RunError> {
    let start = Instant::now();
    let mut cfg = config.clone();
    cfg.scale_down(options.scale);
    let seeds = cfg.replica_seeds();
    let mut writer = Writer::new(&options.out_dir)?;

    for point in &cfg.points {
        let results = par::map_indexed(seeds.len(), |k| run_replica(&cfg, point, seeds[k]));
        let mut replicas = Vec::with_capacity(results.len());
        for (k, r) in results.into_iter().enumerate() {
            replicas.push(r.map_err(|e| RunError::Replica {
                replica: k,
                seed: seeds[k],
                source: Box::new(e),
            })?);
        }
        let prefix = if point.label.is_empty() {
            String::new()
        } else {
            format!("{}/", point.label)
        };
        let sim_meta: Vec<Value> = replicas.iter().map(|r| Value::Object(r.1.clone())).collect();
        write_point(&mut writer, &cfg, point, &prefix, &seeds, &replicas, &sim_meta)?;
    }

    let manifest = RunManifest {
        name: cfg.name.clone(),
        version: crate::VERSION.to_string(),
        scale: options.scale.max(1),
        seed: Some(cfg.seed),
        replica_seeds: seeds,
        config: serde_json::to_value(&cfg).expect("config serializes"),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: Vec::new(),
    };
    writer.finish(manifest)
}

fn write_point(
    writer: &mut Writer,
    cfg: &ExperimentConfig,
    point: &Point,
    prefix: &str,
    seeds: &[u64],
    replicas: &[ReplicaOutput],
    sim_meta: &[Value],
) -> Result<(), RunError> {
    // artifacts are keyed by stem, in order of first appearance
    let mut stems: Vec<(usize, String)> = Vec::new();
    for (arts, _) in replicas {
        for (i, a) in arts {
            let stem = match a {
                Artifact::Series { stem, .. } => stem,
                Artifact::File { stem, .. } => stem,
            };
            if !stems.iter().any(|(_, s)| s == stem) {
                stems.push((*i, stem.clone()));
            }
        }
    }
    for (mi, stem) in stems {
        let measure = &cfg.measures[mi];
        let mut found: Vec<(usize, &Artifact)> = Vec::new();
        for (k, (arts, _)) in replicas.iter().enumerate() {
            for (_, a) in arts {
                let s = match a {
                    Artifact::Series { stem, .. } | Artifact::File { stem, .. } => stem,
                };
                if *s == stem {
                    found.push((k, a));
                }
            }
        }
        match found[0].1 {
            Artifact::Series { rule, .. } => {
                let parts: Vec<StatSeries> = found
                    .iter()
                    .filter_map(|(_, a)| match a {
                        Artifact::Series { series, .. } => Some(series.clone()),
                        _ => None,
                    })
                    .collect();
                let (mut merged, _) = StatSeries::merge(&parts, *rule);
                merged.set_meta("model", point.model.kind());
                merged.set_meta("params", point.model.to_json());
                merged.set_meta("point", point.label.clone());
                merged.set_meta("seed", cfg.seed);
                merged.set_meta("replica_seeds", seeds.to_vec());
                merged.set_meta("estimator", measure.name());
                merged.set_meta("window", serde_json::to_value(measure).expect("measure serializes"));
                if sim_meta.iter().any(|m| m.as_object().is_some_and(|o| !o.is_empty())) {
                    merged.set_meta("simulation", sim_meta.to_vec());
                }
                merged.set_meta("version", crate::VERSION);
                writer.write_series(prefix, &stem, &merged)?;
            }
            Artifact::File { .. } => {
                for (k, a) in found {
                    if let Artifact::File { stem, ext, bytes } = a {
                        let name = if replicas.len() > 1 {
                            format!("{prefix}{stem}_r{k}.{ext}")
                        } else {
                            format!("{prefix}{stem}.{ext}")
                        };
                        writer.write(&name, bytes)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Reads a `t,price,return` trade file recorded on the time axis of `path`.
pub fn read_trades_csv(input: impl std::io::BufRead, time_unit: f64) -> Result<Vec<Trade>, String> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        let line = line.trim();
        if line.is_empty() || (n == 0 && line.starts_with('t')) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || format!("line {}: expected `t,price,return`", n + 1);
        if cols.len() != 3 {
            return Err(bad());
        }
        let t: f64 = cols[0].parse().map_err(|_| bad())?;
        let price = cols[1].parse().map_err(|_| bad())?;
        let ret = cols[2].parse().map_err(|_| bad())?;
        out.push(Trade {
            step: (t / time_unit).round() as u64,
            price,
            ret,
        });
    }
    Ok(out)
}

/// Price changes of a path taken as its trades. Trades that left the price
/// unchanged cannot be recovered this way.
pub fn trades_from_changes(path: &PricePath) -> Vec<Trade> {
    path.x
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] != w[0])
        .map(|(k, w)| Trade {
            step: path.start_step + (k as u64 + 1) * path.stride,
            price: w[1],
            ret: w[1] - w[0],
        })
        .collect()
}

/// Applies estimators to a recorded price path.
pub fn analyze(
    path_file: &Path,
    trades_file: Option<&Path>,
    measures: &[Measure],
    out_dir: &Path,
) -> Result<RunManifest, RunError> {
    let start = Instant::now();
    if let Some(m) = measures.iter().find(|m| m.is_sweep() || matches!(m, Measure::EventLog { .. })) {
        return Err(ConfigError::invariant(m.name(), "cannot be computed from a recorded path").into());
    }
    if measures.is_empty() {
        return Err(ConfigError::invariant("measure", "give at least one --measure").into());
    }
    let input = |p: &Path, e: String| RunError::Input {
        path: p.display().to_string(),
        message: e,
    };
    let f = fs::File::open(path_file).map_err(|e| RunError::io(path_file, e))?;
    let mut path = PricePath::read_csv(BufReader::new(f)).map_err(|e| input(path_file, e))?;
    path.trades = match trades_file {
        Some(tp) => {
            let f = fs::File::open(tp).map_err(|e| RunError::io(tp, e))?;
            read_trades_csv(BufReader::new(f), path.time_unit).map_err(|e| input(tp, e))?
        }
        None => trades_from_changes(&path),
    };
    let sim = measure::Simulation {
        path,
        events: None,
        meta: Default::default(),
    };
    let mut writer = Writer::new(out_dir)?;
    let source = json!({
        "path": path_file.display().to_string(),
        "trades": trades_file.map(|p| p.display().to_string()),
    });
    for m in measures {
        for a in measure::apply(m, &sim)? {
            match a {
                Artifact::Series { stem, mut series, .. } => {
                    series.set_meta("model", "recorded");
                    series.set_meta("params", source.clone());
                    series.set_meta("seed", Value::Null);
                    series.set_meta("estimator", m.name());
                    series.set_meta("window", serde_json::to_value(m).expect("measure serializes"));
                    series.set_meta("version", crate::VERSION);
                    writer.write_series("", &stem, &series)?;
                }
                Artifact::File { stem, ext, bytes } => writer.write(&format!("{stem}.{ext}"), &bytes)?,
            }
        }
    }
    let manifest = RunManifest {
        name: "analyze".into(),
        version: crate::VERSION.to_string(),
        scale: 1,
        seed: None,
        replica_seeds: Vec::new(),
        config: json!({ "source": source, "measures": measures }),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        files: Vec::new(),
    };
    writer.finish(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
        name = "small"
        seed = 11
        replicas = 2
        [model]
        kind = "maslov"
        q = 0.01
        n_bar = 50
        steps = 20000
        [[measure]]
        estimator = "return_distribution"
        lags = [1, 10]
        [[measure]]
        estimator = "hurst_simplified"
        [[measure]]
        estimator = "path"
    "#;

    #[test]
    fn writes_series_sidecars_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(SMALL, Overrides::default()).unwrap();
        let m = run_experiment(&cfg, &RunOptions::new(dir.path())).unwrap();
        assert_eq!(m.replica_seeds, vec![11, 12]);
        let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        for want in [
            "return_distribution_lag1.csv",
            "return_distribution_lag10.json",
            "hurst_simplified.csv",
            "pricepath_r0.csv",
            "trades_r1.csv",
        ] {
            assert!(names.contains(&want), "{want} missing from {names:?}");
        }
        assert!(m.mismatches(dir.path()).is_empty());
        let side: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("hurst_simplified.json")).unwrap()).unwrap();
        for key in ["model", "params", "seed", "estimator", "window", "version", "stderr"] {
            assert!(side.get(key).is_some(), "sidecar lacks {key}");
        }
        assert_eq!(RunManifest::read(dir.path()).unwrap().files, m.files);
    }

    #[test]
    fn replica_failure_names_the_replica() {
        let text = SMALL.replace("steps = 20000", "steps = 3").replace("lags = [1, 10]", "lags = [50]");
        let cfg = parse_config(&text, Overrides::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let err = run_experiment(&cfg, &RunOptions::new(dir.path())).unwrap_err();
        assert!(matches!(err, RunError::Replica { replica: 0, seed: 11, .. }), "{err}");
    }

    #[test]
    fn trades_round_trip_through_csv() {
        let mut p = PricePath::from_prices(vec![0, 0, 2, 2, 1]);
        p.trades = trades_from_changes(&p);
        assert_eq!(p.trades.len(), 2);
        let mut buf = Vec::new();
        p.write_trades_csv(&mut buf).unwrap();
        assert_eq!(read_trades_csv(&buf[..], 1.0).unwrap(), p.trades);
    }
}
