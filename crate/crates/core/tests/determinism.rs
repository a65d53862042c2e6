//! Same seed, same bytes: models, replica merging and the experiment runner.

use std::collections::BTreeMap;
use std::fs;

use obsim_core::models::bps::{self, BpsConfig};
use obsim_core::models::genoa::{self, GenoaConfig};
use obsim_core::models::maslov::{self, MaslovConfig};
use obsim_core::models::stigler::{self, StiglerConfig};
use obsim_core::models::udm::{self, UdmConfig};
use obsim_core::par::{self, Exec};
use obsim_core::runner::{self, Overrides, RunManifest, RunOptions};
use obsim_core::stats::{abs_return_autocorrelation, log_lags, MergeRule, StatSeries};
use obsim_core::{PricePath, RngStream};
use proptest::prelude::*;

fn all_models(seed: u64) -> Vec<PricePath> {
    let steps = 20_000;
    let mut b = BpsConfig::new(50, 10);
    b.steps = steps;
    let mut s = StiglerConfig::bounded(100, 100);
    s.steps = steps;
    let mut g = GenoaConfig::new(200, 7.0, 40.0);
    g.steps = steps;
    let mut m = MaslovConfig::new(0.01, 100.0);
    m.steps = steps;
    let mut u = UdmConfig::new(1000, 0.9, 100.0);
    u.steps = steps;
    vec![
        bps::run(&b, &mut RngStream::new(seed)),
        stigler::run(&s, &mut RngStream::new(seed)),
        genoa::run(&g, &mut RngStream::new(seed)).path,
        maslov::run(&m, &mut RngStream::new(seed)),
        udm::run(&u, &mut RngStream::new(seed)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn models_repeat_exactly(seed in any::<u64>()) {
        let a = all_models(seed);
        let b = all_models(seed);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn different_seeds_differ() {
    let a = all_models(1);
    let b = all_models(2);
    for (x, y) in a.iter().zip(&b) {
        assert_ne!(x.x, y.x);
    }
}

fn replica(k: usize) -> StatSeries {
    let mut cfg = MaslovConfig::new(0.0, 200.0);
    cfg.steps = 50_000;
    let path = maslov::run(&cfg, &mut RngStream::new(100 + k as u64));
    abs_return_autocorrelation(&path, &log_lags(1, 1000, 5)).unwrap()
}

#[test]
fn merge_does_not_depend_on_scheduling() {
    let seq = par::map_indexed_with(Exec::Sequential, 6, replica);
    let parallel = par::with_threads(3, || par::map_indexed_with(Exec::Parallel, 6, replica));
    assert_eq!(seq, parallel);
    let (a, ea) = StatSeries::merge(&seq, MergeRule::Pointwise);
    let (b, eb) = StatSeries::merge(&parallel, MergeRule::Pointwise);
    assert_eq!(a, b);
    assert_eq!(ea, eb);
    assert!(ea.iter().all(|e| *e > 0.0), "independent replicas should scatter");
}

const EXPERIMENT: &str = r#"
name = "determinism"
seed = 42
replicas = 3

[model]
kind = "maslov"
q = 0.01
n_bar = 100
steps = 20000

[[point]]
label = "a"

[[point]]
label = "b"
q = 0.05

[[measure]]
estimator = "return_distribution"
lags = [1, 10]

[[measure]]
estimator = "hurst_normalized"
lags = [1, 10, 100]

[[measure]]
estimator = "path"
"#;

fn digests(m: &RunManifest) -> BTreeMap<String, String> {
    m.files.iter().map(|f| (f.path.clone(), f.sha256.clone())).collect()
}

#[test]
fn runner_output_is_independent_of_threads() {
    let config = runner::parse_config(EXPERIMENT, Overrides::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, threads| {
        let mut opts = RunOptions::new(dir.path().join(tag));
        opts.threads = Some(threads);
        runner::run_experiment(&config, &opts).unwrap()
    };
    let one = run("one", 1);
    let again = run("again", 1);
    let three = run("three", 3);
    assert_eq!(digests(&one), digests(&again));
    assert_eq!(digests(&one), digests(&three));
    assert_eq!(one.replica_seeds, vec![42, 43, 44]);
    // per-replica paths exist for both points
    for point in ["a", "b"] {
        for k in 0..3 {
            assert!(digests(&one).keys().any(|p| p.contains(point) && p.ends_with(&format!("pricepath_r{k}.csv"))));
        }
    }
}

#[test]
fn seed_override_changes_output() {
    let base = runner::parse_config(EXPERIMENT, Overrides::default()).unwrap();
    let other = runner::parse_config(EXPERIMENT, Overrides { seed: Some(7) }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = runner::run_experiment(&base, &RunOptions::new(dir.path().join("a"))).unwrap();
    let b = runner::run_experiment(&other, &RunOptions::new(dir.path().join("b"))).unwrap();
    assert_eq!(b.replica_seeds, vec![7, 8, 9]);
    assert_ne!(digests(&a), digests(&b));
}

#[test]
fn manifest_detects_tampering() {
    let config = runner::parse_config(EXPERIMENT, Overrides::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    runner::run_experiment(&config, &RunOptions::new(&out)).unwrap();
    let manifest = RunManifest::read(&out).unwrap();
    assert!(manifest.mismatches(&out).is_empty());
    let victim = &manifest.files[0].path;
    let mut bytes = fs::read(out.join(victim)).unwrap();
    bytes.push(b'\n');
    fs::write(out.join(victim), bytes).unwrap();
    assert_eq!(manifest.mismatches(&out), vec![victim.clone()]);
}

#[test]
fn scale_shortens_runs_reproducibly() {
    let config = runner::parse_config(EXPERIMENT, Overrides::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut opts = RunOptions::new(dir.path().join("s1"));
    opts.scale = 10;
    let a = runner::run_experiment(&config, &opts).unwrap();
    opts.out_dir = dir.path().join("s2");
    let b = runner::run_experiment(&config, &opts).unwrap();
    assert_eq!(digests(&a), digests(&b));
    assert_eq!(a.scale, 10);
    let steps = &a.config["points"][0]["model"]["steps"];
    assert_eq!(steps.as_u64(), Some(2000), "{}", a.config);
}
