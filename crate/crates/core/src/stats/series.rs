//! Named `(x, y, count)` tables and their on-disk form: a CSV with header
//! `x,y,count` plus a JSON side-car holding metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatPoint {
    pub x: f64,
    pub y: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSeries {
    pub name: String,
    pub points: Vec<StatPoint>,
    pub meta: BTreeMap<String, Value>,
}

/// How replicas of the same series are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MergeRule {
    /// Average over the replicas that have a point at `x`.
    Pointwise,
    /// A missing point counts as `y = 0` (histogram densities).
    ZeroFill,
    /// Each replica is a right-continuous step function (empirical CDFs).
    Step,
}

impl StatSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            points: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64, count: u64) {
        debug_assert!(
            self.points.last().map_or(true, |p| p.x < x),
            "x must be strictly ascending"
        );
        debug_assert!(count > 0, "retained points need samples");
        self.points.push(StatPoint { x, y, count });
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }

    /// Linear interpolation of `y` at `x`; `None` outside the support.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let pts = &self.points;
        let k = pts.partition_point(|p| p.x < x);
        if k < pts.len() && pts[k].x == x {
            return Some(pts[k].y);
        }
        if k == 0 || k == pts.len() {
            return None;
        }
        let (a, b) = (pts[k - 1], pts[k]);
        Some(a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,count\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.x, p.y, p.count);
        }
        out
    }

    /// Parses the CSV form (metadata is not part of it).
    pub fn from_csv(name: &str, text: &str) -> Result<Self, String> {
        let mut series = StatSeries::new(name);
        for (n, line) in text.lines().enumerate() {
            if n == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(format!("line {}: expected x,y,count", n + 1));
            }
            let bad = |what: &str| format!("line {}: bad {what}", n + 1);
            let x = cols[0].parse().map_err(|_| bad("x"))?;
            let y = cols[1].parse().map_err(|_| bad("y"))?;
            let count = cols[2].parse().map_err(|_| bad("count"))?;
            series.points.push(StatPoint { x, y, count });
        }
        Ok(series)
    }

    /// Side-car JSON: the metadata map plus the series name.
    pub fn sidecar_json(&self) -> String {
        let mut map = serde_json::Map::new();
        map.insert("name".into(), Value::String(self.name.clone()));
        for (k, v) in &self.meta {
            map.insert(k.clone(), v.clone());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("json");
        text.push('\n');
        text
    }

    /// Combines replicas of one series. Returns the merged series (whose
    /// count sums the replicas' counts) and the per-point standard error.
    pub fn merge(replicas: &[StatSeries], rule: MergeRule) -> (StatSeries, Vec<f64>) {
        let first = replicas.first().expect("at least one replica");
        let mut xs: Vec<f64> = replicas
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.x))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();

        let mut merged = StatSeries::new(first.name.clone());
        merged.meta = first.meta.clone();
        merged.set_meta("replicas", replicas.len());
        let mut stderr = Vec::with_capacity(xs.len());
        for &x in &xs {
            let mut ys = Vec::with_capacity(replicas.len());
            let mut count = 0u64;
            for s in replicas {
                let k = s.points.partition_point(|p| p.x < x);
                let hit = s.points.get(k).filter(|p| p.x == x);
                if let Some(p) = hit {
                    count += p.count;
                }
                let y = match (rule, hit) {
                    (_, Some(p)) => Some(p.y),
                    (MergeRule::Pointwise, None) => None,
                    (MergeRule::ZeroFill, None) => Some(0.0),
                    (MergeRule::Step, None) => Some(if k == 0 { 0.0 } else { s.points[k - 1].y }),
                };
                ys.extend(y);
            }
            let n = ys.len() as f64;
            let mean = ys.iter().sum::<f64>() / n;
            let se = if ys.len() > 1 {
                let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            merged.points.push(StatPoint { x, y: mean, count: count.max(1) });
            stderr.push(se);
        }
        merged.set_meta("stderr", stderr.clone());
        (merged, stderr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(points: &[(f64, f64)]) -> StatSeries {
        let mut s = StatSeries::new("s");
        for &(x, y) in points {
            s.push(x, y, 1);
        }
        s
    }

    #[test]
    fn csv_format_and_parse() {
        let s = series(&[(1.0, 0.5), (2.5, 3.0)]);
        assert_eq!(s.to_csv(), "x,y,count\n1,0.5,1\n2.5,3,1\n");
        let back = StatSeries::from_csv("s", &s.to_csv()).unwrap();
        assert_eq!(back.points, s.points);
    }

    #[test]
    fn sidecar_has_metadata() {
        let s = series(&[(1.0, 1.0)]).with_meta("model", "maslov").with_meta("seed", 3);
        let v: Value = serde_json::from_str(&s.sidecar_json()).unwrap();
        assert_eq!(v["model"], "maslov");
        assert_eq!(v["seed"], 3);
        assert_eq!(v["name"], "s");
    }

    #[test]
    fn interpolation() {
        let s = series(&[(0.0, 0.0), (2.0, 4.0)]);
        assert_eq!(s.interpolate(1.0), Some(2.0));
        assert_eq!(s.interpolate(2.0), Some(4.0));
        assert_eq!(s.interpolate(3.0), None);
    }

    #[test]
    fn merge_rules() {
        let a = series(&[(1.0, 1.0), (2.0, 3.0)]);
        let b = series(&[(1.0, 3.0), (3.0, 5.0)]);
        let (m, se) = StatSeries::merge(&[a.clone(), b.clone()], MergeRule::Pointwise);
        assert_eq!(m.ys(), vec![2.0, 3.0, 5.0]);
        assert_eq!(se[0], 1.0);
        let (m, _) = StatSeries::merge(&[a.clone(), b.clone()], MergeRule::ZeroFill);
        assert_eq!(m.ys(), vec![2.0, 1.5, 2.5]);
        let (m, _) = StatSeries::merge(&[a, b], MergeRule::Step);
        assert_eq!(m.ys(), vec![2.0, 3.0, 4.0]);
    }
}
