//! Plain-text output tables and the run manifest.
//!
//! Numbers are written as `{:.16e}`, seventeen significant digits, so every
//! `f64` parses back to the identical value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::ensemble::{Ensemble, RunManifest};
use crate::error::{Error, Result};
use crate::metrics::Trajectory;
use crate::metrics::EnsembleStats;
use crate::network::SemanticNetwork;

pub const METRICS_FILE: &str = "metrics.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const PROFILES_FILE: &str = "profiles.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub const METRICS_HEADER: &str = "step,metric,mean,std,n";
pub const TRAJECTORY_HEADER: &str = "step,x,y,smoothed_x,smoothed_y";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        msg: format!("line {line}: {msg}"),
    }
}

/// Metric table, metric-major then step, in `names` order.
pub fn metrics_table(names: &[String], stats: &[EnsembleStats]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for (name, s) in names.iter().zip(stats) {
        for t in 0..s.len() {
            let _ = writeln!(out, "{t},{name},{},{},{}", fmt_f64(s.mean[t]), fmt_f64(s.std[t]), s.n);
        }
    }
    out
}

/// Parse a metric table back into named statistics, preserving first-seen order.
pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<(String, EnsembleStats)>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(METRICS_HEADER) {
        return Err(parse_err(path, 1, format!("expected header `{METRICS_HEADER}`")));
    }
    let mut out: Vec<(String, EnsembleStats)> = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        let [step, name, mean, std, n] = fields[..] else {
            return Err(parse_err(path, lineno, "expected 5 fields"));
        };
        let step: usize = step.parse().map_err(|e| parse_err(path, lineno, e))?;
        let mean: f64 = mean.parse().map_err(|e| parse_err(path, lineno, e))?;
        let std: f64 = std.parse().map_err(|e| parse_err(path, lineno, e))?;
        let n: usize = n.parse().map_err(|e| parse_err(path, lineno, e))?;
        let idx = match out.iter().position(|(m, _)| m == name) {
            Some(idx) => idx,
            None => {
                out.push((
                    name.to_string(),
                    EnsembleStats {
                        mean: Vec::new(),
                        std: Vec::new(),
                        n,
                    },
                ));
                out.len() - 1
            }
        };
        let s = &mut out[idx].1;
        if step != s.mean.len() {
            return Err(parse_err(path, lineno, format!("step {step} out of order for {name}")));
        }
        s.mean.push(mean);
        s.std.push(std);
    }
    Ok(out)
}

pub fn trajectory_table(trajectory: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for (t, p) in trajectory.points.iter().enumerate() {
        let (sx, sy) = trajectory
            .smoothed
            .get(t)
            .map_or((String::new(), String::new()), |s| (fmt_f64(s[0]), fmt_f64(s[1])));
        let _ = writeln!(out, "{t},{},{},{sx},{sy}", fmt_f64(p[0]), fmt_f64(p[1]));
    }
    out
}

/// Parse a trajectory table. Missing smoothed columns end the smoothed series.
pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(TRAJECTORY_HEADER) {
        return Err(parse_err(path, 1, format!("expected header `{TRAJECTORY_HEADER}`")));
    }
    let mut points = Vec::new();
    let mut smoothed = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(parse_err(path, lineno, "expected 5 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(path, lineno, e));
        points.push([num(f[1])?, num(f[2])?]);
        if !f[3].is_empty() {
            smoothed.push([num(f[3])?, num(f[4])?]);
        }
    }
    Ok(Trajectory { points, smoothed })
}

/// Mean comment profiles, one row per step and one column per topic.
pub fn profiles_table(profiles: &[Vec<f64>]) -> String {
    let n = profiles.first().map_or(0, Vec::len);
    let mut out = String::from("step");
    for j in 0..n {
        let _ = write!(out, ",topic{j}");
    }
    out.push('\n');
    for (t, p) in profiles.iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in p {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn read_profiles(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let row: std::result::Result<Vec<f64>, _> = line.split(',').skip(1).map(str::parse).collect();
        out.push(row.map_err(|e| parse_err(path, i + 1, e))?);
    }
    Ok(out)
}

/// Frequencies (`topic,frequency`) and the weight upper triangle (`i,j,weight`).
pub fn snapshot_tables(net: &SemanticNetwork) -> (String, String) {
    let mut freq = String::from("topic,frequency\n");
    for (i, f) in net.frequency.iter().enumerate() {
        let _ = writeln!(freq, "{i},{}", fmt_f64(*f));
    }
    let mut weights = String::from("i,j,weight\n");
    for (i, j, w) in net.weight.iter() {
        let _ = writeln!(weights, "{i},{j},{}", fmt_f64(w));
    }
    (freq, weights)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Collects output files, then writes them with a manifest listing their digests.
#[derive(Debug, Default)]
pub struct OutputTree {
    files: BTreeMap<String, String>,
}

impl OutputTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, relative: impl Into<String>, contents: String) {
        self.files.insert(relative.into(), contents);
    }

    pub fn add_ensemble(&mut self, ensemble: &Ensemble) {
        self.add(METRICS_FILE, metrics_table(&ensemble.names, &ensemble.stats));
        if !ensemble.mean_profiles.is_empty() {
            self.add(PROFILES_FILE, profiles_table(&ensemble.mean_profiles));
        }
        for (t, net) in &ensemble.snapshots {
            let (freq, weights) = snapshot_tables(net);
            self.add(format!("{SNAPSHOT_DIR}/t{t:05}_frequency.csv"), freq);
            self.add(format!("{SNAPSHOT_DIR}/t{t:05}_weights.csv"), weights);
        }
    }

    /// Write every file below `dir`, followed by the manifest.
    pub fn write(&self, dir: impl AsRef<Path>, mut manifest: RunManifest) -> Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        manifest.digests.clear();
        for (rel, contents) in &self.files {
            write_file(&dir.join(rel), contents)?;
            manifest.digests.insert(rel.clone(), sha256_hex(contents.as_bytes()));
        }
        let path = dir.join(MANIFEST_FILE);
        write_file(&path, &manifest.to_toml_string())?;
        Ok(path)
    }
}

/// Write an ensemble's tables and manifest into `dir`.
pub fn export_results(ensemble: &Ensemble, manifest: RunManifest, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let mut tree = OutputTree::new();
    tree.add_ensemble(ensemble);
    tree.write(dir, manifest)
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<RunManifest> {
    let path = dir.as_ref().join(MANIFEST_FILE);
    RunManifest::from_toml_str(&read_file(&path)?).map_err(|e| Error::Parse {
        path,
        msg: e.to_string(),
    })
}
