//! Many replicas of one scenario, run in parallel and reduced in replica order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::metrics::EnsembleStats;
use crate::network::SemanticNetwork;
use crate::sim::{run_simulation, RunSeeds, SimOptions, SimulationRecord};

/// Replicas are started in batches of `jobs * BATCH_PER_JOB` and folded in
/// index order, which bounds memory and keeps the reduction order fixed.
const BATCH_PER_JOB: usize = 4;

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Run replicas `0..replicas` of `config` and hand each record to `f`,
/// returning the results in replica order. The first failing replica (by
/// index) determines the error.
pub fn run_replicas<T, F>(config: &ScenarioConfig, replicas: usize, jobs: usize, options: &SimOptions, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, SimulationRecord) -> T + Sync,
{
    config.validate()?;
    let pool = pool(jobs)?;
    let results: Vec<Result<T>> = pool.install(|| {
        (0..replicas as u64)
            .into_par_iter()
            .map(|k| run_simulation(config, RunSeeds::for_scenario(config, k), options).map(|rec| f(k, rec)))
            .collect()
    });
    results.into_iter().collect()
}

/// Aggregated output of an ensemble.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub scenario: String,
    pub names: Vec<String>,
    pub stats: Vec<EnsembleStats>,
    pub replicas: usize,
    /// Community snapshots of replica 0.
    pub snapshots: Vec<(usize, SemanticNetwork)>,
    /// Replica-averaged comment profiles, present when requested.
    pub mean_profiles: Vec<Vec<f64>>,
}

impl Ensemble {
    pub fn stats(&self, name: &str) -> Option<&EnsembleStats> {
        self.names.iter().position(|n| n == name).map(|i| &self.stats[i])
    }

    pub fn steps(&self) -> usize {
        self.stats.first().map_or(0, EnsembleStats::len)
    }
}

struct Accumulator {
    names: Vec<String>,
    count: usize,
    mean: Vec<Vec<f64>>,
    m2: Vec<Vec<f64>>,
    profile_sum: Vec<Vec<f64>>,
    snapshots: Vec<(usize, SemanticNetwork)>,
}

impl Accumulator {
    fn push(&mut self, record: SimulationRecord) {
        if self.count == 0 {
            self.names = record.names.clone();
            self.mean = record.values.iter().map(|v| vec![0.0; v.len()]).collect();
            self.m2 = self.mean.clone();
            self.profile_sum = record.profiles.iter().map(|p| vec![0.0; p.len()]).collect();
            self.snapshots = record.snapshots;
        }
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), values) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(&record.values) {
            for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(values) {
                let delta = x - *m;
                *m += delta / n;
                *s += delta * (x - *m);
            }
        }
        for (acc, p) in self.profile_sum.iter_mut().zip(&record.profiles) {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
    }
}

/// Run an ensemble and reduce every tracked metric to a per-step mean and
/// sample standard deviation. The result does not depend on `jobs`.
pub fn run_ensemble(config: &ScenarioConfig, replicas: usize, jobs: usize, options: &SimOptions) -> Result<Ensemble> {
    if replicas == 0 {
        return Err(Error::config("an ensemble needs at least one replica"));
    }
    config.validate()?;
    let pool = pool(jobs)?;
    let mut acc = Accumulator {
        names: Vec::new(),
        count: 0,
        mean: Vec::new(),
        m2: Vec::new(),
        profile_sum: Vec::new(),
        snapshots: Vec::new(),
    };
    let batch = jobs.max(1) * BATCH_PER_JOB;
    let mut start = 0u64;
    while (start as usize) < replicas {
        let end = (start + batch as u64).min(replicas as u64);
        let records: Vec<Result<SimulationRecord>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|k| {
                    // Only replica 0 keeps snapshots.
                    let opts = if k == 0 {
                        options.clone()
                    } else {
                        SimOptions {
                            snapshot_every: 0,
                            ..options.clone()
                        }
                    };
                    run_simulation(config, RunSeeds::for_scenario(config, k), &opts)
                })
                .collect()
        });
        for record in records {
            acc.push(record?);
        }
        start = end;
    }
    let n = acc.count;
    let stats = acc
        .mean
        .into_iter()
        .zip(acc.m2)
        .map(|(mean, m2)| EnsembleStats {
            std: m2
                .iter()
                .map(|&s| if n > 1 { (s / (n - 1) as f64).max(0.0).sqrt() } else { 0.0 })
                .collect(),
            mean,
            n,
        })
        .collect();
    let mean_profiles = acc
        .profile_sum
        .into_iter()
        .map(|p| p.into_iter().map(|v| v / n as f64).collect())
        .collect();
    Ok(Ensemble {
        scenario: config.name.clone(),
        names: acc.names,
        stats,
        replicas: n,
        snapshots: acc.snapshots,
        mean_profiles,
    })
}

/// Everything needed to reproduce an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub master_seed: u64,
    pub replicas: usize,
    pub version: String,
    /// The fully resolved scenario, as TOML.
    pub config: String,
    /// SHA-256 of every other file in the output directory, keyed by relative path.
    pub digests: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(config: &ScenarioConfig, replicas: usize) -> Self {
        Self {
            scenario: config.name.clone(),
            master_seed: config.ensemble.seed,
            replicas,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.to_toml_string(),
            digests: BTreeMap::new(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("bad manifest: {e}")))
    }

    /// The scenario the manifest was produced from.
    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml_str(&self.config)
    }
}
