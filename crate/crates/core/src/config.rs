//! Scenario files and shipped presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comments::CommentParams;
use crate::error::{Error, Result};
use crate::filter::FilterParams;
use crate::influence::{InfluenceKind, InfluenceSchedule, ScheduleEntry};
use crate::network::InitParams;
use crate::update::UpdateParams;

/// Topic used as the influence target by the presets.
pub const PRESET_TARGET_TOPIC: usize = 24;
/// Tier (1-based) targeted by reframing in the presets.
pub const PRESET_TARGET_TIER: usize = 2;
pub const WINDOW_START: usize = 100;
pub const WINDOW_END: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParameters {
    pub n_topics: usize,
    pub n_events: usize,
    pub n_tiers: usize,
    pub horizon: usize,
    pub lambda_f: f64,
    pub lambda_m: f64,
    pub lambda_e: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        Self {
            n_topics: 250,
            n_events: 1000,
            n_tiers: 3,
            horizon: 500,
            lambda_f: 0.2,
            lambda_m: 0.9,
            lambda_e: 0.5,
        }
    }
}

/// How the dynamics streams of an influenced run relate to its baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Dynamics streams are salted with the scenario name.
    #[default]
    Independent,
    /// Influenced and baseline runs consume identical dynamics streams.
    CommonRandomNumbers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleParams {
    pub replicas: usize,
    pub seed: u64,
    pub pairing: Pairing,
    /// Community snapshot cadence in steps; 0 disables snapshots.
    pub snapshot_every: usize,
    /// Topic followed by the target metrics; defaults to the first scheduled target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_topic: Option<usize>,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            replicas: 500,
            seed: 2024,
            pairing: Pairing::Independent,
            snapshot_every: 25,
            track_topic: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default)]
    pub model: ModelParameters,
    #[serde(default)]
    pub init: InitParams,
    #[serde(default)]
    pub filter: FilterParams,
    #[serde(default)]
    pub comments: CommentParams,
    #[serde(default)]
    pub update: UpdateParams,
    #[serde(default)]
    pub schedule: InfluenceSchedule,
    #[serde(default)]
    pub ensemble: EnsembleParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            description: String::new(),
            model: ModelParameters::default(),
            init: InitParams::default(),
            filter: FilterParams::default(),
            comments: CommentParams::default(),
            update: UpdateParams::default(),
            schedule: InfluenceSchedule::neutral(),
            ensemble: EnsembleParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.n_topics < 10 {
            return Err(Error::config("n_topics must be at least 10"));
        }
        if m.n_tiers < 2 || m.n_tiers > 4 || m.n_tiers > m.n_topics {
            return Err(Error::config("n_tiers must lie in 2..=4"));
        }
        if m.n_events == 0 {
            return Err(Error::config("n_events must be positive"));
        }
        if !(m.lambda_f >= 0.0 && m.lambda_f.is_finite()) {
            return Err(Error::config("lambda_f must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&m.lambda_m) || !(0.0..=1.0).contains(&m.lambda_e) {
            return Err(Error::config("lambda_m and lambda_e must lie in [0, 1]"));
        }
        self.init.validate()?;
        self.filter.validate(m.n_tiers)?;
        if self.filter.output_size(m.n_events) == 0 {
            return Err(Error::config("filter keeps no news at this event count"));
        }
        self.comments.validate(m.n_tiers)?;
        self.update.validate()?;
        self.schedule.validate(m.horizon, m.n_topics, m.n_tiers)?;
        if self.ensemble.replicas == 0 {
            return Err(Error::config("replicas must be at least 1"));
        }
        if let Some(t) = self.ensemble.track_topic {
            if t >= m.n_topics {
                return Err(Error::config(format!("track_topic {t} out of range")));
            }
        }
        Ok(())
    }

    /// Topic followed by target metrics.
    pub fn tracked_topic(&self) -> usize {
        self.ensemble
            .track_topic
            .or_else(|| self.schedule.first_target())
            .unwrap_or(PRESET_TARGET_TOPIC.min(self.model.n_topics - 1))
    }

    /// The same scenario with every influence removed.
    pub fn baseline(&self) -> Self {
        let mut b = self.clone();
        b.name = format!("{}/baseline", self.name);
        b.schedule = InfluenceSchedule::neutral();
        b.ensemble.track_topic = Some(self.tracked_topic());
        b
    }

    pub fn with_lambdas(mut self, lambda_f: f64, lambda_m: f64) -> Self {
        self.model.lambda_f = lambda_f;
        self.model.lambda_m = lambda_m;
        self
    }

    /// Set the strength of every entry of `kind`, or of the last entry when `kind` is `None`.
    pub fn with_strength(mut self, kind: Option<InfluenceKind>, strength: f64) -> Self {
        let last = self.schedule.entries.last().map(|e| e.kind);
        if let Some(kind) = kind.or(last) {
            for e in self.schedule.entries.iter_mut().filter(|e| e.kind == kind) {
                e.strength = strength;
            }
        }
        self
    }

    /// Move the start of every entry of `kind`.
    pub fn with_start(mut self, kind: InfluenceKind, start: usize) -> Self {
        for e in self.schedule.entries.iter_mut().filter(|e| e.kind == kind) {
            e.start = start;
        }
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Names of the shipped scenarios.
pub const PRESETS: &[&str] = &[
    "baseline",
    "alignment",
    "amplification",
    "reframing",
    "turnover",
    "troll",
    "counterspeech",
    "hypersensitive",
    "shock",
];

fn perturbed_start() -> InitParams {
    InitParams {
        sigma_fp: 1.0,
        sigma_wp: 0.05,
        ..InitParams::default()
    }
}

fn scenario(name: &str, description: &str, entries: Vec<ScheduleEntry>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        init: perturbed_start(),
        schedule: InfluenceSchedule::new(entries),
        ..ScenarioConfig::default()
    }
}

/// A shipped scenario by name.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    use InfluenceKind::*;
    let topic = PRESET_TARGET_TOPIC;
    let window = |kind, strength| ScheduleEntry::new(kind, WINDOW_START, WINDOW_END, strength);
    let mut cfg = match name {
        "baseline" => scenario(name, "no influence, perturbed community start", vec![]),
        "alignment" => scenario(
            name,
            "filter strength raised from 0.2 to 0.8 during the window",
            vec![window(Alignment, 0.8)],
        ),
        "amplification" => scenario(
            name,
            "editors perceive the target 25x more popular in the general network",
            vec![window(Amplification, 25.0).with_topic(topic)],
        ),
        "reframing" => scenario(
            name,
            "tier-2 topics of published news replaced by the target with p = 0.04",
            vec![window(Reframing, 0.04).with_topic(topic).with_tier(PRESET_TARGET_TIER)],
        ),
        "turnover" => {
            let mut c = scenario(
                name,
                "memory strength lowered from 0.99 to 0.95 during the window",
                vec![window(Turnover, 0.95)],
            );
            c.model.lambda_m = 0.99;
            c
        }
        "troll" => scenario(
            name,
            "comments on the target boosted 1.5x regardless of the news",
            vec![window(Troll, 1.5).with_topic(topic)],
        ),
        "counterspeech" => {
            let horizon = ModelParameters::default().horizon;
            scenario(
                name,
                "trolls from t=100 on, countered by on-topic amplification from t=150",
                vec![
                    ScheduleEntry::new(Troll, WINDOW_START, horizon, 1.5).with_topic(topic),
                    ScheduleEntry::new(Counterspeech, 150, horizon, 3.0),
                ],
            )
        }
        "hypersensitive" => {
            let mut c = scenario(name, "filter actively avoiding the general network", vec![]);
            c.model.lambda_f = 3.0;
            c.init.sigma_fp = 0.2;
            c
        }
        "shock" => scenario(
            name,
            "external event boosts the target in the general network",
            vec![window(ExternalShock, 50.0).with_topic(topic)],
        ),
        other => {
            return Err(Error::config(format!(
                "unknown preset '{other}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    };
    cfg.ensemble.track_topic = Some(topic);
    cfg.validate()?;
    Ok(cfg)
}
