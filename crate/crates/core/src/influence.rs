//! Time-windowed editorial and community influences, plus external shocks.
//!
//! Each influence touches exactly one model process: alignment and turnover
//! override `lambda_f` / `lambda_m`, amplification alters the editors'
//! perceived general frequencies, reframing edits news after filtering,
//! trolls and counterspeech scale comment generation, and shocks boost a
//! topic in the general network itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::NewsItem;
use crate::network::{frequency_support, quantize_to_support, RankTable, SemanticNetwork};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfluenceKind {
    Alignment,
    Amplification,
    Reframing,
    Turnover,
    Troll,
    Counterspeech,
    ExternalShock,
}

impl InfluenceKind {
    pub fn name(self) -> &'static str {
        match self {
            InfluenceKind::Alignment => "alignment",
            InfluenceKind::Amplification => "amplification",
            InfluenceKind::Reframing => "reframing",
            InfluenceKind::Turnover => "turnover",
            InfluenceKind::Troll => "troll",
            InfluenceKind::Counterspeech => "counterspeech",
            InfluenceKind::ExternalShock => "external_shock",
        }
    }

    fn needs_topic(self) -> bool {
        matches!(
            self,
            InfluenceKind::Amplification | InfluenceKind::Reframing | InfluenceKind::Troll | InfluenceKind::ExternalShock
        )
    }
}

/// One influence active on the half-open window `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub kind: InfluenceKind,
    pub start: usize,
    pub end: usize,
    pub strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_topic: Option<usize>,
    /// 1-based tier (tier 1 = most relevant).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_tier: Option<usize>,
}

impl ScheduleEntry {
    pub fn new(kind: InfluenceKind, start: usize, end: usize, strength: f64) -> Self {
        Self {
            kind,
            start,
            end,
            strength,
            target_topic: None,
            target_tier: None,
        }
    }

    pub fn with_topic(mut self, topic: usize) -> Self {
        self.target_topic = Some(topic);
        self
    }

    pub fn with_tier(mut self, tier: usize) -> Self {
        self.target_tier = Some(tier);
        self
    }

    #[inline]
    pub fn active_at(&self, t: usize) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InfluenceSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl InfluenceSchedule {
    pub fn neutral() -> Self {
        Self::default()
    }

    pub fn new(entries: Vec<ScheduleEntry>) -> Self {
        Self { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Check windows, strengths and targets against a horizon and network size.
    pub fn validate(&self, horizon: usize, n_topics: usize, n_tiers: usize) -> Result<()> {
        for (k, e) in self.entries.iter().enumerate() {
            let what = format!("schedule entry {k} ({})", e.kind.name());
            if e.start >= e.end || e.end > horizon {
                return Err(Error::config(format!(
                    "{what}: window [{}, {}) must be non-empty and within [0, {horizon})",
                    e.start, e.end
                )));
            }
            if !(e.strength.is_finite() && e.strength > 0.0) {
                return Err(Error::config(format!("{what}: strength must be positive")));
            }
            match e.kind {
                InfluenceKind::Reframing if e.strength > 1.0 => {
                    return Err(Error::config(format!("{what}: probability must be <= 1")));
                }
                InfluenceKind::Amplification | InfluenceKind::ExternalShock if e.strength < 1.0 => {
                    return Err(Error::config(format!("{what}: boost must be >= 1")));
                }
                InfluenceKind::Turnover if e.strength > 1.0 => {
                    return Err(Error::config(format!("{what}: lambda_m must be <= 1")));
                }
                _ => {}
            }
            if e.kind.needs_topic() {
                match e.target_topic {
                    Some(t) if t < n_topics => {}
                    Some(t) => return Err(Error::config(format!("{what}: target topic {t} out of range"))),
                    None => return Err(Error::config(format!("{what}: target_topic is required"))),
                }
            }
            if e.kind == InfluenceKind::Reframing {
                match e.target_tier {
                    Some(q) if (1..=n_tiers).contains(&q) => {}
                    _ => return Err(Error::config(format!("{what}: target_tier must lie in 1..={n_tiers}"))),
                }
            }
        }
        for (a, x) in self.entries.iter().enumerate() {
            for y in &self.entries[a + 1..] {
                if x.kind == y.kind && x.start < y.end && y.start < x.end {
                    return Err(Error::config(format!(
                        "overlapping {} windows [{}, {}) and [{}, {})",
                        x.kind.name(),
                        x.start,
                        x.end,
                        y.start,
                        y.end
                    )));
                }
            }
        }
        Ok(())
    }

    /// First target topic named by any entry.
    pub fn first_target(&self) -> Option<usize> {
        self.entries.iter().find_map(|e| e.target_topic)
    }

    fn active(&self, kind: InfluenceKind, t: usize) -> Option<&ScheduleEntry> {
        self.entries.iter().find(|e| e.kind == kind && e.active_at(t))
    }
}

/// Effective per-step parameters after applying the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedStepParams {
    pub lambda_f: f64,
    pub lambda_m: f64,
    pub s_amp: f64,
    pub amp_target: Option<usize>,
    pub p_ref: f64,
    pub reframe_target: Option<usize>,
    /// 1-based.
    pub reframe_tier: Option<usize>,
    pub s_tr: f64,
    pub troll_target: Option<usize>,
    pub s_cs: f64,
    pub shock_boost: f64,
    pub shock_target: Option<usize>,
}

impl ResolvedStepParams {
    pub fn neutral(lambda_f: f64, lambda_m: f64) -> Self {
        Self {
            lambda_f,
            lambda_m,
            s_amp: 1.0,
            amp_target: None,
            p_ref: 0.0,
            reframe_target: None,
            reframe_tier: None,
            s_tr: 1.0,
            troll_target: None,
            s_cs: 1.0,
            shock_boost: 1.0,
            shock_target: None,
        }
    }

    pub fn troll(&self) -> Option<(f64, usize)> {
        match self.troll_target {
            Some(t) if self.s_tr != 1.0 => Some((self.s_tr, t)),
            _ => None,
        }
    }
}

/// Effective parameters at step `t` given base filter and memory strengths.
pub fn resolve_schedule(schedule: &InfluenceSchedule, lambda_f: f64, lambda_m: f64, t: usize) -> ResolvedStepParams {
    let mut p = ResolvedStepParams::neutral(lambda_f, lambda_m);
    if let Some(e) = schedule.active(InfluenceKind::Alignment, t) {
        p.lambda_f = e.strength;
    }
    if let Some(e) = schedule.active(InfluenceKind::Turnover, t) {
        p.lambda_m = e.strength;
    }
    if let Some(e) = schedule.active(InfluenceKind::Amplification, t) {
        p.s_amp = e.strength;
        p.amp_target = e.target_topic;
    }
    if let Some(e) = schedule.active(InfluenceKind::Reframing, t) {
        p.p_ref = e.strength;
        p.reframe_target = e.target_topic;
        p.reframe_tier = e.target_tier;
    }
    if let Some(e) = schedule.active(InfluenceKind::Troll, t) {
        p.s_tr = e.strength;
        p.troll_target = e.target_topic;
    }
    if let Some(e) = schedule.active(InfluenceKind::Counterspeech, t) {
        p.s_cs = e.strength;
    }
    if let Some(e) = schedule.active(InfluenceKind::ExternalShock, t) {
        p.shock_boost = e.strength;
        p.shock_target = e.target_topic;
    }
    p
}

/// Editors' perceived general frequencies: target scaled by `s_amp`, renormalized.
pub fn apply_amplified_general_view(general_freq: &[f64], s_amp: f64, target_topic: usize) -> Vec<f64> {
    if s_amp == 1.0 {
        return general_freq.to_vec();
    }
    let mut f = general_freq.to_vec();
    f[target_topic] *= s_amp;
    let total: f64 = f.iter().sum();
    f.iter_mut().for_each(|x| *x /= total);
    f
}

/// Replace the tier-`target_tier` topic (1-based) with `target_topic`
/// independently per item with probability `p_ref`. Items already containing
/// the target are left alone. Returns the number of items rewritten.
pub fn apply_reframing(
    news: &mut [NewsItem],
    p_ref: f64,
    target_topic: usize,
    target_tier: usize,
    stream: &mut Stream,
) -> usize {
    if p_ref <= 0.0 {
        return 0;
    }
    let q = target_tier - 1;
    let mut replaced = 0;
    for item in news.iter_mut() {
        if stream.uniform() < p_ref && !item.contains(target_topic) {
            item.tiers[q] = target_topic as u32;
            replaced += 1;
        }
    }
    replaced
}

/// General network with the target frequency boosted, then rank-quantized
/// back onto the `F_f` support.
pub fn apply_external_shock(general: &SemanticNetwork, shock_boost: f64, target_topic: usize, alpha_c: f64) -> SemanticNetwork {
    if shock_boost == 1.0 {
        return general.clone();
    }
    let current = general.ranks();
    let mut f = general.frequency.clone();
    f[target_topic] *= shock_boost;
    let total: f64 = f.iter().sum();
    f.iter_mut().for_each(|x| *x /= total);
    let ranks = RankTable::descending_with(&f, |i| current.rank(i));
    let support = frequency_support(general.n_topics(), alpha_c);
    SemanticNetwork {
        frequency: quantize_to_support(&ranks, &support),
        weight: general.weight.clone(),
        epoch: general.epoch,
    }
}
