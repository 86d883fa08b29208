//! One replica of the model, step by step.

use crate::comments::{generate_comment_network, HarmonicBounds, Troll};
use crate::config::{Pairing, ScenarioConfig};
use crate::error::{Error, Result};
use crate::events::{base_event_distribution, evolve_event_distribution, generate_events};
use crate::filter::filter_events;
use crate::influence::{apply_external_shock, resolve_schedule};
use crate::metrics::{comment_topic_profile, kendall_tau_distance, QuantileSets};
use crate::network::{init_community_network, init_general_network, RankTable, SemanticNetwork};
use crate::rng::{derive_substream, stable_hash, SeedSpec, StreamLabel};
use crate::update::update_community;

/// Seeds of one replica. Initial networks come from `init`, everything
/// after from `dynamics`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSeeds {
    pub init: u64,
    pub dynamics: u64,
    pub replica: u64,
}

impl RunSeeds {
    pub fn single(seed: u64, replica: u64) -> Self {
        Self {
            init: seed,
            dynamics: seed,
            replica,
        }
    }

    /// Seeds for replica `replica` of `config`. Scenarios sharing a master
    /// seed share initial networks; their dynamics differ unless paired
    /// with common random numbers.
    pub fn for_scenario(config: &ScenarioConfig, replica: u64) -> Self {
        let master = config.ensemble.seed;
        let dynamics = match config.ensemble.pairing {
            Pairing::CommonRandomNumbers => master,
            Pairing::Independent => master ^ stable_hash(config.name.as_bytes()),
        };
        Self {
            init: master,
            dynamics,
            replica,
        }
    }

    fn stream(&self, label: StreamLabel) -> crate::rng::Stream {
        let seed = match label {
            StreamLabel::InitGeneral | StreamLabel::InitCommunity => self.init,
            _ => self.dynamics,
        };
        derive_substream(SeedSpec::new(seed, self.replica, label))
    }
}

/// What to keep beyond the per-step metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    /// Community snapshot cadence; 0 keeps none.
    pub snapshot_every: usize,
    /// Keep every step's comment topic profile.
    pub keep_profiles: bool,
    /// Accumulate the rank-sorted comment profile and per-tier news counts by community rank.
    pub keep_distributions: bool,
    pub similarity_quantile: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            snapshot_every: 0,
            keep_profiles: false,
            keep_distributions: false,
            similarity_quantile: 0.2,
        }
    }
}

/// Per-step metric names; tier incidences follow as `target_news_tier{q}`.
pub const KD_GENERAL_COMMENT: &str = "kd_general_comment";
pub const KD_GENERAL_COMMUNITY: &str = "kd_general_community";
pub const TARGET_NEWS_SHARE: &str = "target_news_share";
pub const TARGET_COMMENT_SHARE: &str = "target_comment_share";
pub const TARGET_COMMUNITY_RANK: &str = "target_community_rank";
pub const TARGET_SIM_TOP: &str = "target_sim_top";
pub const TARGET_SIM_BOTTOM: &str = "target_sim_bottom";
pub const OVERFLOW_FRACTION: &str = "overflow_fraction";
pub const NEWS_COUNT: &str = "news_count";
pub const REFRAMED_COUNT: &str = "reframed_count";
pub const MEAN_WEIGHT: &str = "mean_weight";
pub const MAX_WEIGHT: &str = "max_weight";
pub const FREQUENCY_SUM: &str = "frequency_sum";

pub fn target_tier_metric(tier: usize) -> String {
    format!("target_news_tier{tier}")
}

/// Metric names recorded for a run with `n_tiers` tiers, in output order.
pub fn metric_names(n_tiers: usize) -> Vec<String> {
    let mut names: Vec<String> = [KD_GENERAL_COMMENT, KD_GENERAL_COMMUNITY, TARGET_NEWS_SHARE]
        .iter()
        .map(|s| s.to_string())
        .collect();
    names.extend((1..=n_tiers).map(target_tier_metric));
    names.extend(
        [
            TARGET_COMMENT_SHARE,
            TARGET_COMMUNITY_RANK,
            TARGET_SIM_TOP,
            TARGET_SIM_BOTTOM,
            OVERFLOW_FRACTION,
            NEWS_COUNT,
            REFRAMED_COUNT,
            MEAN_WEIGHT,
            MAX_WEIGHT,
            FREQUENCY_SUM,
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    names
}

/// Output of one replica.
#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub names: Vec<String>,
    /// `values[m][t]` for metric `names[m]` at step `t`.
    pub values: Vec<Vec<f64>>,
    pub general: SemanticNetwork,
    pub initial_community: SemanticNetwork,
    pub final_community: SemanticNetwork,
    pub snapshots: Vec<(usize, SemanticNetwork)>,
    pub profiles: Vec<Vec<f64>>,
    /// Sum over steps of the comment profile sorted in decreasing order.
    pub sorted_profile_sum: Vec<f64>,
    /// `tier_rank_counts[q][k]`: news whose tier-`q+1` topic had community rank `k+1`.
    pub tier_rank_counts: Vec<Vec<f64>>,
}

impl SimulationRecord {
    pub fn metric(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i].as_slice())
    }

    pub fn steps(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Run one replica for `config.model.horizon` steps.
pub fn run_simulation(config: &ScenarioConfig, seeds: RunSeeds, options: &SimOptions) -> Result<SimulationRecord> {
    config.validate()?;
    let m = &config.model;
    let n = m.n_topics;
    let target = config.tracked_topic();

    let general = init_general_network(n, &config.init, &mut seeds.stream(StreamLabel::InitGeneral))?;
    let mut community = init_community_network(&general, &config.init, &mut seeds.stream(StreamLabel::InitCommunity))?;
    let initial_community = community.clone();
    let sets = QuantileSets::from_initial(&community.weight, target, options.similarity_quantile)?;
    let harmonic = HarmonicBounds::new(n);

    let mut events_stream = seeds.stream(StreamLabel::Events);
    let mut filter_stream = seeds.stream(StreamLabel::Filter);
    let mut reframe_stream = seeds.stream(StreamLabel::Reframe);
    let mut comment_stream = seeds.stream(StreamLabel::Comments);
    let mut noise_stream = seeds.stream(StreamLabel::Noise);

    let names = metric_names(m.n_tiers);
    let mut values = vec![Vec::with_capacity(m.horizon); names.len()];
    let mut snapshots = Vec::new();
    let mut profiles = Vec::new();
    let mut sorted_profile_sum = if options.keep_distributions { vec![0.0; n] } else { Vec::new() };
    let mut tier_rank_counts = if options.keep_distributions {
        vec![vec![0.0; n]; m.n_tiers]
    } else {
        Vec::new()
    };

    let general_ranks = general.ranks();
    let mut event_dist = base_event_distribution(&general_ranks);

    for t in 0..m.horizon {
        if options.snapshot_every > 0 && t % options.snapshot_every == 0 {
            snapshots.push((t, community.clone()));
        }
        let step = (|| -> Result<Vec<f64>> {
            let p = resolve_schedule(&config.schedule, m.lambda_f, m.lambda_m, t);
            let shocked;
            let (general_t, ranks_t) = match p.shock_target {
                Some(topic) if p.shock_boost != 1.0 => {
                    shocked = apply_external_shock(&general, p.shock_boost, topic, config.init.alpha_c);
                    let r = shocked.ranks();
                    (&shocked, r)
                }
                _ => (&general, general_ranks.clone()),
            };

            event_dist = evolve_event_distribution(&event_dist, &ranks_t, m.lambda_e, m.n_events, &mut events_stream)?;
            let events = generate_events(&event_dist, m.n_events, m.n_tiers, &mut events_stream)?;
            let outcome = filter_events(
                &events,
                &community,
                general_t,
                &config.filter,
                &p,
                &mut filter_stream,
                &mut reframe_stream,
            )?;
            let news = outcome.news;

            let community_ranks = community.ranks();
            let troll = p.troll().map(|(strength, target)| Troll { strength, target });
            let comments = generate_comment_network(
                &news,
                &community.frequency,
                &community_ranks,
                &config.comments,
                &harmonic,
                troll,
                p.s_cs,
                &mut comment_stream,
            )?;
            let profile = comment_topic_profile(&comments.network)?;
            let profile_ranks = RankTable::descending(&profile);

            let n_news = news.len().max(1) as f64;
            let mut row = Vec::with_capacity(names.len());
            row.push(kendall_tau_distance(&ranks_t, &profile_ranks)?);
            row.push(kendall_tau_distance(&ranks_t, &community_ranks)?);
            row.push(news.iter().filter(|x| x.contains(target)).count() as f64 / n_news);
            for q in 0..m.n_tiers {
                row.push(news.iter().filter(|x| x.topic(q) == target).count() as f64 / n_news);
            }
            let (top, bottom) = sets.means(&community.weight);
            let weights = community.weight.values();
            row.extend([
                profile[target],
                community_ranks.normalized(target),
                top,
                bottom,
                comments.overflow as f64 / n_news,
                news.len() as f64,
                outcome.reframed as f64,
                weights.iter().sum::<f64>() / weights.len() as f64,
                weights.iter().copied().fold(0.0, f64::max),
                community.frequency.iter().sum(),
            ]);

            if options.keep_distributions {
                let mut sorted = profile.clone();
                sorted.sort_by(|a, b| b.total_cmp(a));
                for (acc, v) in sorted_profile_sum.iter_mut().zip(&sorted) {
                    *acc += v;
                }
                for item in &news {
                    for (q, counts) in tier_rank_counts.iter_mut().enumerate() {
                        counts[community_ranks.rank(item.topic(q)) as usize - 1] += 1.0;
                    }
                }
            }
            if options.keep_profiles {
                profiles.push(profile);
            }

            community = update_community(
                &community,
                &comments.network,
                m.n_tiers,
                p.lambda_m,
                &config.update,
                &mut noise_stream,
            )?;
            Ok(row)
        })()
        .map_err(|e| e.at_step(t))?;
        for (series, v) in values.iter_mut().zip(step) {
            series.push(v);
        }
    }
    if options.snapshot_every > 0 {
        snapshots.push((m.horizon, community.clone()));
    }

    Ok(SimulationRecord {
        names,
        values,
        general,
        initial_community,
        final_community: community,
        snapshots,
        profiles,
        sorted_profile_sum,
        tier_rank_counts,
    })
}

/// The error type when a step fails, exposing the step index.
pub fn failed_step(err: &Error) -> Option<usize> {
    match err {
        Error::AtStep { step, .. } => Some(*step),
        _ => None,
    }
}
