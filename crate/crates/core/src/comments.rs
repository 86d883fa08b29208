//! Community response: per-news comment masses, tier multipliers and the
//! aggregated comment network.

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::events::NewsItem;
use crate::network::{PairMatrix, RankTable};
use crate::rng::{truncated_exponential_quantile, LogNormalParams, Stream, WindowedLogNormal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommentParams {
    /// Relative comment count per news item.
    pub comment_mass_dist: LogNormalParams,
    /// `C_{z,q}`: zero-multiplier probability is `C_{z,q} * r`.
    pub zero_ratio_slopes: Vec<f64>,
    /// `a_q` in the non-zero rate `a_q * exp(-b * r)`.
    pub nonzero_rate_coeffs: Vec<f64>,
    /// Shared `b` in the non-zero rate.
    pub nonzero_rate_decay: f64,
    /// Inverse total comment count per period.
    pub c_com: f64,
}

impl Default for CommentParams {
    fn default() -> Self {
        Self {
            comment_mass_dist: LogNormalParams::new(5.7e-6, 1.0e-4, 1.5),
            zero_ratio_slopes: vec![0.7, 0.9, 0.9],
            nonzero_rate_coeffs: vec![0.005, 0.01, 0.02],
            nonzero_rate_decay: 0.8,
            c_com: 1.0e-6,
        }
    }
}

impl CommentParams {
    pub fn validate(&self, n_tiers: usize) -> Result<()> {
        self.comment_mass_dist.validate()?;
        if self.zero_ratio_slopes.len() != n_tiers || self.nonzero_rate_coeffs.len() != n_tiers {
            return Err(Error::config(format!("comment parameters need {n_tiers} per-tier values")));
        }
        if self.zero_ratio_slopes.iter().any(|&c| !(c > 0.0 && c <= 1.0)) {
            return Err(Error::config("zero-ratio slopes must lie in (0, 1]"));
        }
        if self.nonzero_rate_coeffs.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::config("non-zero rate coefficients must be positive"));
        }
        if !(self.nonzero_rate_decay > 0.0 && self.c_com > 0.0) {
            return Err(Error::config("non-zero rate decay and c_com must be positive"));
        }
        Ok(())
    }

    pub fn mass_sampler(&self) -> Result<WindowedLogNormal> {
        WindowedLogNormal::new(self.comment_mass_dist, f64::MIN_POSITIVE, f64::INFINITY)
    }
}

/// `n * H(n)` for `n = 0..=max_n`, where `H` is the harmonic number.
#[derive(Debug, Clone)]
pub struct HarmonicBounds {
    bounds: Vec<f64>,
}

impl HarmonicBounds {
    pub fn new(max_n: usize) -> Self {
        let mut h = 0.0;
        let mut bounds = vec![0.0];
        for n in 1..=max_n {
            h += 1.0 / n as f64;
            bounds.push(n as f64 * h);
        }
        Self { bounds }
    }

    /// `H̄(n) = n H(n)`, the largest multiplier for the rank-`n` topic.
    #[inline]
    pub fn upper(&self, n: usize) -> f64 {
        self.bounds[n]
    }
}

/// Comment mass per news item, strictly positive.
pub fn sample_comment_mass(params: &CommentParams, stream: &mut Stream) -> Result<f64> {
    Ok(params.mass_sampler()?.sample(stream))
}

/// Per-tier multipliers for one news item given the community ranks.
///
/// With probability `min(C_{z,q} r, 1)` the multiplier is zero; otherwise it
/// is truncated-exponential with rate `a_q exp(-b r)` on
/// `[min(c_com H̄(n) / c, H̄(n)), H̄(n)]` where `n = round(r N)`.
pub fn sample_tier_multipliers(
    news: &NewsItem,
    community_ranks: &RankTable,
    c: f64,
    params: &CommentParams,
    harmonic: &HarmonicBounds,
    stream: &mut Stream,
) -> SmallVec<[f64; 4]> {
    let n_topics = community_ranks.len() as f64;
    news.tiers
        .iter()
        .enumerate()
        .map(|(q, &z)| {
            let r = community_ranks.normalized(z as usize);
            let zero_prob = (params.zero_ratio_slopes[q] * r).min(1.0);
            let zero_draw = stream.uniform();
            let exp_draw = stream.uniform();
            if zero_draw < zero_prob {
                return 0.0;
            }
            let rate = params.nonzero_rate_coeffs[q] * (-params.nonzero_rate_decay * r).exp();
            let n = (r * n_topics).round() as usize;
            let hi = harmonic.upper(n);
            let lo = (params.c_com * hi / c).min(hi);
            truncated_exponential_quantile(rate, lo, hi, exp_draw)
        })
        .collect()
}

/// Troll pressure on one topic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Troll {
    pub strength: f64,
    pub target: usize,
}

/// Off-topic normalization constant
/// `C = (1 - min(Σ m'_q f_{z_q}, 1)) / (1 - Σ f_{z_q})`.
pub fn off_topic_scale(news: &NewsItem, community_freq: &[f64], effective: &[f64]) -> (f64, bool) {
    let on: f64 = news.tiers.iter().zip(effective).map(|(&z, &m)| m * community_freq[z as usize]).sum();
    let tier_mass: f64 = news.tiers.iter().map(|&z| community_freq[z as usize]).sum();
    ((1.0 - on.min(1.0)) / (1.0 - tier_mass), on > 1.0)
}

/// Comment mass per topic under one news item.
///
/// On-topic: `c m'_q f_{z_q}`; off-topic: `c f_j C`. A troll then scales the
/// target entry and the array is rescaled to its pre-troll total.
pub fn news_comment_frequencies(
    news: &NewsItem,
    community_freq: &[f64],
    multipliers: &[f64],
    c: f64,
    troll: Option<Troll>,
    s_cs: f64,
) -> Vec<f64> {
    let effective: SmallVec<[f64; 4]> = multipliers.iter().map(|m| s_cs * m).collect();
    let (scale, _) = off_topic_scale(news, community_freq, &effective);
    let mut out: Vec<f64> = community_freq.iter().map(|&f| c * f * scale).collect();
    for (&z, &m) in news.tiers.iter().zip(&effective) {
        out[z as usize] = c * m * community_freq[z as usize];
    }
    if let Some(Troll { strength, target }) = troll {
        let before: f64 = out.iter().sum();
        out[target] *= strength;
        let after: f64 = out.iter().sum();
        let k = before / after;
        out.iter_mut().for_each(|x| *x *= k);
    }
    out
}

/// Pair masses contributed by one news item: `c` for every tier pair.
pub fn news_comment_weights(news: &NewsItem, c: f64) -> Vec<(usize, usize, f64)> {
    news.pairs().map(|(a, b)| (a, b, c)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommentNetwork {
    pub frequency_mass: Vec<f64>,
    pub weight_mass: PairMatrix,
    pub total_mass: f64,
}

impl CommentNetwork {
    pub fn empty(n_topics: usize) -> Self {
        Self {
            frequency_mass: vec![0.0; n_topics],
            weight_mass: PairMatrix::zeros(n_topics),
            total_mass: 0.0,
        }
    }

    pub fn n_topics(&self) -> usize {
        self.frequency_mass.len()
    }
}

/// Per-news contribution, as produced by the per-item operations.
#[derive(Debug, Clone)]
pub struct NewsResponse {
    pub mass: f64,
    pub frequencies: Vec<f64>,
    pub pairs: Vec<(usize, usize, f64)>,
}

/// Elementwise sum of per-news contributions.
pub fn aggregate_comment_network(n_topics: usize, responses: &[NewsResponse]) -> CommentNetwork {
    let mut net = CommentNetwork::empty(n_topics);
    for r in responses {
        net.total_mass += r.mass;
        for (acc, &x) in net.frequency_mass.iter_mut().zip(&r.frequencies) {
            *acc += x;
        }
        for &(a, b, w) in &r.pairs {
            net.weight_mass.add(a, b, w);
        }
    }
    net
}

/// Comment mass and multipliers drawn for one news item.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsDraw {
    pub mass: f64,
    pub multipliers: SmallVec<[f64; 4]>,
}

/// Everything the step generates on the comment side.
#[derive(Debug, Clone)]
pub struct CommentStep {
    pub network: CommentNetwork,
    pub draws: Vec<NewsDraw>,
    /// News whose on-topic share exceeded 1 (`Σ m' f > 1`).
    pub overflow: usize,
}

/// Generate the comment network for a step's news.
///
/// Draws mass and multipliers per news in order, then aggregates in
/// `O(news · tiers + N)` using the fact that off-topic mass is proportional
/// to the community frequency. Equals the sum of
/// [`news_comment_frequencies`] over the news up to rounding.
pub fn generate_comment_network(
    news: &[NewsItem],
    community_freq: &[f64],
    community_ranks: &RankTable,
    params: &CommentParams,
    harmonic: &HarmonicBounds,
    troll: Option<Troll>,
    s_cs: f64,
    stream: &mut Stream,
) -> Result<CommentStep> {
    let n = community_freq.len();
    let troll = troll.filter(|t| t.strength != 1.0);
    let sampler = params.mass_sampler()?;
    let draws: Vec<NewsDraw> = news
        .iter()
        .map(|item| {
            let mass = sampler.sample(stream);
            let multipliers = sample_tier_multipliers(item, community_ranks, mass, params, harmonic, stream);
            NewsDraw { mass, multipliers }
        })
        .collect();

    let mut network = CommentNetwork::empty(n);
    let mut off_topic_coeff = 0.0;
    let mut troll_mass = 0.0;
    let mut overflow = 0;
    for (item, draw) in news.iter().zip(&draws) {
        let c = draw.mass;
        let effective: SmallVec<[f64; 4]> = draw.multipliers.iter().map(|m| s_cs * m).collect();
        let (scale, over) = off_topic_scale(item, community_freq, &effective);
        overflow += usize::from(over);

        // rescale factor of the troll boost, and the target's unboosted entry
        let mut k = 1.0;
        if let Some(Troll { strength, target }) = troll {
            let on: f64 = item.tiers.iter().zip(&effective).map(|(&z, &m)| m * community_freq[z as usize]).sum();
            let total = c * (on + 1.0 - on.min(1.0));
            let entry = match item.tiers.iter().position(|&z| z as usize == target) {
                Some(q) => c * effective[q] * community_freq[target],
                None => c * community_freq[target] * scale,
            };
            k = total / (total + (strength - 1.0) * entry);
            troll_mass += k * entry;
        }

        off_topic_coeff += k * c * scale;
        for (&z, &m) in item.tiers.iter().zip(&effective) {
            let f = community_freq[z as usize];
            network.frequency_mass[z as usize] += k * c * f * (m - scale);
        }
        network.total_mass += c;
        for (a, b) in item.pairs() {
            network.weight_mass.add(a, b, c);
        }
    }
    for (acc, &f) in network.frequency_mass.iter_mut().zip(community_freq) {
        *acc += off_topic_coeff * f;
    }
    if let Some(Troll { strength, target }) = troll {
        network.frequency_mass[target] = strength * troll_mass;
    }
    Ok(CommentStep {
        network,
        draws,
        overflow,
    })
}
