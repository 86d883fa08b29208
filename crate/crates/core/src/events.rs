//! World events: ordered topic tuples drawn from the general network.

use rand::RngCore;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::network::RankTable;
use crate::rng::Stream;

/// Topic tuple ordered from most (tier 1) to least relevant. Topics are distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub tiers: SmallVec<[u32; 4]>,
}

/// An event that made it through a community's editorial filter.
pub type NewsItem = Event;

impl Event {
    pub fn new(tiers: &[usize]) -> Self {
        Self {
            tiers: tiers.iter().map(|&t| t as u32).collect(),
        }
    }

    pub fn n_tiers(&self) -> usize {
        self.tiers.len()
    }

    /// Topic at 0-based tier position `q`.
    #[inline]
    pub fn topic(&self, q: usize) -> usize {
        self.tiers[q] as usize
    }

    pub fn contains(&self, topic: usize) -> bool {
        self.tiers.iter().any(|&t| t as usize == topic)
    }

    /// Unordered tier pairs `(z_a, z_b)` for `a < b`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.tiers.len();
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (self.topic(a), self.topic(b))))
    }

    pub fn has_distinct_topics(&self) -> bool {
        self.tiers
            .iter()
            .enumerate()
            .all(|(i, t)| !self.tiers[i + 1..].contains(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventDistribution {
    pub probabilities: Vec<f64>,
    pub epoch: usize,
}

impl EventDistribution {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.probabilities.iter().filter(|&&p| p > 0.0).count()
    }
}

/// `p_i ∝ -ln(r_i)`; the lowest-ranked topic gets zero probability.
pub fn base_event_distribution(general_ranks: &RankTable) -> EventDistribution {
    let raw: Vec<f64> = (0..general_ranks.len())
        .map(|i| -general_ranks.normalized(i).ln())
        .map(|x| x.max(0.0))
        .collect();
    let total: f64 = raw.iter().sum();
    EventDistribution {
        probabilities: raw.into_iter().map(|x| x / total).collect(),
        epoch: 0,
    }
}

/// Categorical sampler supporting exclusion of a few already-drawn categories.
///
/// Plain draws use Walker's alias table. Draws with exclusions reject
/// excluded categories and, after a bounded number of rejections, fall back
/// to an exact inversion of the renormalized cumulative distribution.
#[derive(Debug, Clone)]
pub struct TopicSampler {
    probs: Vec<f64>,
    // cumulative[i] = p_0 + ... + p_i
    cumulative: Vec<f64>,
    accept: Vec<f64>,
    alias: Vec<u32>,
}

const MAX_REJECTIONS: usize = 16;

impl TopicSampler {
    pub fn new(probabilities: &[f64]) -> Self {
        let n = probabilities.len();
        let mut acc = 0.0;
        let cumulative: Vec<f64> = probabilities
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        let total = acc;

        let mut accept: Vec<f64> = probabilities.iter().map(|&p| p * n as f64 / total).collect();
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &a) in accept.iter().enumerate() {
            if a < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            alias[s] = l as u32;
            accept[l] -= 1.0 - accept[s];
            if accept[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        let fallback = probabilities.iter().position(|&p| p > 0.0).unwrap_or(0) as u32;
        for i in large.into_iter().chain(small) {
            // leftovers are rounding residue
            if probabilities[i] > 0.0 {
                accept[i] = 1.0;
            } else {
                accept[i] = 0.0;
                alias[i] = fallback;
            }
        }
        Self {
            probs: probabilities.to_vec(),
            cumulative,
            accept,
            alias,
        }
    }

    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn locate(&self, v: f64) -> usize {
        let i = self.cumulative.partition_point(|&c| c <= v);
        i.min(self.probs.len() - 1)
    }

    #[inline]
    pub fn sample(&self, stream: &mut Stream) -> usize {
        // high half picks the column, low half decides between it and its alias
        let x = stream.next_u64();
        let i = (((x >> 32) * self.probs.len() as u64) >> 32) as usize;
        let frac = f64::from(x as u32) * (1.0 / 4_294_967_296.0);
        let alias = self.alias[i] as usize;
        if frac < self.accept[i] {
            i
        } else {
            alias
        }
    }

    /// Draw from the distribution restricted to categories not in `excluded`
    /// (renormalized). `excluded` must be sorted ascending.
    pub fn sample_excluding(&self, stream: &mut Stream, excluded: &[usize]) -> usize {
        for _ in 0..MAX_REJECTIONS {
            let i = self.sample(stream);
            if !excluded.contains(&i) {
                return i;
            }
        }
        self.sample_excluding_exact(stream, excluded)
    }

    fn sample_excluding_exact(&self, stream: &mut Stream, excluded: &[usize]) -> usize {
        let removed: f64 = excluded.iter().map(|&e| self.probs[e]).sum();
        let mut v = stream.uniform() * (self.total() - removed);
        for &e in excluded {
            let before = self.cumulative[e] - self.probs[e];
            if v >= before {
                v += self.probs[e];
            }
        }
        let i = self.locate(v);
        if self.probs[i] > 0.0 && excluded.binary_search(&i).is_err() {
            return i;
        }
        // floating-point edge: fall back to the nearest admissible category
        (0..self.probs.len())
            .rev()
            .filter(|k| self.probs[*k] > 0.0 && excluded.binary_search(k).is_err())
            .min_by_key(|&k| k.abs_diff(i))
            .expect("no admissible category left")
    }
}

/// Mix the empirical histogram of `n_draws` base-distribution draws with the
/// previous distribution: `(1 - lambda_e) * hist + lambda_e * previous`.
pub fn evolve_event_distribution(
    previous: &EventDistribution,
    general_ranks: &RankTable,
    lambda_e: f64,
    n_draws: usize,
    stream: &mut Stream,
) -> Result<EventDistribution> {
    if !(0.0..=1.0).contains(&lambda_e) {
        return Err(Error::config(format!("lambda_e must lie in [0, 1], got {lambda_e}")));
    }
    if previous.len() != general_ranks.len() {
        return Err(Error::Shape("event distribution and rank table differ in size".into()));
    }
    let epoch = previous.epoch + 1;
    if lambda_e == 1.0 || n_draws == 0 {
        return Ok(EventDistribution {
            probabilities: previous.probabilities.clone(),
            epoch,
        });
    }
    let base = base_event_distribution(general_ranks);
    let sampler = TopicSampler::new(&base.probabilities);
    let mut counts = vec![0u32; previous.len()];
    for _ in 0..n_draws {
        counts[sampler.sample(stream)] += 1;
    }
    let inv = 1.0 / n_draws as f64;
    let probabilities = counts
        .iter()
        .zip(&previous.probabilities)
        .map(|(&c, &p)| (1.0 - lambda_e) * f64::from(c) * inv + lambda_e * p)
        .collect();
    Ok(EventDistribution { probabilities, epoch })
}

/// Draw `n_events` events; each tier is drawn from `dist` restricted to the
/// topics not already used by earlier tiers of the same event.
pub fn generate_events(
    dist: &EventDistribution,
    n_events: usize,
    n_tiers: usize,
    stream: &mut Stream,
) -> Result<Vec<Event>> {
    let available = dist.support_size();
    if available < n_tiers {
        return Err(Error::InsufficientSupport {
            needed: n_tiers,
            available,
        });
    }
    let sampler = TopicSampler::new(&dist.probabilities);
    let mut excluded: SmallVec<[usize; 4]> = SmallVec::new();
    let events = (0..n_events)
        .map(|_| {
            excluded.clear();
            let mut tiers = SmallVec::new();
            for _ in 0..n_tiers {
                let topic = sampler.sample_excluding(stream, &excluded);
                tiers.push(topic as u32);
                let at = excluded.partition_point(|&e| e < topic);
                excluded.insert(at, topic);
            }
            Event { tiers }
        })
        .collect();
    Ok(events)
}
