//! Two-stage editorial filter turning events into news.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Event, NewsItem};
use crate::influence::{apply_amplified_general_view, apply_reframing, ResolvedStepParams};
use crate::network::{blend_frequencies, blend_weight, PairMatrix, RankTable, SemanticNetwork};
use crate::rng::{weighted_sample_without_replacement, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterParams {
    /// Per-tier filter exponents, tier 1 first.
    pub alpha: Vec<f64>,
    /// Stage-1 retention ratio.
    pub r1: f64,
    /// Stage-2 retention ratio.
    pub r2: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            alpha: vec![0.4, 0.2, 0.1],
            r1: 0.5,
            r2: 0.5,
        }
    }
}

impl FilterParams {
    pub fn validate(&self, n_tiers: usize) -> Result<()> {
        if !(self.r1 > 0.0 && self.r1 <= 1.0 && self.r2 > 0.0 && self.r2 <= 1.0) {
            return Err(Error::config("filter ratios r1, r2 must lie in (0, 1]"));
        }
        if self.alpha.len() != n_tiers {
            return Err(Error::config(format!(
                "{} filter exponents for {n_tiers} tiers",
                self.alpha.len()
            )));
        }
        if self.alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("filter exponents must be finite"));
        }
        Ok(())
    }

    /// Number of news items produced from `n_events` events.
    pub fn output_size(&self, n_events: usize) -> usize {
        let stage1 = (self.r1 * n_events as f64).floor() as usize;
        (self.r2 * stage1 as f64).floor() as usize
    }
}

/// Stage-1 selection weight: `∏_q r̄(z_q)^(-alpha_q / r2)`.
pub fn stage1_weight(event: &Event, blended_ranks: &RankTable, params: &FilterParams) -> f64 {
    let log_w: f64 = event
        .tiers
        .iter()
        .zip(&params.alpha)
        .map(|(&z, &a)| -a / params.r2 * blended_ranks.normalized(z as usize).ln())
        .sum();
    log_w.exp()
}

/// Sample `⌊r1·|events|⌋` events without replacement, proportional to their
/// stage-1 weight. Survivors keep their input order.
pub fn stage1_select(
    events: &[Event],
    blended_ranks: &RankTable,
    params: &FilterParams,
    stream: &mut Stream,
) -> Result<Vec<Event>> {
    let keep = (params.r1 * events.len() as f64).floor() as usize;
    let log_rank: Vec<f64> = blended_ranks.normalized_all().iter().map(|r| r.ln()).collect();
    let exponents: Vec<f64> = params.alpha.iter().map(|a| -a / params.r2).collect();
    let weights: Vec<f64> = events
        .iter()
        .map(|e| {
            e.tiers
                .iter()
                .zip(&exponents)
                .map(|(&z, &x)| x * log_rank[z as usize])
                .sum::<f64>()
                .exp()
        })
        .collect();
    let mut picked = weighted_sample_without_replacement(stream, &weights, keep)?;
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| events[i].clone()).collect())
}

/// Stage-2 score: product of blended similarities over tier pairs, each floored at 0.
pub fn stage2_score(event: &Event, blended_weights: &PairMatrix) -> f64 {
    event.pairs().map(|(a, b)| blended_weights.get(a, b).max(0.0)).product()
}

/// Keep the top `⌊r2·|events|⌋` events by stage-2 score, ties by input
/// order. Output keeps input order.
pub fn stage2_select(events: &[Event], blended_weights: &PairMatrix, params: &FilterParams) -> Vec<NewsItem> {
    stage2_select_by(events, |a, b| blended_weights.get(a, b), params)
}

fn stage2_select_by(events: &[Event], weight: impl Fn(usize, usize) -> f64, params: &FilterParams) -> Vec<NewsItem> {
    let keep = (params.r2 * events.len() as f64).floor() as usize;
    let mut scored: Vec<(f64, usize)> = events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.pairs().map(|(a, b)| weight(a, b).max(0.0)).product(), i))
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut kept: Vec<usize> = scored.into_iter().take(keep).map(|(_, i)| i).collect();
    kept.sort_unstable();
    kept.into_iter().map(|i| events[i].clone()).collect()
}

/// Result of filtering one step's events.
#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub news: Vec<NewsItem>,
    pub reframed: usize,
}

/// Full editorial gate: perceived general view (amplification), blend,
/// stage 1, stage 2, then reframing.
pub fn filter_events(
    events: &[Event],
    community: &SemanticNetwork,
    general: &SemanticNetwork,
    params: &FilterParams,
    step: &ResolvedStepParams,
    filter_stream: &mut Stream,
    reframe_stream: &mut Stream,
) -> Result<FilterOutcome> {
    if community.n_topics() != general.n_topics() {
        return Err(Error::Shape("community and general networks differ in size".into()));
    }
    let perceived = match step.amp_target {
        Some(target) if step.s_amp != 1.0 => apply_amplified_general_view(&general.frequency, step.s_amp, target),
        _ => general.frequency.clone(),
    };
    let lambda = step.lambda_f;
    let blended = blend_frequencies(&community.frequency, &perceived, lambda);
    let ranks = RankTable::descending(&blended);
    let stage1 = stage1_select(events, &ranks, params, filter_stream)?;
    // only the surviving events' pairs are ever looked up
    let (wc, wg) = (&community.weight, &general.weight);
    let mut news = stage2_select_by(&stage1, |a, b| blend_weight(wc.get(a, b), wg.get(a, b), lambda), params);
    let reframed = match (step.reframe_target, step.reframe_tier) {
        (Some(topic), Some(tier)) if step.p_ref > 0.0 => {
            apply_reframing(&mut news, step.p_ref, topic, tier, reframe_stream)
        }
        _ => 0,
    };
    Ok(FilterOutcome { news, reframed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{base_event_distribution, generate_events};
    use crate::network::{init_community_network, init_general_network, InitParams};
    use crate::rng::{derive_substream, SeedSpec, StreamLabel};

    fn stream(tag: u8) -> Stream {
        derive_substream(SeedSpec::new(13, 0, StreamLabel::Other(tag)))
    }

    fn identity_ranks(n: usize) -> RankTable {
        RankTable::from_ranks((1..=n as u32).collect()).unwrap()
    }

    #[test]
    fn stage1_size_and_flat_weights() {
        let ranks = identity_ranks(250);
        let dist = base_event_distribution(&ranks);
        let events = generate_events(&dist, 1000, 3, &mut stream(1)).unwrap();
        let out = stage1_select(&events, &ranks, &FilterParams::default(), &mut stream(2)).unwrap();
        assert_eq!(out.len(), 500);

        let flat = FilterParams {
            alpha: vec![0.0; 3],
            ..FilterParams::default()
        };
        let e = Event::new(&[0, 1, 2]);
        assert_eq!(stage1_weight(&e, &ranks, &flat), 1.0);
    }

    #[test]
    fn stage1_two_event_oracle() {
        let ranks = identity_ranks(10);
        let params = FilterParams::default();
        let a = Event::new(&[0, 1, 2]);
        let b = Event::new(&[7, 8, 9]);
        // hand-computed: w = ∏ (r/10)^(-2 alpha_q)
        let wa = 0.1f64.powf(-0.8) * 0.2f64.powf(-0.4) * 0.3f64.powf(-0.2);
        let wb = 0.8f64.powf(-0.8) * 0.9f64.powf(-0.4) * 1.0f64.powf(-0.2);
        assert!((stage1_weight(&a, &ranks, &params) - wa).abs() < 1e-12);
        assert!((stage1_weight(&b, &ranks, &params) - wb).abs() < 1e-12);
        let expected = wa / (wa + wb);
        let events = vec![a.clone(), b];
        let mut s = stream(3);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| stage1_select(&events, &ranks, &params, &mut s).unwrap()[0] == a)
            .count();
        assert!((hits as f64 / trials as f64 - expected).abs() < 0.01);
    }

    #[test]
    fn stage2_examples() {
        let params = FilterParams::default();
        let w = PairMatrix::from_fn(20, |_, _| 0.5);
        let events: Vec<Event> = (0..10).map(|i| Event::new(&[i, i + 1, i + 2])).collect();
        let out = stage2_select(&events, &w, &params);
        assert_eq!(out, events[..5].to_vec());

        let w = PairMatrix::from_fn(6, |i, _| if i < 3 { 0.8 } else { 0.1 });
        let hi = Event::new(&[0, 1, 2]);
        let lo = Event::new(&[3, 4, 5]);
        assert_eq!(stage2_select(&[lo.clone(), hi.clone()], &w, &params), vec![hi.clone()]);
        assert_eq!(stage2_select(&[hi.clone(), lo], &w, &params), vec![hi]);
    }

    #[test]
    fn stage2_floors_negative_weights() {
        let mut w = PairMatrix::from_fn(4, |_, _| 0.5);
        w.set(0, 1, -0.3);
        assert_eq!(stage2_score(&Event::new(&[0, 1, 2]), &w), 0.0);
        assert_eq!(stage2_score(&Event::new(&[1, 2, 3]), &w), 0.125);
    }

    #[test]
    fn default_output_size() {
        let params = FilterParams::default();
        assert_eq!(params.output_size(1000), 250);
        let p = InitParams {
            sigma_fp: 1.0,
            ..InitParams::default()
        };
        let g = init_general_network(250, &p, &mut stream(4)).unwrap();
        let c = init_community_network(&g, &p, &mut stream(5)).unwrap();
        let dist = base_event_distribution(&g.ranks());
        let events = generate_events(&dist, 1000, 3, &mut stream(6)).unwrap();
        let step = ResolvedStepParams::neutral(0.5, 0.9);
        let out = filter_events(&events, &c, &g, &params, &step, &mut stream(7), &mut stream(8)).unwrap();
        assert_eq!(out.news.len(), 250);
        assert_eq!(out.reframed, 0);
    }

    #[test]
    fn zero_filter_strength_ignores_community() {
        let p = InitParams {
            sigma_fp: 1.0,
            sigma_wp: 0.05,
            ..InitParams::default()
        };
        let g = init_general_network(40, &p, &mut stream(9)).unwrap();
        let c = init_community_network(&g, &p, &mut stream(10)).unwrap();
        let dist = base_event_distribution(&g.ranks());
        let events = generate_events(&dist, 100, 3, &mut stream(11)).unwrap();
        let step = ResolvedStepParams::neutral(0.0, 0.9);
        let params = FilterParams::default();
        let a = filter_events(&events, &c, &g, &params, &step, &mut stream(12), &mut stream(13)).unwrap();
        let b = filter_events(&events, &g, &g, &params, &step, &mut stream(12), &mut stream(13)).unwrap();
        assert_eq!(a.news, b.news);
    }

    #[test]
    fn reframing_after_stage2() {
        let p = InitParams::default();
        let g = init_general_network(250, &p, &mut stream(14)).unwrap();
        let dist = base_event_distribution(&g.ranks());
        let params = FilterParams::default();
        let mut step = ResolvedStepParams::neutral(0.2, 0.9);
        step.p_ref = 0.04;
        step.reframe_target = Some(24);
        step.reframe_tier = Some(2);
        let mut fs = stream(15);
        let mut rs = stream(16);
        let mut es = stream(17);
        let steps = 400;
        let mut total = 0;
        for _ in 0..steps {
            let events = generate_events(&dist, 1000, 3, &mut es).unwrap();
            let out = filter_events(&events, &g, &g, &params, &step, &mut fs, &mut rs).unwrap();
            assert_eq!(out.news.len(), 250);
            assert!(out.news.iter().all(|n| n.has_distinct_topics()));
            total += out.reframed;
        }
        // mean replaced per step is 250 * 0.04 * P(target absent) ≈ 10
        let mean = total as f64 / steps as f64;
        assert!((mean - 10.0).abs() < 0.8, "{mean}");
    }
}
