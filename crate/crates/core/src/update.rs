//! Feedback from the comment network into the community network.

use serde::{Deserialize, Serialize};

use crate::comments::CommentNetwork;
use crate::error::{Error, Result};
use crate::network::{quantize_to_support, PairMatrix, RankTable, SemanticNetwork};
use crate::rng::Stream;

/// How the Hebbian increment is combined with the previous weight.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    /// `w + Hebb - γ w + ε`, with `γ` chosen to conserve total weight.
    #[default]
    Incremental,
    /// `Hebb - γ w + ε` with `γ = (ΣHebb + η Σε) / Σw`, as literally printed.
    /// Kept for comparison; collapses weights toward the noise scale.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UpdateParams {
    /// Learning rate.
    pub eta: f64,
    pub w_max: f64,
    /// Standard deviation of the per-pair weight noise.
    pub sigma_wn: f64,
    pub rule: WeightRule,
}

impl Default for UpdateParams {
    fn default() -> Self {
        Self {
            eta: 10.0,
            w_max: 0.8,
            sigma_wn: 0.001,
            rule: WeightRule::Incremental,
        }
    }
}

impl UpdateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.w_max > 0.0 && self.w_max <= 1.0 && self.sigma_wn >= 0.0) {
            return Err(Error::config("update parameters need eta > 0, 0 < w_max <= 1, sigma_wn >= 0"));
        }
        Ok(())
    }
}

/// New frequencies: proxy `λ f + (1 - λ) f̂ / Σf̂`, ranked (ties by previous
/// rank) and quantized onto the current frequency support.
pub fn update_frequencies(community: &SemanticNetwork, comments: &CommentNetwork, lambda_m: f64) -> Result<Vec<f64>> {
    if !(comments.total_mass > 0.0) {
        return Err(Error::ZeroCommentMass);
    }
    if lambda_m == 1.0 {
        return Ok(community.frequency.clone());
    }
    let comment_total: f64 = comments.frequency_mass.iter().sum();
    if !(comment_total > 0.0) {
        return Err(Error::ZeroCommentMass);
    }
    let proxy: Vec<f64> = community
        .frequency
        .iter()
        .zip(&comments.frequency_mass)
        .map(|(&f, &m)| lambda_m * f + (1.0 - lambda_m) * m / comment_total)
        .collect();
    let previous = community.ranks();
    let ranks = RankTable::descending_with(&proxy, |i| previous.rank(i));
    Ok(quantize_to_support(&ranks, &community.sorted_frequencies()))
}

/// Hebbian weight update with adaptive decay and symmetric Gaussian noise.
///
/// `D = (N_w (N_w - 1) / 2) · total_mass`,
/// `Hebb_ij = η (w_max - |w_ij|) ŵ_ij / D`,
/// `γ = (Σ Hebb + Σ ε) / Σ w`,
/// `w' = clamp(w + Hebb - γ w + ε, 0, w_max)`.
pub fn update_weights(
    weights: &PairMatrix,
    comments: &CommentNetwork,
    n_tiers: usize,
    params: &UpdateParams,
    stream: &mut Stream,
) -> PairMatrix {
    let pairs_per_news = (n_tiers * n_tiers.saturating_sub(1) / 2) as f64;
    let d = pairs_per_news * comments.total_mass;
    let gain = if d > 0.0 { params.eta / d } else { 0.0 };

    let w = weights.values();
    let hat = comments.weight_mass.values();
    let mut next = PairMatrix::zeros(weights.n());
    let out = next.values_mut();

    let mut hebb_sum = 0.0;
    let mut noise_sum = 0.0;
    let mut weight_sum = 0.0;
    for k in 0..w.len() {
        let hebb = if hat[k] != 0.0 {
            gain * (params.w_max - w[k].abs()) * hat[k]
        } else {
            0.0
        };
        let noise = if params.sigma_wn > 0.0 {
            params.sigma_wn * stream.standard_normal()
        } else {
            0.0
        };
        hebb_sum += hebb;
        noise_sum += noise;
        weight_sum += w[k];
        out[k] = hebb + noise;
    }
    let gamma = if weight_sum != 0.0 {
        match params.rule {
            WeightRule::Incremental => (hebb_sum + noise_sum) / weight_sum,
            WeightRule::Literal => (hebb_sum + params.eta * noise_sum) / weight_sum,
        }
    } else {
        0.0
    };
    for k in 0..w.len() {
        let carry = match params.rule {
            WeightRule::Incremental => w[k],
            WeightRule::Literal => 0.0,
        };
        out[k] = (carry + out[k] - gamma * w[k]).clamp(0.0, params.w_max);
    }
    next
}

/// Apply both updates, producing the next community snapshot.
pub fn update_community(
    community: &SemanticNetwork,
    comments: &CommentNetwork,
    n_tiers: usize,
    lambda_m: f64,
    params: &UpdateParams,
    stream: &mut Stream,
) -> Result<SemanticNetwork> {
    let frequency = update_frequencies(community, comments, lambda_m)?;
    let weight = update_weights(&community.weight, comments, n_tiers, params, stream);
    Ok(SemanticNetwork {
        frequency,
        weight,
        epoch: community.epoch + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::frequency_support;
    use crate::rng::{derive_substream, SeedSpec, StreamLabel};

    fn stream(tag: u8) -> Stream {
        derive_substream(SeedSpec::new(19, 0, StreamLabel::Other(tag)))
    }

    fn community(n: usize) -> SemanticNetwork {
        SemanticNetwork::new(frequency_support(n, 1.0), PairMatrix::from_fn(n, |i, j| 0.1 + 0.01 * ((i + j) % 7) as f64))
            .unwrap()
    }

    fn comments_with(freq: Vec<f64>) -> CommentNetwork {
        let n = freq.len();
        let total = freq.iter().sum();
        CommentNetwork {
            frequency_mass: freq,
            weight_mass: PairMatrix::zeros(n),
            total_mass: total,
        }
    }

    #[test]
    fn memory_endpoints() {
        let c = community(10);
        let reversed: Vec<f64> = (0..10).map(|i| (i + 1) as f64).collect();
        let comments = comments_with(reversed.clone());
        assert_eq!(update_frequencies(&c, &comments, 1.0).unwrap(), c.frequency);
        let f = update_frequencies(&c, &comments, 0.0).unwrap();
        assert_eq!(RankTable::descending(&f), RankTable::descending(&reversed));
    }

    #[test]
    fn quantization_fixed_point() {
        let c = community(10);
        let comments = comments_with(c.frequency.iter().map(|f| f * 3.0).collect());
        assert_eq!(update_frequencies(&c, &comments, 0.5).unwrap(), c.frequency);
    }

    #[test]
    fn zero_mass_is_an_error() {
        let c = community(10);
        let comments = comments_with(vec![0.0; 10]);
        assert!(matches!(update_frequencies(&c, &comments, 0.5), Err(Error::ZeroCommentMass)));
    }

    #[test]
    fn no_signal_no_change() {
        let c = community(20);
        let comments = comments_with(vec![1.0; 20]);
        let params = UpdateParams {
            sigma_wn: 0.0,
            ..UpdateParams::default()
        };
        let w = update_weights(&c.weight, &comments, 3, &params, &mut stream(1));
        assert_eq!(w, c.weight);
    }

    #[test]
    fn single_pair_oracle() {
        let n = 17;
        let others = 99.6 / 135.0;
        let mut w = PairMatrix::from_fn(n, |_, _| others);
        w.set(0, 1, 0.4);
        assert!((w.sum() - 100.0).abs() < 1e-9);
        // ŵ/D = 1 with D = 3 * total_mass
        let mut hat = PairMatrix::zeros(n);
        hat.set(0, 1, 3.0);
        let comments = CommentNetwork {
            frequency_mass: vec![1.0 / n as f64; n],
            weight_mass: hat,
            total_mass: 1.0,
        };
        let params = UpdateParams {
            sigma_wn: 0.0,
            ..UpdateParams::default()
        };
        let next = update_weights(&w, &comments, 3, &params, &mut stream(2));
        assert_eq!(next.get(0, 1), 0.8);
        let gamma = 0.04;
        assert!((next.get(2, 5) - others * (1.0 - gamma)).abs() < 1e-12);
    }

    #[test]
    fn total_weight_conserved_without_clamping() {
        let n = 30;
        let w = PairMatrix::from_fn(n, |i, j| 0.3 + 0.001 * ((i * 31 + j) % 17) as f64);
        let mut hat = PairMatrix::zeros(n);
        hat.set(1, 2, 2e-4);
        hat.set(3, 9, 1e-4);
        let comments = CommentNetwork {
            frequency_mass: vec![1.0; n],
            weight_mass: hat,
            total_mass: 1.0,
        };
        let next = update_weights(&w, &comments, 3, &UpdateParams::default(), &mut stream(3));
        assert!((next.sum() - w.sum()).abs() < 1e-10);
        assert!(next.values().iter().all(|&x| (0.0..=0.8).contains(&x)));
    }

    #[test]
    fn literal_rule_collapses() {
        let n = 20;
        let w = PairMatrix::from_fn(n, |_, _| 0.35);
        let comments = comments_with(vec![1.0; n]);
        let params = UpdateParams {
            rule: WeightRule::Literal,
            ..UpdateParams::default()
        };
        let next = update_weights(&w, &comments, 3, &params, &mut stream(4));
        assert!(next.sum() < 0.1 * w.sum());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn weights_stay_in_cap(
                ws in proptest::collection::vec(0.0f64..1.0, 45),
                hot in proptest::collection::vec((0usize..10, 0usize..10, 1e-6f64..1e-3), 0..20),
                seed: u64,
            ) {
                let n = 10;
                let mut w = PairMatrix::zeros(n);
                w.values_mut().copy_from_slice(&ws);
                let mut hat = PairMatrix::zeros(n);
                let mut total = 0.0;
                for (a, b, c) in hot {
                    if a != b {
                        hat.add(a, b, c);
                        total += c;
                    }
                }
                let comments = CommentNetwork { frequency_mass: vec![1.0; n], weight_mass: hat, total_mass: total.max(1e-6) };
                let mut s = derive_substream(SeedSpec::new(seed, 0, StreamLabel::Other(5)));
                let next = update_weights(&w, &comments, 3, &UpdateParams::default(), &mut s);
                prop_assert!(next.values().iter().all(|&x| (0.0..=0.8).contains(&x)));
            }

            #[test]
            fn frequency_multiset_is_invariant(
                mass in proptest::collection::vec(0.0f64..1.0, 12),
                lambda in 0.0f64..1.0,
            ) {
                prop_assume!(mass.iter().sum::<f64>() > 0.0);
                let c = community(12);
                let comments = comments_with(mass);
                let f = update_frequencies(&c, &comments, lambda).unwrap();
                let mut sorted = f.clone();
                sorted.sort_by(|a, b| b.total_cmp(a));
                prop_assert_eq!(sorted, c.sorted_frequencies());
            }
        }
    }
}
