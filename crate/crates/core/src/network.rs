//! Semantic networks: topic frequencies, pairwise similarity weights and
//! normalized frequency ranks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{LogNormalParams, Stream, WindowedLogNormal};

/// Dense symmetric matrix with zero diagonal, stored as its packed upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    n: usize,
    data: Vec<f64>,
}

impl PairMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                m.data[k] = f(i, j);
                k += 1;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of unordered pairs.
    pub fn n_pairs(&self) -> usize {
        self.data.len()
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// `w_ij`; zero on the diagonal.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.data[self.index(i, j)],
            std::cmp::Ordering::Greater => self.data[self.index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "diagonal entries are fixed at zero");
        let k = if i < j { self.index(i, j) } else { self.index(j, i) };
        self.data[k] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "diagonal entries are fixed at zero");
        let k = if i < j { self.index(i, j) } else { self.index(j, i) };
        self.data[k] += value;
    }

    /// Upper-triangle values in row-major `(i < j)` order.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Iterate `(i, j, w_ij)` over `i < j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(self.data.iter())
            .map(|((i, j), &w)| (i, j, w))
    }

    /// Row `i` of the full matrix.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|j| self.get(i, j)).collect()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Elementwise `lambda * a + (1 - lambda) * b`.
    pub fn blend(a: &PairMatrix, b: &PairMatrix, lambda: f64) -> PairMatrix {
        assert_eq!(a.n, b.n);
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| blend_weight(x, y, lambda))
            .collect();
        PairMatrix { n: a.n, data }
    }
}

/// Normalized frequency ranks: topic `i` has integer rank `rank(i)` in `1..=N`
/// (1 = most frequent) and normalized rank `rank(i) / N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    ranks: Vec<u32>,
}

impl RankTable {
    /// Build from explicit 1-based integer ranks; they must form a permutation.
    pub fn from_ranks(ranks: Vec<u32>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &r in &ranks {
            let r = r as usize;
            if r == 0 || r > n || seen[r - 1] {
                return Err(Error::Shape("ranks must be a permutation of 1..=N".into()));
            }
            seen[r - 1] = true;
        }
        Ok(Self { ranks })
    }

    /// Rank values in descending order; ties broken by `tie_key` ascending,
    /// then by topic index.
    pub fn descending_with(values: &[f64], tie_key: impl Fn(usize) -> u32) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| {
            values[b]
                .total_cmp(&values[a])
                .then_with(|| tie_key(a).cmp(&tie_key(b)))
                .then(a.cmp(&b))
        });
        let mut ranks = vec![0u32; values.len()];
        for (pos, &topic) in order.iter().enumerate() {
            ranks[topic] = pos as u32 + 1;
        }
        Self { ranks }
    }

    /// Rank values in descending order with ties broken by lower topic index.
    pub fn descending(values: &[f64]) -> Self {
        Self::descending_with(values, |_| 0)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Integer rank of `topic`, 1-based.
    #[inline]
    pub fn rank(&self, topic: usize) -> u32 {
        self.ranks[topic]
    }

    /// `rank / N` in `(0, 1]`.
    #[inline]
    pub fn normalized(&self, topic: usize) -> f64 {
        f64::from(self.ranks[topic]) / self.ranks.len() as f64
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn normalized_all(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.normalized(i)).collect()
    }

    /// Topics ordered from rank 1 to rank N.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0usize; self.ranks.len()];
        for (topic, &r) in self.ranks.iter().enumerate() {
            order[r as usize - 1] = topic;
        }
        order
    }
}

/// `normalized_ranks`: rank 1 for the largest frequency, ties by lower index.
pub fn normalized_ranks(net: &SemanticNetwork) -> RankTable {
    RankTable::descending(&net.frequency)
}

/// Initial frequency distribution `F_f(k) = k^(-alpha_c) / C` for `k = 1..=n`.
pub fn frequency_support(n: usize, alpha_c: f64) -> Vec<f64> {
    let raw: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-alpha_c)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Assign `support[k - 1]` to the topic of rank `k`.
pub fn quantize_to_support(ranks: &RankTable, support: &[f64]) -> Vec<f64> {
    assert_eq!(ranks.len(), support.len());
    (0..ranks.len()).map(|i| support[ranks.rank(i) as usize - 1]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticNetwork {
    pub frequency: Vec<f64>,
    pub weight: PairMatrix,
    pub epoch: usize,
}

impl SemanticNetwork {
    pub fn new(frequency: Vec<f64>, weight: PairMatrix) -> Result<Self> {
        if frequency.len() != weight.n() {
            return Err(Error::Shape(format!(
                "{} frequencies for a {}-topic weight matrix",
                frequency.len(),
                weight.n()
            )));
        }
        Ok(Self {
            frequency,
            weight,
            epoch: 0,
        })
    }

    pub fn n_topics(&self) -> usize {
        self.frequency.len()
    }

    pub fn ranks(&self) -> RankTable {
        normalized_ranks(self)
    }

    /// Frequencies sorted descending; equals the `F_f` support while the
    /// rank-quantization invariant holds.
    pub fn sorted_frequencies(&self) -> Vec<f64> {
        let mut f = self.frequency.clone();
        f.sort_by(|a, b| b.total_cmp(a));
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitParams {
    pub alpha_c: f64,
    pub weight_dist: LogNormalParams,
    pub sigma_fp: f64,
    pub sigma_wp: f64,
}

impl Default for InitParams {
    fn default() -> Self {
        Self {
            alpha_c: 1.0,
            weight_dist: LogNormalParams::new(-0.65, 1.0, 0.12),
            sigma_fp: 0.0,
            sigma_wp: 0.0,
        }
    }
}

impl InitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_c > 0.0 && self.alpha_c.is_finite()) {
            return Err(Error::config(format!("alpha_c must be > 0, got {}", self.alpha_c)));
        }
        if !(self.sigma_fp >= 0.0 && self.sigma_wp >= 0.0) {
            return Err(Error::config("perturbation standard deviations must be >= 0"));
        }
        self.weight_dist.validate()
    }
}

/// Smallest frequency kept after perturbation, before renormalization.
const FREQUENCY_FLOOR: f64 = 1e-12;

/// Zipf-like frequencies over topic index and i.i.d. log-normal weights in `[0, 1]`.
pub fn init_general_network(n_topics: usize, params: &InitParams, stream: &mut Stream) -> Result<SemanticNetwork> {
    if n_topics < 2 {
        return Err(Error::config(format!("need at least 2 topics, got {n_topics}")));
    }
    params.validate()?;
    let sampler = WindowedLogNormal::new(params.weight_dist, 0.0, 1.0)?;
    let weight = PairMatrix::from_fn(n_topics, |_, _| sampler.sample(stream));
    SemanticNetwork::new(frequency_support(n_topics, params.alpha_c), weight)
}

/// Perturbed copy of the general network, rank-quantized back onto `F_f`.
pub fn init_community_network(
    general: &SemanticNetwork,
    params: &InitParams,
    stream: &mut Stream,
) -> Result<SemanticNetwork> {
    params.validate()?;
    let n = general.n_topics();
    let support = frequency_support(n, params.alpha_c);

    let mut freq: Vec<f64> = general
        .frequency
        .iter()
        .zip(&support)
        .map(|(&f, &scale)| {
            let noise = if params.sigma_fp > 0.0 {
                params.sigma_fp * stream.standard_normal() * scale
            } else {
                0.0
            };
            (f + noise).max(FREQUENCY_FLOOR)
        })
        .collect();
    let total: f64 = freq.iter().sum();
    freq.iter_mut().for_each(|f| *f /= total);
    let ranks = RankTable::descending(&freq);
    let frequency = quantize_to_support(&ranks, &support);

    let mut weight = general.weight.clone();
    if params.sigma_wp > 0.0 {
        for w in weight.values_mut() {
            *w = (*w + params.sigma_wp * stream.standard_normal()).clamp(0.0, 1.0);
        }
    }
    SemanticNetwork::new(frequency, weight)
}

/// The editors' blended view of community and general networks.
#[derive(Debug, Clone)]
pub struct BlendedView {
    pub frequency: Vec<f64>,
    pub weight: PairMatrix,
    pub ranks: RankTable,
}

/// `lambda_f * community + (1 - lambda_f) * general`, returning an endpoint
/// unchanged when `lambda_f` is exactly 0 or 1.
#[inline]
pub fn blend_weight(community: f64, general: f64, lambda_f: f64) -> f64 {
    if lambda_f == 1.0 {
        community
    } else if lambda_f == 0.0 {
        general
    } else {
        lambda_f * community + (1.0 - lambda_f) * general
    }
}

/// [`blend_weight`] applied elementwise to frequency arrays.
pub fn blend_frequencies(community: &[f64], general: &[f64], lambda_f: f64) -> Vec<f64> {
    assert_eq!(community.len(), general.len());
    community
        .iter()
        .zip(general)
        .map(|(&c, &g)| blend_weight(c, g, lambda_f))
        .collect()
}

/// Blend both networks. With `lambda_f > 1` entries may go negative; only
/// their ranks (frequencies) or floored values (weights) are consumed.
pub fn blended_view(community: &SemanticNetwork, general: &SemanticNetwork, lambda_f: f64) -> BlendedView {
    blended_view_with(community, &general.frequency, &general.weight, lambda_f)
}

/// As [`blended_view`], with an explicit (possibly perceived) general frequency.
pub fn blended_view_with(
    community: &SemanticNetwork,
    general_frequency: &[f64],
    general_weight: &PairMatrix,
    lambda_f: f64,
) -> BlendedView {
    let (frequency, weight) = if lambda_f == 1.0 {
        (community.frequency.clone(), community.weight.clone())
    } else if lambda_f == 0.0 {
        (general_frequency.to_vec(), general_weight.clone())
    } else {
        (
            blend_frequencies(&community.frequency, general_frequency, lambda_f),
            PairMatrix::blend(&community.weight, general_weight, lambda_f),
        )
    };
    let ranks = RankTable::descending(&frequency);
    BlendedView {
        frequency,
        weight,
        ranks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_substream, SeedSpec, StreamLabel};

    fn stream(tag: u8) -> Stream {
        derive_substream(SeedSpec::new(11, 0, StreamLabel::Other(tag)))
    }

    fn harmonic(n: usize) -> f64 {
        (1..=n).map(|k| 1.0 / k as f64).sum()
    }

    #[test]
    fn pair_matrix_indexing() {
        let m = PairMatrix::from_fn(5, |i, j| (10 * i + j) as f64);
        for i in 0..5 {
            assert_eq!(m.get(i, i), 0.0);
            for j in i + 1..5 {
                assert_eq!(m.get(i, j), (10 * i + j) as f64);
                assert_eq!(m.get(j, i), m.get(i, j));
            }
        }
        assert_eq!(m.n_pairs(), 10);
        assert_eq!(m.iter().count(), 10);
        assert!(m.iter().all(|(i, j, w)| w == (10 * i + j) as f64));
    }

    #[test]
    fn general_frequencies_are_harmonic() {
        let net = init_general_network(250, &InitParams::default(), &mut stream(1)).unwrap();
        let h250 = harmonic(250);
        assert!((h250 - 6.10068).abs() < 1e-5);
        assert!((net.frequency[0] - 1.0 / h250).abs() < 1e-15);
        assert!((net.frequency[0] - 0.16392).abs() < 1e-5);
        assert!((net.frequency[1] - net.frequency[0] / 2.0).abs() < 1e-15);
        assert!((net.frequency.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(net.frequency.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn general_weight_median() {
        let net = init_general_network(250, &InitParams::default(), &mut stream(2)).unwrap();
        let mut w = net.weight.values().to_vec();
        assert!(w.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let mid = w.len() / 2;
        let (_, median, _) = w.select_nth_unstable_by(mid, f64::total_cmp);
        assert!((*median - 0.35).abs() < 0.01, "{median}");
    }

    #[test]
    fn too_few_topics() {
        assert!(init_general_network(1, &InitParams::default(), &mut stream(3)).is_err());
    }

    #[test]
    fn zero_noise_community_is_a_copy() {
        let p = InitParams::default();
        let general = init_general_network(50, &p, &mut stream(4)).unwrap();
        let community = init_community_network(&general, &p, &mut stream(5)).unwrap();
        assert_eq!(community, general);
    }

    #[test]
    fn perturbed_community_keeps_invariants() {
        let p = InitParams {
            sigma_fp: 1.0,
            sigma_wp: 0.05,
            ..InitParams::default()
        };
        let general = init_general_network(250, &p, &mut stream(6)).unwrap();
        let community = init_community_network(&general, &p, &mut stream(7)).unwrap();
        assert!(community.weight.values().iter().all(|&w| (0.0..=1.0).contains(&w)));
        assert_eq!(community.sorted_frequencies(), frequency_support(250, 1.0));
        assert!((community.frequency.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_ne!(community.ranks(), general.ranks());
    }

    #[test]
    fn rank_examples() {
        let r = RankTable::descending(&[0.5, 0.3, 0.15, 0.05]);
        assert_eq!(r.normalized_all(), vec![0.25, 0.5, 0.75, 1.0]);

        let mut f = vec![0.1; 10];
        f[3] = 0.2;
        f[7] = 0.2;
        let r = RankTable::descending(&f);
        assert!(r.rank(3) < r.rank(7));

        let r = RankTable::descending(&[0.1, 0.4, 0.3, 0.2]);
        assert_eq!(r.normalized_all(), vec![1.0, 0.25, 0.5, 0.75]);
        assert_eq!(r.order(), vec![1, 2, 3, 0]);
    }

    #[test]
    fn blend_endpoints_and_extrapolation() {
        let p = InitParams {
            sigma_fp: 1.0,
            sigma_wp: 0.05,
            ..InitParams::default()
        };
        let g = init_general_network(20, &p, &mut stream(8)).unwrap();
        let c = init_community_network(&g, &p, &mut stream(9)).unwrap();
        let v0 = blended_view(&c, &g, 0.0);
        assert_eq!(v0.frequency, g.frequency);
        assert_eq!(v0.weight, g.weight);
        let v1 = blended_view(&c, &g, 1.0);
        assert_eq!(v1.frequency, c.frequency);
        assert_eq!(v1.weight, c.weight);
        assert_eq!(v1.ranks, c.ranks());

        let f = blend_frequencies(&[0.2], &[0.1], 3.0);
        assert!((f[0] - 0.4).abs() < 1e-15);
        let v3 = blended_view(&c, &g, 3.0);
        assert_eq!(v3.ranks.len(), 20);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ranks_commute_with_permutation(
                values in proptest::collection::vec(0u8..20, 2..40),
                seed: u64,
            ) {
                let values: Vec<f64> = values.into_iter().map(f64::from).collect();
                let n = values.len();
                let mut perm: Vec<usize> = (0..n).collect();
                let mut s = derive_substream(SeedSpec::new(seed, 0, StreamLabel::Other(1)));
                for i in (1..n).rev() {
                    let j = (s.uniform() * (i + 1) as f64) as usize;
                    perm.swap(i, j);
                }
                let permuted: Vec<f64> = perm.iter().map(|&p| values[p]).collect();
                let pr = RankTable::descending_with(&permuted, |k| perm[k] as u32);
                let mut back = vec![0u32; n];
                for (k, &p) in perm.iter().enumerate() {
                    back[p] = pr.rank(k);
                }
                prop_assert_eq!(back, RankTable::descending(&values).ranks().to_vec());
            }

            #[test]
            fn ranks_are_a_permutation(values in proptest::collection::vec(-1.0f64..1.0, 1..60)) {
                let r = RankTable::descending(&values);
                prop_assert!(RankTable::from_ranks(r.ranks().to_vec()).is_ok());
            }
        }
    }
}
