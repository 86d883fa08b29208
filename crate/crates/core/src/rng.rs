//! Deterministic random-number provisioning and sampling primitives.
//!
//! Every stochastic process in the simulator draws from its own [`Stream`],
//! obtained from a [`SeedSpec`]. Streams are Xoshiro256++ instances whose
//! 256-bit state is expanded by SplitMix64 from the master seed mixed with a
//! 64-bit stream id packing the replica index and the stream label. The
//! mapping does not depend on platform or execution order.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which process a stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamLabel {
    InitGeneral,
    InitCommunity,
    Events,
    Filter,
    Comments,
    Noise,
    Reframe,
    Projection,
    /// Free-form tag for tests and downstream tools.
    Other(u8),
}

impl StreamLabel {
    fn id(self) -> u64 {
        match self {
            StreamLabel::InitGeneral => 1,
            StreamLabel::InitCommunity => 2,
            StreamLabel::Events => 3,
            StreamLabel::Filter => 4,
            StreamLabel::Comments => 5,
            StreamLabel::Noise => 6,
            StreamLabel::Reframe => 7,
            StreamLabel::Projection => 8,
            StreamLabel::Other(tag) => 0x80 | u64::from(tag & 0x7f),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StreamLabel::InitGeneral => "init_general",
            StreamLabel::InitCommunity => "init_community",
            StreamLabel::Events => "events",
            StreamLabel::Filter => "filter",
            StreamLabel::Comments => "comments",
            StreamLabel::Noise => "noise",
            StreamLabel::Reframe => "reframe",
            StreamLabel::Projection => "projection",
            StreamLabel::Other(_) => "other",
        }
    }
}

/// Largest replica index that fits in the packed stream id.
pub const MAX_REPLICA_INDEX: u64 = (1 << 56) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub replica_index: u64,
    pub stream_label: StreamLabel,
}

impl SeedSpec {
    pub fn new(master_seed: u64, replica_index: u64, stream_label: StreamLabel) -> Self {
        Self {
            master_seed,
            replica_index,
            stream_label,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit FNV-1a hash, used to salt seeds by scenario name.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// A single-owner random stream.
#[derive(Debug, Clone)]
pub struct Stream(Xoshiro256PlusPlus);

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

impl Stream {
    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.random::<f64>()
    }

    /// Uniform draw in `(0, 1]`, safe to take the logarithm of.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        1.0 - self.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }

    /// Standard exponential draw.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }
}

/// Build the generator for `spec`. Identical specs give identical sequences.
pub fn derive_substream(spec: SeedSpec) -> Stream {
    assert!(
        spec.replica_index <= MAX_REPLICA_INDEX,
        "replica index {} exceeds {}",
        spec.replica_index,
        MAX_REPLICA_INDEX
    );
    let id = (spec.replica_index << 8) | spec.stream_label.id();
    let mut state = spec.master_seed;
    let mut state = splitmix64(&mut state) ^ id;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let rng = Xoshiro256PlusPlus::from_seed(seed);
    Stream(rng)
}

/// Shifted log-normal: `x = a + b * exp(s * Z)`, density
/// `∝ exp(-ln²((x - a) / b) / (2 s²))` on `x > a`. The median is `a + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormalParams {
    pub a: f64,
    pub b: f64,
    pub s: f64,
}

impl LogNormalParams {
    pub fn new(a: f64, b: f64, s: f64) -> Self {
        Self { a, b, s }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite() && self.s.is_finite()) {
            return Err(Error::config("log-normal parameters must be finite"));
        }
        if self.b <= 0.0 {
            return Err(Error::config(format!("log-normal scale b must be > 0, got {}", self.b)));
        }
        if self.s < 0.0 {
            return Err(Error::config(format!("log-normal shape s must be >= 0, got {}", self.s)));
        }
        Ok(())
    }

    pub fn median(&self) -> f64 {
        self.a + self.b
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        let z = ((x - self.a) / self.b).ln();
        if self.s == 0.0 {
            return if z >= 0.0 { 1.0 } else { 0.0 };
        }
        normal_cdf(z / self.s)
    }

    /// Probability mass of the closed window `[lo, hi]`.
    pub fn window_probability(&self, lo: f64, hi: f64) -> f64 {
        if self.s == 0.0 {
            let m = self.median();
            return if lo <= m && m <= hi { 1.0 } else { 0.0 };
        }
        (self.cdf(hi) - self.cdf(lo)).max(0.0)
    }
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Below this acceptance probability a rejection window is a configuration error.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Pre-validated rejection sampler for a shifted log-normal restricted to a window.
#[derive(Debug, Clone, Copy)]
pub struct WindowedLogNormal {
    params: LogNormalParams,
    lo: f64,
    hi: f64,
}

impl WindowedLogNormal {
    pub fn new(params: LogNormalParams, lo: f64, hi: f64) -> Result<Self> {
        params.validate()?;
        if !(lo < hi) {
            return Err(Error::InvalidInterval { lo, hi });
        }
        let prob = params.window_probability(lo, hi);
        if prob < MIN_ACCEPTANCE {
            return Err(Error::ImprobableWindow { lo, hi, prob });
        }
        Ok(Self { params, lo, hi })
    }

    #[inline]
    pub fn sample(&self, stream: &mut Stream) -> f64 {
        let LogNormalParams { a, b, s } = self.params;
        if s == 0.0 {
            return a + b;
        }
        loop {
            let x = a + b * (s * stream.standard_normal()).exp();
            if self.lo <= x && x <= self.hi {
                return x;
            }
        }
    }
}

/// Draw from the shifted log-normal, redrawing until the value lies in `[lo, hi]`.
pub fn sample_lognormal(stream: &mut Stream, params: LogNormalParams, lo: f64, hi: f64) -> Result<f64> {
    Ok(WindowedLogNormal::new(params, lo, hi)?.sample(stream))
}

/// Draw with density `∝ exp(-rate * m)` on `[lo, hi]` by CDF inversion.
pub fn sample_truncated_exponential(stream: &mut Stream, rate: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::InvalidInterval { lo, hi });
    }
    Ok(truncated_exponential_quantile(rate, lo, hi, stream.uniform()))
}

/// Quantile function of the truncated exponential at `u ∈ [0, 1)`.
pub fn truncated_exponential_quantile(rate: f64, lo: f64, hi: f64, u: f64) -> f64 {
    let width = hi - lo;
    if width <= 0.0 {
        return lo;
    }
    let rw = rate * width;
    let m = if rw.abs() < 1e-12 {
        lo + u * width
    } else {
        // 1 - exp(-rate * width), accurate for small products
        let mass = -(-rw).exp_m1();
        lo - (-u * mass).ln_1p() / rate
    };
    m.clamp(lo, hi)
}

/// Weighted sampling of `k` distinct indices without replacement.
///
/// Each index receives an exponential clock `E_i / w_i` and the `k` earliest
/// clocks win, which has the same law as `k` sequential proportional draws
/// with removal. Indices are returned in draw order.
pub fn weighted_sample_without_replacement(stream: &mut Stream, weights: &[f64], k: usize) -> Result<Vec<usize>> {
    if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::config(format!("sampling weights must be finite and non-negative, got {bad}")));
    }
    let available = weights.iter().filter(|&&w| w > 0.0).count();
    if available < k {
        return Err(Error::InsufficientSupport { needed: k, available });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut clocks: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, &w)| (stream.exponential() / w, i))
        .collect();
    let by_clock = |x: &(f64, usize), y: &(f64, usize)| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1));
    if k < clocks.len() {
        clocks.select_nth_unstable_by(k - 1, by_clock);
        clocks.truncate(k);
    }
    clocks.sort_unstable_by(by_clock);
    Ok(clocks.into_iter().map(|(_, i)| i).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(label: StreamLabel) -> Stream {
        derive_substream(SeedSpec::new(42, 0, label))
    }

    #[test]
    fn same_spec_same_sequence() {
        let spec = SeedSpec::new(7, 3, StreamLabel::Events);
        let mut a = derive_substream(spec);
        let mut b = derive_substream(spec);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn replicas_diverge() {
        let mut a = derive_substream(SeedSpec::new(7, 0, StreamLabel::Events));
        let mut b = derive_substream(SeedSpec::new(7, 1, StreamLabel::Events));
        let xs: Vec<u64> = (0..10_000).map(|_| a.next_u64()).collect();
        let ys: std::collections::HashSet<u64> = (0..10_000).map(|_| b.next_u64()).collect();
        let collisions = xs.iter().filter(|x| ys.contains(x)).count();
        assert_eq!(collisions, 0);
    }

    #[test]
    fn labels_are_independent_chi_square() {
        // 10x10 contingency table of paired decile draws; 81 dof,
        // critical value at p = 0.01 is 113.5.
        let mut a = stream(StreamLabel::Events);
        let mut b = stream(StreamLabel::Comments);
        let n = 100_000;
        let mut table = [[0u32; 10]; 10];
        for _ in 0..n {
            let i = (a.uniform() * 10.0) as usize;
            let j = (b.uniform() * 10.0) as usize;
            table[i][j] += 1;
        }
        let mut rows = [0f64; 10];
        let mut cols = [0f64; 10];
        for i in 0..10 {
            for j in 0..10 {
                rows[i] += f64::from(table[i][j]);
                cols[j] += f64::from(table[i][j]);
            }
        }
        let mut chi2 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let expected = rows[i] * cols[j] / n as f64;
                chi2 += (f64::from(table[i][j]) - expected).powi(2) / expected;
            }
        }
        assert!(chi2 < 113.5, "chi2 = {chi2}");
    }

    #[test]
    fn lognormal_median_is_shift_plus_scale() {
        let mut s = stream(StreamLabel::Other(1));
        let p = LogNormalParams::new(-0.65, 1.0, 0.12);
        let sampler = WindowedLogNormal::new(p, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let mut xs: Vec<f64> = (0..1_000_000).map(|_| sampler.sample(&mut s)).collect();
        let mid = xs.len() / 2;
        let (_, median, _) = xs.select_nth_unstable_by(mid, f64::total_cmp);
        assert!((*median - 0.35).abs() < 0.005, "median {median}");
    }

    #[test]
    fn lognormal_degenerate_and_window() {
        let mut s = stream(StreamLabel::Other(2));
        let p = LogNormalParams::new(-0.65, 1.0, 0.0);
        for _ in 0..100 {
            assert_eq!(sample_lognormal(&mut s, p, 0.0, 1.0).unwrap(), 0.35);
        }
        let p = LogNormalParams::new(-0.65, 1.0, 0.12);
        for _ in 0..1000 {
            let x = sample_lognormal(&mut s, p, 0.34, 0.36).unwrap();
            assert!((0.34..=0.36).contains(&x));
        }
    }

    #[test]
    fn lognormal_rejects_improbable_window() {
        let mut s = stream(StreamLabel::Other(3));
        let p = LogNormalParams::new(-0.65, 1.0, 0.12);
        let err = sample_lognormal(&mut s, p, 3.0, 4.0).unwrap_err();
        assert!(matches!(err, Error::ImprobableWindow { .. }));
        assert!(sample_lognormal(&mut s, p, 1.0, 0.0).is_err());
    }

    #[test]
    fn truncated_exponential_limits() {
        let mut s = stream(StreamLabel::Other(4));
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_truncated_exponential(&mut s, 0.0, 2.0, 6.0).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 4.0).abs() < 0.04);
        assert_eq!(sample_truncated_exponential(&mut s, 0.3, 5.0, 5.0).unwrap(), 5.0);
        assert!(sample_truncated_exponential(&mut s, 0.3, 6.0, 5.0).is_err());
    }

    fn truncexp_mean(rate: f64, lo: f64, hi: f64) -> f64 {
        let w = hi - lo;
        lo + 1.0 / rate - w * (-rate * w).exp() / (1.0 - (-rate * w).exp())
    }

    fn truncexp_cdf(rate: f64, lo: f64, hi: f64, x: f64) -> f64 {
        (1.0 - (-rate * (x - lo)).exp()) / (1.0 - (-rate * (hi - lo)).exp())
    }

    #[test]
    fn truncated_exponential_matches_closed_form() {
        let mut s = stream(StreamLabel::Other(5));
        let (rate, lo, hi) = (0.01, 0.7, 71.95);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| sample_truncated_exponential(&mut s, rate, lo, hi).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let expected = truncexp_mean(rate, lo, hi);
        assert!((mean / expected - 1.0).abs() < 0.01, "{mean} vs {expected}");

        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = truncexp_cdf(rate, lo, hi, x);
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS = {ks}");
    }

    #[test]
    fn weighted_sampling_contracts() {
        let mut s = stream(StreamLabel::Other(6));
        for _ in 0..100 {
            assert_eq!(weighted_sample_without_replacement(&mut s, &[1.0, 0.0, 0.0], 1).unwrap(), vec![0]);
        }
        let mut perm = weighted_sample_without_replacement(&mut s, &[1.0; 7], 7).unwrap();
        perm.sort();
        assert_eq!(perm, (0..7).collect::<Vec<_>>());
        let err = weighted_sample_without_replacement(&mut s, &[1.0, 0.0, 0.0], 2).unwrap_err();
        assert!(matches!(err, Error::InsufficientSupport { needed: 2, available: 1 }));
    }

    #[test]
    fn weighted_first_draw_probability() {
        let mut s = stream(StreamLabel::Other(7));
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| weighted_sample_without_replacement(&mut s, &[2.0, 1.0, 1.0], 1).unwrap()[0] == 0)
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn weighted_second_draw_follows_removal() {
        // P(second = 1) = P(0 first)·1/2 + P(2 first)·1/3 = 0.25 + 1/12
        let mut s = stream(StreamLabel::Other(8));
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| weighted_sample_without_replacement(&mut s, &[2.0, 1.0, 1.0], 2).unwrap()[1] == 1)
            .count();
        let freq = hits as f64 / trials as f64;
        assert!((freq - 1.0 / 3.0).abs() < 0.01, "{freq}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lognormal_respects_window(a in -1.0f64..1.0, b in 0.1f64..2.0, s in 0.01f64..1.0, seed: u64) {
                let p = LogNormalParams::new(a, b, s);
                let (lo, hi) = (p.median() - 0.5 * b, p.median() + 0.5 * b);
                let mut st = derive_substream(SeedSpec::new(seed, 0, StreamLabel::Other(9)));
                if let Ok(sampler) = WindowedLogNormal::new(p, lo, hi) {
                    for _ in 0..50 {
                        let x = sampler.sample(&mut st);
                        prop_assert!(lo <= x && x <= hi);
                    }
                }
            }

            #[test]
            fn truncated_exponential_in_support(rate in 0.0f64..5.0, lo in -10.0f64..10.0, w in 0.0f64..50.0, seed: u64) {
                let mut st = derive_substream(SeedSpec::new(seed, 0, StreamLabel::Other(10)));
                for _ in 0..50 {
                    let x = sample_truncated_exponential(&mut st, rate, lo, lo + w).unwrap();
                    prop_assert!(lo <= x && x <= lo + w);
                }
            }

            #[test]
            fn weighted_sample_distinct(ws in proptest::collection::vec(0.0f64..3.0, 1..40), seed: u64) {
                let positive = ws.iter().filter(|&&w| w > 0.0).count();
                let mut st = derive_substream(SeedSpec::new(seed, 0, StreamLabel::Other(11)));
                let picked = weighted_sample_without_replacement(&mut st, &ws, positive).unwrap();
                let mut sorted = picked.clone();
                sorted.sort();
                sorted.dedup();
                prop_assert_eq!(sorted.len(), positive);
                prop_assert!(picked.iter().all(|&i| ws[i] > 0.0));
            }
        }
    }
}
