//! Measurements on simulated networks and ensembles.

mod denoise;
mod projection;
mod stats;

pub use denoise::{tv_denoise, tv_objective};
pub use projection::{
    pca_reconstruction_error, project_trajectories, project_trajectory, ProjectionParams, Trajectory,
};
pub use stats::{ensemble_ratio, EnsembleStats, MetricSeries, RatioSeries};

use crate::comments::CommentNetwork;
use crate::error::{Error, Result};
use crate::network::{PairMatrix, RankTable};

/// Fraction of discordant topic pairs between two rankings.
///
/// Counts inversions with a merge sort, so it runs in `O(N log N)`.
pub fn kendall_tau_distance(a: &RankTable, b: &RankTable) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("rank tables of size {} and {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Ok(0.0);
    }
    // topics in `a` order, replaced by their rank in `b`
    let mut seq: Vec<u32> = a.order().into_iter().map(|t| b.rank(t)).collect();
    let mut scratch = vec![0u32; n];
    let discordant = count_inversions(&mut seq, &mut scratch);
    Ok(discordant as f64 / (n * (n - 1) / 2) as f64)
}

fn count_inversions(v: &mut [u32], scratch: &mut [u32]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = v.split_at_mut(mid);
        count_inversions(lo, &mut scratch[..mid]) + count_inversions(hi, &mut scratch[mid..])
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            scratch[k] = v[i];
            i += 1;
        } else {
            scratch[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&scratch[..n]);
    count
}

/// Normalized per-topic comment share, in topic-id order.
pub fn comment_topic_profile(comments: &CommentNetwork) -> Result<Vec<f64>> {
    let total: f64 = comments.frequency_mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroCommentMass);
    }
    Ok(comments.frequency_mass.iter().map(|m| m / total).collect())
}

/// Top and bottom similarity sets around a target topic, fixed at `t = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantileSets {
    pub target: usize,
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
}

impl QuantileSets {
    /// Each set holds `max(round((N - 1) q), 1)` non-target topics, ranked by
    /// their initial similarity to the target (ties by topic id).
    pub fn from_initial(initial: &PairMatrix, target: usize, quantile: f64) -> Result<Self> {
        let n = initial.n();
        if n < 10 || target >= n {
            return Err(Error::Shape(format!("quantile sets need N >= 10 and target < N, got N={n}")));
        }
        if !(quantile > 0.0 && quantile <= 0.5) {
            return Err(Error::config("similarity quantile must lie in (0, 0.5]"));
        }
        let size = (((n - 1) as f64 * quantile).round() as usize).max(1);
        let mut others: Vec<usize> = (0..n).filter(|&j| j != target).collect();
        others.sort_by(|&x, &y| {
            initial.get(target, y).total_cmp(&initial.get(target, x)).then(x.cmp(&y))
        });
        let top = others[..size].to_vec();
        let bottom = others[others.len() - size..].to_vec();
        Ok(Self { target, top, bottom })
    }

    /// Mean similarity to the target over each set.
    pub fn means(&self, weights: &PairMatrix) -> (f64, f64) {
        let mean = |set: &[usize]| set.iter().map(|&j| weights.get(self.target, j)).sum::<f64>() / set.len() as f64;
        (mean(&self.top), mean(&self.bottom))
    }
}

/// Mean similarity gain to the target over the top and bottom sets, relative
/// to the baseline weights at the same step.
pub fn similarity_quantile_diff(
    weights: &PairMatrix,
    baseline: &PairMatrix,
    initial: &PairMatrix,
    target: usize,
    quantile: f64,
) -> Result<(f64, f64)> {
    let sets = QuantileSets::from_initial(initial, target, quantile)?;
    let (top, bottom) = sets.means(weights);
    let (base_top, base_bottom) = sets.means(baseline);
    Ok((top - base_top, bottom - base_bottom))
}
