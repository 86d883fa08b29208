use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tracked quantity over the simulation steps of a single replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub label: String,
    pub replica: Option<u64>,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn new(label: impl Into<String>, replica: Option<u64>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            replica,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-step mean and sample standard deviation across replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub n: usize,
}

impl EnsembleStats {
    /// Aggregate equally long series. A single replica has zero spread.
    pub fn from_series<'a, I>(series: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut n = 0usize;
        let mut mean: Vec<f64> = Vec::new();
        let mut m2: Vec<f64> = Vec::new();
        for values in series {
            if n == 0 {
                mean = vec![0.0; values.len()];
                m2 = vec![0.0; values.len()];
            } else if values.len() != mean.len() {
                return Err(Error::Shape(format!(
                    "series lengths differ: {} vs {}",
                    values.len(),
                    mean.len()
                )));
            }
            n += 1;
            for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(values) {
                let delta = x - *m;
                *m += delta / n as f64;
                *s += delta * (x - *m);
            }
        }
        let std = m2
            .iter()
            .map(|&s| if n > 1 { (s / (n - 1) as f64).max(0.0).sqrt() } else { 0.0 })
            .collect();
        Ok(Self { mean, std, n })
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Standard error of the mean at step `t`.
    pub fn sem(&self, t: usize) -> f64 {
        if self.n > 1 {
            self.std[t] / (self.n as f64).sqrt()
        } else {
            0.0
        }
    }
}

/// Ratio of ensemble means with a delta-method band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub ratio: Vec<f64>,
    /// Replica-level spread of the ratio; `None` for single-replica inputs.
    pub std: Option<Vec<f64>>,
    pub n: usize,
}

impl RatioSeries {
    /// Standard error of the ratio at step `t`, if a band exists.
    pub fn sem(&self, t: usize) -> Option<f64> {
        self.std.as_ref().map(|s| s[t] / (self.n as f64).sqrt())
    }
}

/// `mean(influenced) / mean(baseline)` per step. The band is
/// `sqrt(σ_I² + R² σ_B²) / |μ_B|`, the first-order propagation of both spreads.
pub fn ensemble_ratio(influenced: &EnsembleStats, baseline: &EnsembleStats) -> Result<RatioSeries> {
    if influenced.n != baseline.n || influenced.len() != baseline.len() {
        return Err(Error::Shape(format!(
            "ensembles differ: {}x{} vs {}x{}",
            influenced.n,
            influenced.len(),
            baseline.n,
            baseline.len()
        )));
    }
    let mut ratio = Vec::with_capacity(baseline.len());
    for (t, (&mi, &mb)) in influenced.mean.iter().zip(&baseline.mean).enumerate() {
        if mb == 0.0 {
            return Err(Error::ZeroBaseline {
                metric: "ensemble mean".into(),
                step: t,
            });
        }
        ratio.push(mi / mb);
    }
    let std = (influenced.n > 1).then(|| {
        ratio
            .iter()
            .enumerate()
            .map(|(t, &r)| {
                let (si, sb) = (influenced.std[t], baseline.std[t]);
                (si * si + r * r * sb * sb).sqrt() / baseline.mean[t].abs()
            })
            .collect()
    });
    Ok(RatioSeries {
        ratio,
        std,
        n: influenced.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(rows: &[Vec<f64>]) -> EnsembleStats {
        EnsembleStats::from_series(rows.iter().map(|r| r.as_slice())).unwrap()
    }

    #[test]
    fn mean_and_sample_std() {
        let s = stats(&[vec![1.0, 0.0], vec![3.0, 0.0], vec![5.0, 3.0]]);
        assert_eq!(s.mean, vec![3.0, 1.0]);
        assert!((s.std[0] - 2.0).abs() < 1e-15);
        assert!((s.std[1] - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.n, 3);

        let one = stats(&[vec![0.25, 0.5]]);
        assert_eq!(one.mean, vec![0.25, 0.5]);
        assert_eq!(one.std, vec![0.0, 0.0]);

        let err = EnsembleStats::from_series([&[1.0][..], &[1.0, 2.0][..]]);
        assert!(err.is_err());
    }

    #[test]
    fn ratio_examples() {
        let b = stats(&[vec![0.003, 1.0], vec![0.005, 2.0]]);
        let i = stats(&[vec![0.007, 1.0], vec![0.009, 2.0]]);
        let r = ensemble_ratio(&i, &b).unwrap();
        assert!((r.ratio[0] - 2.0).abs() < 1e-12);
        assert_eq!(r.ratio[1], 1.0);
        assert!(r.std.is_some());

        let same = ensemble_ratio(&b, &b).unwrap();
        assert!(same.ratio.iter().all(|&x| x == 1.0));

        let single = ensemble_ratio(&stats(&[vec![2.0, 3.0]]), &stats(&[vec![1.0, 2.0]])).unwrap();
        assert_eq!(single.ratio, vec![2.0, 1.5]);
        assert!(single.std.is_none());

        let zero = stats(&[vec![1.0, 0.0]]);
        assert!(matches!(
            ensemble_ratio(&zero, &zero),
            Err(Error::ZeroBaseline { step: 1, .. })
        ));
    }

    #[test]
    fn delta_band() {
        let b = stats(&[vec![1.0], vec![3.0]]);
        let i = stats(&[vec![2.0], vec![6.0]]);
        let r = ensemble_ratio(&i, &b).unwrap();
        let si = 8f64.sqrt();
        let sb = 2f64.sqrt();
        let expected = (si * si + 4.0 * sb * sb).sqrt() / 2.0;
        assert!((r.std.unwrap()[0] - expected).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn self_ratio_is_one(rows in proptest::collection::vec(proptest::collection::vec(0.01f64..10.0, 7), 1..9)) {
                let s = stats(&rows);
                let r = ensemble_ratio(&s, &s).unwrap();
                prop_assert!(r.ratio.iter().all(|&x| x == 1.0));
            }

            #[test]
            fn order_independent(rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 4), 2..9)) {
                let a = stats(&rows);
                let mut rev = rows.clone();
                rev.reverse();
                let b = stats(&rev);
                for t in 0..4 {
                    prop_assert!((a.mean[t] - b.mean[t]).abs() < 1e-12);
                    prop_assert!((a.std[t] - b.std[t]).abs() < 1e-10);
                }
            }
        }
    }
}
