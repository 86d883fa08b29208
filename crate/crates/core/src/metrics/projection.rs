use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionParams {
    pub pca_dims: usize,
    pub smooth_window: usize,
    pub perplexity: f64,
    pub iterations: usize,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        Self {
            pca_dims: 50,
            smooth_window: 25,
            perplexity: 30.0,
            iterations: 1000,
        }
    }
}

/// A 2-D embedded trajectory and its block-averaged companion.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<[f64; 2]>,
    /// Each step carries the mean of its `smooth_window` block.
    pub smoothed: Vec<[f64; 2]>,
}

const MIN_POINTS: usize = 5;
const EXAGGERATION: f64 = 12.0;
const EXAGGERATION_ITERS: usize = 250;

/// Embed one profile time series with PCA followed by exact t-SNE.
pub fn project_trajectory(profiles: &[Vec<f64>], params: &ProjectionParams, stream: &mut Stream) -> Result<Trajectory> {
    let mut out = project_trajectories(&[profiles.to_vec()], params, stream)?;
    Ok(out.remove(0))
}

/// Fit one embedding jointly over several series so they share coordinates.
pub fn project_trajectories(
    series: &[Vec<Vec<f64>>],
    params: &ProjectionParams,
    stream: &mut Stream,
) -> Result<Vec<Trajectory>> {
    let rows: Vec<&Vec<f64>> = series.iter().flatten().collect();
    if rows.len() < MIN_POINTS {
        return Err(Error::Shape(format!("projection needs at least {MIN_POINTS} points, got {}", rows.len())));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Shape("profiles differ in length".into()));
    }
    if params.pca_dims == 0 || params.smooth_window == 0 || !(params.perplexity > 0.0) {
        return Err(Error::config("projection needs pca_dims, smooth_window and perplexity > 0"));
    }
    let data = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let scores = pca_scores(&data, params.pca_dims);
    let embedded = if scores.ncols() == 0 {
        vec![[0.0; 2]; rows.len()]
    } else {
        tsne(&scores, params, stream)
    };

    let mut out = Vec::with_capacity(series.len());
    let mut offset = 0;
    for s in series {
        let points = embedded[offset..offset + s.len()].to_vec();
        offset += s.len();
        let smoothed = block_average(&points, params.smooth_window);
        out.push(Trajectory { points, smoothed });
    }
    Ok(out)
}

fn block_average(points: &[[f64; 2]], window: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(points.len());
    for block in points.chunks(window) {
        let k = block.len() as f64;
        let mean = block.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0] / k, acc[1] + p[1] / k]);
        out.extend(std::iter::repeat_n(mean, block.len()));
    }
    out
}

fn centered(data: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = data.clone();
    for mut col in x.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    x
}

/// Principal directions sorted by decreasing singular value, dropping
/// numerically null ones.
fn principal_axes(x: &DMatrix<f64>, scale: f64) -> (Vec<f64>, DMatrix<f64>) {
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = order.into_iter().filter(|&i| sv[i] > tol).collect();
    let axes = DMatrix::from_fn(x.ncols(), keep.len(), |r, c| v_t[(keep[c], r)]);
    (keep.iter().map(|&i| sv[i]).collect(), axes)
}

fn pca_scores(data: &DMatrix<f64>, dims: usize) -> DMatrix<f64> {
    let x = centered(data);
    let (_, axes) = principal_axes(&x, data.norm());
    let k = dims.min(axes.ncols());
    &x * axes.columns(0, k)
}

/// Squared Frobenius error of reconstructing the centered data from its top `k` components.
pub fn pca_reconstruction_error(data: &[Vec<f64>], k: usize) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let m = DMatrix::from_fn(data.len(), data[0].len(), |i, j| data[i][j]);
    let x = centered(&m);
    let (_, axes) = principal_axes(&x, m.norm());
    let k = k.min(axes.ncols());
    let basis = axes.columns(0, k);
    let recon = (&x * basis) * basis.transpose();
    (x - recon).norm_squared()
}

fn squared_distances(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = (x.row(i) - x.row(j)).norm_squared();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Symmetric input affinities with per-point bandwidths matching the perplexity.
fn affinities(dist: &[f64], n: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let mut p = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for i in 0..n {
        let d = &dist[i * n..(i + 1) * n];
        let (mut beta, mut lo, mut hi) = (1.0, 0.0, f64::INFINITY);
        let min_d = d.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).fold(f64::INFINITY, f64::min);
        for _ in 0..100 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                row[j] = if j == i { 0.0 } else { (-(d[j] - min_d) * beta).exp() };
                sum += row[j];
                weighted += row[j] * (d[j] - min_d);
            }
            let entropy = sum.ln() + beta * weighted / sum;
            let gap = entropy - target;
            if gap.abs() < 1e-5 {
                break;
            }
            if gap > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        let sum: f64 = row.iter().sum();
        for j in 0..n {
            p[i * n + j] = row[j] / sum;
        }
    }
    let mut sym = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            sym[i * n + j] = ((p[i * n + j] + p[j * n + i]) / (2.0 * n as f64)).max(1e-12);
        }
    }
    sym
}

fn tsne(scores: &DMatrix<f64>, params: &ProjectionParams, stream: &mut Stream) -> Vec<[f64; 2]> {
    let n = scores.nrows();
    let perplexity = params.perplexity.min((n as f64 - 1.0) / 3.0).max(1.0);
    let p = affinities(&squared_distances(scores), n, perplexity);

    let first_std = {
        let c = scores.column(0);
        (c.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt()
    };
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let a = scores[(i, 0)] / first_std * 1e-4;
            let b = if scores.ncols() > 1 { scores[(i, 1)] / first_std * 1e-4 } else { 0.0 };
            [a + 1e-8 * stream.standard_normal(), b + 1e-8 * stream.standard_normal()]
        })
        .collect();

    let learning_rate = (n as f64 / EXAGGERATION / 4.0).max(50.0);
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0; 2]; n];
    let mut num = vec![0.0; n * n];
    let mut grad = vec![[0.0; 2]; n];
    for iter in 0..params.iterations {
        let exaggeration = if iter < EXAGGERATION_ITERS { EXAGGERATION } else { 1.0 };
        let momentum = if iter < EXAGGERATION_ITERS { 0.5 } else { 0.8 };
        let mut z = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                let v = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = v;
                num[j * n + i] = v;
                z += 2.0 * v;
            }
        }
        for i in 0..n {
            let mut g = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let v = num[i * n + j];
                let m = (exaggeration * p[i * n + j] - v / z) * v;
                g[0] += m * (y[i][0] - y[j][0]);
                g[1] += m * (y[i][1] - y[j][1]);
            }
            grad[i] = [4.0 * g[0], 4.0 * g[1]];
        }
        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (velocity[i][d] > 0.0);
                gains[i][d] = if same_sign { (gains[i][d] * 0.8f64).max(0.01) } else { gains[i][d] + 0.2 };
                velocity[i][d] = momentum * velocity[i][d] - learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += velocity[i][d];
            }
        }
        let mean = y.iter().fold([0.0; 2], |acc, p| [acc[0] + p[0] / n as f64, acc[1] + p[1] / n as f64]);
        for p in y.iter_mut() {
            p[0] -= mean[0];
            p[1] -= mean[1];
        }
    }
    y
}
