/// Objective `(1/n) Σ (x_k - y_k)² + lam Σ |y_{k+1} - y_k|`.
pub fn tv_objective(x: &[f64], y: &[f64], lam: f64) -> f64 {
    let n = x.len() as f64;
    let fit: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
    let tv: f64 = y.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    fit + lam * tv
}

/// Exact minimizer of [`tv_objective`].
///
/// Multiplying the objective by `n/2` gives the usual `½‖x - y‖² + λ' TV(y)`
/// form with `λ' = lam·n/2`, solved with Condat's direct algorithm.
pub fn tv_denoise(x: &[f64], lam: f64) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let lambda = lam * n as f64 / 2.0;
    if lambda <= 0.0 || n == 1 {
        return x.to_vec();
    }
    condat(x, lambda)
}

fn condat(input: &[f64], lambda: f64) -> Vec<f64> {
    let width = input.len();
    let mut output = vec![0.0; width];
    let (mut k, mut k0, mut kplus, mut kminus) = (0usize, 0usize, 0usize, 0usize);
    let mut umin = lambda;
    let mut umax = -lambda;
    let mut vmin = input[0] - lambda;
    let mut vmax = input[0] + lambda;
    let twolambda = 2.0 * lambda;
    loop {
        while k == width - 1 {
            if umin < 0.0 {
                loop {
                    output[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k0;
                vmin = input[k0];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                loop {
                    output[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k0;
                vmax = input[k0];
                umax = -lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                loop {
                    output[k0] = vmin;
                    k0 += 1;
                    if k0 > k {
                        break;
                    }
                }
                return output;
            }
        }
        umin += input[k + 1] - vmin;
        if umin < -lambda {
            loop {
                output[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = input[k0];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        umax += input[k + 1] - vmax;
        if umax > lambda {
            loop {
                output[k0] = vmax;
                k0 += 1;
                if k0 > kplus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = input[k0];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        k += 1;
        if umin >= lambda {
            kminus = k;
            vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
            umin = lambda;
        }
        if umax <= -lambda {
            kplus = k;
            vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
            umax = -lambda;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_substream, SeedSpec, StreamLabel};

    /// Coarse-to-fine grid search of the convex objective over [0, 5]^n.
    fn grid_search(x: &[f64], lam: f64) -> Vec<f64> {
        let n = x.len();
        let mut center = vec![2.5; n];
        let mut half: f64 = 2.5;
        let mut step = 0.1;
        for _ in 0..4 {
            let per_axis = (2.0 * half / step).round() as usize + 1;
            let mut best = (f64::INFINITY, center.clone());
            let total = per_axis.pow(n as u32);
            let mut y = vec![0.0; n];
            for idx in 0..total {
                let mut rest = idx;
                for (d, yd) in y.iter_mut().enumerate() {
                    *yd = (center[d] - half + (rest % per_axis) as f64 * step).clamp(0.0, 5.0);
                    rest /= per_axis;
                }
                let j = tv_objective(x, &y, lam);
                if j < best.0 {
                    best = (j, y.clone());
                }
            }
            center = best.1;
            half = 3.0 * step;
            step /= 10.0;
        }
        center
    }

    /// Subgradient conditions on the dual path of `½‖x - y‖² + λ TV(y)`.
    fn kkt_holds(x: &[f64], y: &[f64], lambda: f64, tol: f64) -> bool {
        let n = x.len();
        let mut u = 0.0;
        for k in 0..n - 1 {
            u += x[k] - y[k];
            let d = y[k + 1] - y[k];
            let ok = if d > tol {
                (u + lambda).abs() < tol
            } else if d < -tol {
                (u - lambda).abs() < tol
            } else {
                u.abs() <= lambda + tol
            };
            if !ok {
                return false;
            }
        }
        u += x[n - 1] - y[n - 1];
        u.abs() < tol
    }

    #[test]
    fn examples() {
        assert_eq!(tv_denoise(&[3.0, 1.0, 4.0], 0.0), vec![3.0, 1.0, 4.0]);
        assert_eq!(tv_denoise(&[2.0; 6], 0.7), vec![2.0; 6]);
        let y = tv_denoise(&[5.0, 1.0], 0.4);
        assert!((y[0] - 4.6).abs() < 1e-12 && (y[1] - 1.4).abs() < 1e-12, "{y:?}");
        assert_eq!(tv_denoise(&[], 0.4), Vec::<f64>::new());
        assert_eq!(tv_denoise(&[1.5], 0.4), vec![1.5]);
    }

    #[test]
    fn large_penalty_gives_the_mean() {
        let x = [1.0, 4.0, 2.0, 7.0];
        let y = tv_denoise(&x, 100.0);
        assert!(y.iter().all(|v| (v - 3.5).abs() < 1e-12));
    }

    #[test]
    fn matches_grid_search_on_small_integer_series() {
        for &lam in &[0.1, 0.4, 1.0] {
            for n in 1..=3u32 {
                for code in 0..6usize.pow(n) {
                    let x: Vec<f64> = (0..n).map(|d| ((code / 6usize.pow(d)) % 6) as f64).collect();
                    let exact = tv_denoise(&x, lam);
                    let oracle = grid_search(&x, lam);
                    for (a, b) in exact.iter().zip(&oracle) {
                        assert!((a - b).abs() < 1e-3, "x={x:?} lam={lam} exact={exact:?} grid={oracle:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn optimal_on_random_series() {
        let mut s = derive_substream(SeedSpec::new(3, 0, StreamLabel::Other(40)));
        for trial in 0..200 {
            let n = 2 + trial % 60;
            let x: Vec<f64> = (0..n).map(|_| 3.0 * s.standard_normal()).collect();
            let lam = 0.05 + s.uniform();
            let y = tv_denoise(&x, lam);
            assert!(kkt_holds(&x, &y, lam * n as f64 / 2.0, 1e-8), "trial {trial}");
            let best = tv_objective(&x, &y, lam);
            assert!(best <= tv_objective(&x, &x, lam) + 1e-12);
            for _ in 0..100 {
                let z: Vec<f64> = y.iter().map(|v| v + 1e-3 * s.standard_normal()).collect();
                assert!(best <= tv_objective(&x, &z, lam) + 1e-12);
            }
        }
    }
}
