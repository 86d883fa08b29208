use collmind::metrics::{tv_denoise, tv_objective};

fn main() {
    // A noisy step signal.
    let x: Vec<f64> = (0..40)
        .map(|i| if i < 20 { 1.0 } else { 2.0 } + 0.3 * ((i * 7919) % 13) as f64 / 13.0 - 0.15)
        .collect();
    for lam in [0.0, 0.005, 0.02, 0.1] {
        let y = tv_denoise(&x, lam);
        let levels = y.windows(2).filter(|w| (w[0] - w[1]).abs() > 1e-9).count() + 1;
        println!("lambda {lam:<4} objective {:>8.4}  {levels:>2} levels", tv_objective(&x, &y, lam));
    }
}
