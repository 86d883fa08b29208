//! Reframing swaps the target into the second tier of news titles. Watch the
//! target climb into the first tier as the community absorbs it.

use collmind::config::preset;
use collmind::ensemble::run_ensemble;
use collmind::sim::{target_tier_metric, SimOptions};

fn main() -> collmind::error::Result<()> {
    let mut cfg = preset("reframing")?.with_lambdas(0.8, 0.9);
    cfg.model.horizon = 301;
    let opts = SimOptions::default();
    let inf = run_ensemble(&cfg, 10, 2, &opts)?;
    let base = run_ensemble(&cfg.baseline(), 10, 2, &opts)?;

    let window = |e: &collmind::ensemble::Ensemble, q: usize, a: usize, b: usize| {
        let m = &e.stats(&target_tier_metric(q)).unwrap().mean;
        m[a..b].iter().sum::<f64>() / (b - a) as f64
    };
    for q in 1..=3 {
        println!(
            "tier {q}: early x{:.2}, late x{:.2}",
            window(&inf, q, 100, 150) / window(&base, q, 100, 150),
            window(&inf, q, 250, 301) / window(&base, q, 250, 301)
        );
    }
    Ok(())
}
