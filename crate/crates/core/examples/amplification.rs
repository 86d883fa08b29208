//! Amplification and the semantic neighbourhood of the target: which topics
//! grow closer to it, the ones it already sat with or the distant ones?

use collmind::analysis::quantile_diffs;
use collmind::config::preset;
use collmind::ensemble::{run_ensemble, Ensemble};
use collmind::sim::SimOptions;

fn named(e: &Ensemble) -> Vec<(String, collmind::metrics::EnsembleStats)> {
    e.names.iter().cloned().zip(e.stats.iter().cloned()).collect()
}

fn main() -> collmind::error::Result<()> {
    let mut cfg = preset("amplification")?;
    cfg.model.horizon = 320;
    let opts = SimOptions {
        similarity_quantile: 0.2,
        ..SimOptions::default()
    };
    let inf = run_ensemble(&cfg, 10, 2, &opts)?;
    let base = run_ensemble(&cfg.baseline(), 10, 2, &opts)?;
    let diffs = quantile_diffs(&named(&inf), &named(&base)).unwrap();
    for t in (50..320).step_by(30) {
        let (top, bottom) = diffs[t];
        println!("{t:>4} closest {top:+.4}  farthest {bottom:+.4}");
    }
    Ok(())
}
