//! Trolls push the target from t=100; counterspeech answers at different
//! strengths. Stronger counterspeech should leave the comment share closer
//! to the untouched baseline. Strength 1 means no counterspeech.

use collmind::config::preset;
use collmind::ensemble::run_ensemble;
use collmind::influence::InfluenceKind;
use collmind::sim::{SimOptions, TARGET_COMMENT_SHARE};

fn main() -> collmind::error::Result<()> {
    let opts = SimOptions::default();
    let base = run_ensemble(&preset("baseline")?, 10, 2, &opts)?;
    let base_late = late_mean(base.stats(TARGET_COMMENT_SHARE).unwrap().mean.as_slice());
    for strength in [1.0, 1.5, 3.0] {
        let cfg = preset("counterspeech")?.with_strength(Some(InfluenceKind::Counterspeech), strength);
        let run = run_ensemble(&cfg, 10, 2, &opts)?;
        let late = late_mean(&run.stats(TARGET_COMMENT_SHARE).unwrap().mean);
        println!("counterspeech {strength:.1}: late comment share x{:.3} of baseline", late / base_late);
    }
    Ok(())
}

fn late_mean(x: &[f64]) -> f64 {
    x[x.len() - 20..].iter().sum::<f64>() / 20.0
}
