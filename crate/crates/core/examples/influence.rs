//! Compare any influence preset with its own baseline.
//!
//! ```text
//! cargo run --release --example influence -- alignment
//! ```

use collmind::config::{preset, WINDOW_END, WINDOW_START};
use collmind::ensemble::run_ensemble;
use collmind::metrics::ensemble_ratio;
use collmind::sim::{SimOptions, KD_GENERAL_COMMENT, TARGET_COMMENT_SHARE, TARGET_NEWS_SHARE};

fn main() -> collmind::error::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "alignment".into());
    let mut cfg = preset(&name)?;
    cfg.model.horizon = 400;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let opts = SimOptions::default();
    let influenced = run_ensemble(&cfg, 12, jobs, &opts)?;
    let baseline = run_ensemble(&cfg.baseline(), 12, jobs, &opts)?;
    println!("{name}: {}", cfg.description);

    let kd = (influenced.stats(KD_GENERAL_COMMENT).unwrap(), baseline.stats(KD_GENERAL_COMMENT).unwrap());
    let news = ensemble_ratio(influenced.stats(TARGET_NEWS_SHARE).unwrap(), baseline.stats(TARGET_NEWS_SHARE).unwrap())?;
    let comments =
        ensemble_ratio(influenced.stats(TARGET_COMMENT_SHARE).unwrap(), baseline.stats(TARGET_COMMENT_SHARE).unwrap())?;
    println!("{:>5} {:>9} {:>9} {:>8} {:>8}", "step", "K_d inf", "K_d base", "news x", "cmt x");
    for t in (0..400).step_by(25) {
        let mark = if (WINDOW_START..WINDOW_END).contains(&t) { '*' } else { ' ' };
        println!(
            "{t:>5}{mark}{:>9.4} {:>9.4} {:>8.3} {:>8.3}",
            kd.0.mean[t], kd.1.mean[t], news.ratio[t], comments.ratio[t]
        );
    }
    Ok(())
}
