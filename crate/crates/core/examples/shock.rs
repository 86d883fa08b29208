use collmind::config::preset;
use collmind::sim::{run_simulation, RunSeeds, SimOptions, TARGET_COMMUNITY_RANK, TARGET_NEWS_SHARE};

/// An external event makes the target briefly dominate the general network.
/// Single replica, step by step.
fn main() -> collmind::error::Result<()> {
    let mut cfg = preset("shock")?;
    cfg.model.horizon = 360;
    let rec = run_simulation(&cfg, RunSeeds::for_scenario(&cfg, 3), &SimOptions::default())?;
    let share = rec.metric(TARGET_NEWS_SHARE).unwrap();
    let rank = rec.metric(TARGET_COMMUNITY_RANK).unwrap();
    for t in [0, 50, 99, 100, 101, 150, 200, 299, 300, 320, 359] {
        println!("t={t:<4} news share {:.4}  community rank {:.3}", share[t], rank[t]);
    }
    Ok(())
}
