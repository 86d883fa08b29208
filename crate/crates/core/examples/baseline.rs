//! A single uninfluenced run: how far the comment ranking drifts from the
//! general-network ranking as the community forms its own taste.

use collmind::config::preset;
use collmind::sim::{run_simulation, RunSeeds, SimOptions, KD_GENERAL_COMMENT, KD_GENERAL_COMMUNITY};

fn main() -> collmind::error::Result<()> {
    let mut cfg = preset("baseline")?;
    cfg.model.horizon = 200;
    let rec = run_simulation(&cfg, RunSeeds::for_scenario(&cfg, 0), &SimOptions::default())?;

    let comment = rec.metric(KD_GENERAL_COMMENT).unwrap();
    let community = rec.metric(KD_GENERAL_COMMUNITY).unwrap();
    println!("{:>5} {:>10} {:>10}", "step", "K_d cmt", "K_d comm");
    for t in (0..rec.steps()).step_by(20) {
        println!("{t:>5} {:>10.4} {:>10.4}", comment[t], community[t]);
    }
    Ok(())
}
