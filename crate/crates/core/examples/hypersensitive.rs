//! A filter that avoids what the general network likes (lambda_f > 1).

use collmind::config::preset;
use collmind::ensemble::run_ensemble;
use collmind::sim::{SimOptions, KD_GENERAL_COMMENT};

fn main() -> collmind::error::Result<()> {
    for lambda_f in [0.2, 1.0, 3.0] {
        let cfg = preset("hypersensitive")?.with_lambdas(lambda_f, 0.9);
        let e = run_ensemble(&cfg, 8, 2, &SimOptions::default())?;
        let kd = &e.stats(KD_GENERAL_COMMENT).unwrap().mean;
        println!(
            "lambda_f {lambda_f:.1}: K_d {:.4} -> {:.4} (t=20) -> {:.4} (t={})",
            kd[0],
            kd[20],
            kd[kd.len() - 1],
            kd.len() - 1
        );
    }
    Ok(())
}
