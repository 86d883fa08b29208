//! Embed the replica-averaged comment profiles of a baseline and an
//! alignment ensemble in a shared 2-D space.

use collmind::config::preset;
use collmind::ensemble::run_ensemble;
use collmind::metrics::{project_trajectories, ProjectionParams};
use collmind::rng::{derive_substream, SeedSpec, StreamLabel};
use collmind::sim::SimOptions;

fn main() -> collmind::error::Result<()> {
    let opts = SimOptions {
        keep_profiles: true,
        ..SimOptions::default()
    };
    let mut series = Vec::new();
    for name in ["baseline", "alignment"] {
        let mut cfg = preset(name)?;
        cfg.model.horizon = 320;
        series.push(run_ensemble(&cfg, 4, 1, &opts)?.mean_profiles);
    }
    let params = ProjectionParams {
        iterations: 400,
        ..ProjectionParams::default()
    };
    let mut stream = derive_substream(SeedSpec::new(7, 0, StreamLabel::Projection));
    let paths = project_trajectories(&series, &params, &mut stream)?;
    for t in (0..320).step_by(40) {
        let (b, a) = (paths[0].smoothed[t], paths[1].smoothed[t]);
        println!("{t:>4}  baseline ({:>7.2}, {:>7.2})  alignment ({:>7.2}, {:>7.2})", b[0], b[1], a[0], a[1]);
    }
    Ok(())
}
