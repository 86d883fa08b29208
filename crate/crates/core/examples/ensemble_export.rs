//! Run an ensemble in parallel, export it, and read the tables back.

use collmind::config::preset;
use collmind::ensemble::{run_ensemble, RunManifest};
use collmind::export::{export_results, read_manifest, read_metrics, METRICS_FILE};
use collmind::sim::SimOptions;

fn main() -> collmind::error::Result<()> {
    let mut cfg = preset("troll")?;
    cfg.model.horizon = 320;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let opts = SimOptions {
        snapshot_every: 40,
        keep_profiles: true,
        ..SimOptions::default()
    };
    let ensemble = run_ensemble(&cfg, 8, jobs, &opts)?;

    let dir = std::env::temp_dir().join("collmind-example-ensemble");
    export_results(&ensemble, RunManifest::new(&cfg, ensemble.replicas), &dir)?;

    let manifest = read_manifest(&dir)?;
    println!("{} ({} replicas, seed {})", manifest.scenario, manifest.replicas, manifest.master_seed);
    for (file, digest) in &manifest.digests {
        println!("  {file:<32} {}", &digest[..16]);
    }
    let back = read_metrics(dir.join(METRICS_FILE))?;
    let (name, stats) = &back[0];
    println!("{name}: mean at t=319 {:.4} ± {:.4}", stats.mean[319], stats.sem(319));
    Ok(())
}
