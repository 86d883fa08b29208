use collmind::config::preset;
use collmind::ensemble::{run_ensemble, RunManifest};
use collmind::export::export_results;
use collmind::sim::{run_simulation, RunSeeds, SimOptions};

fn short(name: &str) -> collmind::config::ScenarioConfig {
    let mut cfg = preset(name).unwrap();
    cfg.model.n_topics = 120;
    cfg.model.n_events = 500;
    if cfg.schedule.entries.iter().all(|e| e.end <= 310) {
        cfg.model.horizon = 310;
    }
    cfg
}

#[test]
fn same_seed_same_record() {
    let cfg = short("troll");
    let a = run_simulation(&cfg, RunSeeds::for_scenario(&cfg, 4), &SimOptions::default()).unwrap();
    let b = run_simulation(&cfg, RunSeeds::for_scenario(&cfg, 4), &SimOptions::default()).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.final_community, b.final_community);
}

#[test]
fn replicas_differ() {
    let cfg = short("baseline");
    let a = run_simulation(&cfg, RunSeeds::for_scenario(&cfg, 0), &SimOptions::default()).unwrap();
    let b = run_simulation(&cfg, RunSeeds::for_scenario(&cfg, 1), &SimOptions::default()).unwrap();
    assert_ne!(a.values, b.values);
}

#[test]
fn export_is_independent_of_jobs() {
    let cfg = short("counterspeech");
    let opts = SimOptions {
        snapshot_every: 50,
        keep_profiles: true,
        ..SimOptions::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, jobs) in dirs.iter().zip([1, 8]) {
        let e = run_ensemble(&cfg, 3, jobs, &opts).unwrap();
        export_results(&e, RunManifest::new(&cfg, 3), dir.path()).unwrap();
    }
    let files: Vec<_> = walk(dirs[0].path());
    assert!(files.len() > 4);
    for rel in files {
        let a = std::fs::read(dirs[0].path().join(&rel)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&rel)).unwrap();
        assert!(a == b, "{} differs", rel.display());
    }
}

fn walk(root: &std::path::Path) -> Vec<std::path::PathBuf> {
    walkdir::WalkDir::new(root)
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.path().strip_prefix(root).unwrap().to_path_buf())
        .collect()
}
