//! Build a scenario from TOML, validate it and run it.

use collmind::config::ScenarioConfig;
use collmind::sim::{run_simulation, RunSeeds, SimOptions, MEAN_WEIGHT, NEWS_COUNT};

const SCENARIO: &str = r#"
name = "small-turnover"
description = "short memory on a small topic set"

[model]
n_topics = 60
n_events = 400
horizon = 150
lambda_m = 0.95

[[schedule]]
kind = "turnover"
start = 50
end = 100
strength = 0.8
"#;

fn main() {
    let cfg = match ScenarioConfig::from_toml_str(SCENARIO) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bad scenario: {e}");
            std::process::exit(2);
        }
    };
    let rec = run_simulation(&cfg, RunSeeds::single(cfg.ensemble.seed, 0), &SimOptions::default()).unwrap();
    let (w, n) = (rec.metric(MEAN_WEIGHT).unwrap(), rec.metric(NEWS_COUNT).unwrap());
    for t in (0..150).step_by(25) {
        println!("{t:>4}: mean weight {:.4}, {} news", w[t], n[t]);
    }
}
