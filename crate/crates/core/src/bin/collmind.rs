use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use collmind::analysis;
use collmind::config::{preset, ScenarioConfig, PRESETS};
use collmind::ensemble::{run_ensemble, RunManifest};
use collmind::error::Error;
use collmind::export::{self, OutputTree};
use collmind::metrics::{project_trajectory, ProjectionParams};
use collmind::rng::{derive_substream, SeedSpec, StreamLabel};
use collmind::sim::SimOptions;

#[derive(Parser)]
#[command(name = "collmind", version, about = "Collective-mind ensemble simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario as an ensemble and export its tables.
    Run(RunArgs),
    /// Grid over filter strength, memory strength and influence strength.
    Sweep(SweepArgs),
    /// Ratios, quantile differences, denoising and projection of exported runs.
    Analyze(AnalyzeArgs),
    /// List the shipped scenarios.
    Presets,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML) or preset name.
    #[arg(long, default_value = "baseline")]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
    /// Community snapshot cadence for replica 0; 0 disables snapshots.
    #[arg(long)]
    snapshot_every: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Also run the influence-free baseline into `<out>/baseline`.
    #[arg(long)]
    with_baseline: bool,
    /// Export replica-averaged comment profiles.
    #[arg(long)]
    profiles: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.8")]
    lambda_f: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99")]
    lambda_m: Vec<f64>,
    /// Influence strengths; empty keeps the scenario's own.
    #[arg(long, value_delimiter = ',')]
    strength: Vec<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Output directory of an earlier `run`.
    #[arg(long)]
    input: PathBuf,
    /// Output directory of the matching baseline run.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Total-variation penalty for denoising every metric mean.
    #[arg(long)]
    denoise: Option<f64>,
    /// Embed the replica-averaged comment profiles in 2-D.
    #[arg(long)]
    project: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn load_scenario(spec: &str) -> Result<ScenarioConfig, Failure> {
    let path = Path::new(spec);
    let loaded = if path.exists() || spec.ends_with(".toml") {
        ScenarioConfig::load(path)
    } else {
        preset(spec)
    };
    loaded.map_err(|e| Failure::Config(e.to_string()))
}

fn resolve(common: &Common) -> Result<(ScenarioConfig, SimOptions), Failure> {
    let mut cfg = load_scenario(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.ensemble.seed = seed;
    }
    if let Some(r) = common.replicas {
        cfg.ensemble.replicas = r;
    }
    if let Some(s) = common.snapshot_every {
        cfg.ensemble.snapshot_every = s;
    }
    if common.jobs == 0 {
        return Err(Failure::Config("--jobs must be at least 1".into()));
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let options = SimOptions {
        snapshot_every: cfg.ensemble.snapshot_every,
        ..SimOptions::default()
    };
    Ok((cfg, options))
}

fn run_one(cfg: &ScenarioConfig, options: &SimOptions, jobs: usize, out: &Path) -> Result<(), Failure> {
    let ensemble = run_ensemble(cfg, cfg.ensemble.replicas, jobs, options)?;
    let path = export::export_results(&ensemble, RunManifest::new(cfg, ensemble.replicas), out)?;
    eprintln!("{}: {} replicas x {} steps -> {}", cfg.name, ensemble.replicas, ensemble.steps(), path.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let (cfg, mut options) = resolve(&args.common)?;
    options.keep_profiles = args.profiles;
    run_one(&cfg, &options, args.common.jobs, &args.common.out)?;
    if args.with_baseline {
        run_one(&cfg.baseline(), &options, args.common.jobs, &args.common.out.join("baseline"))?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let (base_cfg, options) = resolve(&args.common)?;
    let strengths: Vec<Option<f64>> = if args.strength.is_empty() {
        vec![None]
    } else {
        args.strength.iter().copied().map(Some).collect()
    };
    let mut index = String::from("lambda_f,lambda_m,strength,dir,baseline_dir\n");
    for &lf in &args.lambda_f {
        for &lm in &args.lambda_m {
            let cell = base_cfg.clone().with_lambdas(lf, lm);
            cell.validate().map_err(|e| Failure::Config(e.to_string()))?;
            let base_dir = format!("baseline_lf{lf}_lm{lm}");
            if !cell.schedule.is_empty() {
                run_one(&cell.baseline(), &options, args.common.jobs, &args.common.out.join(&base_dir))?;
            }
            for s in &strengths {
                let scenario = match s {
                    Some(s) => cell.clone().with_strength(None, *s),
                    None => cell.clone(),
                };
                scenario.validate().map_err(|e| Failure::Config(e.to_string()))?;
                let label = s.map_or("default".to_string(), |s| s.to_string());
                let dir = format!("lf{lf}_lm{lm}_s{label}");
                run_one(&scenario, &options, args.common.jobs, &args.common.out.join(&dir))?;
                let base = if cell.schedule.is_empty() { "" } else { base_dir.as_str() };
                index.push_str(&format!("{lf},{lm},{label},{dir},{base}\n"));
            }
        }
    }
    let path = args.common.out.join("sweep.csv");
    fs::write(&path, index).map_err(|e| Failure::from(Error::Io { path, source: e }))?;
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let input = export::read_metrics(args.input.join(export::METRICS_FILE))?;
    let manifest = export::read_manifest(&args.input)?;
    let out_dir = args.out.clone().unwrap_or_else(|| args.input.join("analysis"));
    let mut tree = OutputTree::new();

    if let Some(base_dir) = &args.baseline {
        let baseline = export::read_metrics(base_dir.join(export::METRICS_FILE))?;
        let (ratios, skipped) = analysis::ratios(&input, &baseline);
        for (name, why) in skipped {
            eprintln!("ratio of {name} skipped: {why}");
        }
        tree.add("ratios.csv", analysis::ratio_table(&ratios));
        if let Some(d) = analysis::quantile_diffs(&input, &baseline) {
            tree.add("quantile_diff.csv", analysis::quantile_diff_table(&d));
        }
    }
    if let Some(lam) = args.denoise {
        if !(lam >= 0.0) {
            return Err(Failure::Config("--denoise needs a non-negative penalty".into()));
        }
        tree.add("denoised.csv", analysis::denoised_table(&input, lam));
    }
    if args.project {
        let profiles = export::read_profiles(args.input.join(export::PROFILES_FILE))?;
        let seed = args.seed.unwrap_or(manifest.master_seed);
        let mut stream = derive_substream(SeedSpec::new(seed, 0, StreamLabel::Projection));
        let trajectory = project_trajectory(&profiles, &ProjectionParams::default(), &mut stream)?;
        tree.add(export::TRAJECTORY_FILE, export::trajectory_table(&trajectory));
    }
    let path = tree.write(&out_dir, manifest)?;
    eprintln!("analysis -> {}", path.parent().unwrap_or(&out_dir).display());
    Ok(())
}

fn cmd_presets() -> Result<(), Failure> {
    for name in PRESETS {
        let cfg = preset(name)?;
        println!("{name:<16} {}", cfg.description);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Presets => cmd_presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
