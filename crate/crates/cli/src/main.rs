use anyhow::Context;
use clap::{Parser, Subcommand};
use gammalab_cli::config::BUILTINS;
use gammalab_cli::{builtin, emit_plots, run_scenario, ResultStore, ScenarioConfig, Stage};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "gammalab", version)]
#[command(about = "Second-order layer energies: constants, isoperimetry, weighted minimization and dynamics")]
struct Cli {
    /// Scenario file (`key = value`, `[section]` headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in scenario, used when no --config is given.
    #[arg(long, global = true)]
    scenario: Option<String>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Random seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Layer constants of the potential.
    Constants,
    /// Sampled transition profile.
    Profile,
    /// Isoperimetric data at the anchor volume.
    Iso,
    /// The weight η = 𝓘 ∘ V.
    Weight,
    /// Weighted one-dimensional minimization along the ε-ladder.
    Minimize1d,
    /// Second-order ranking of the first-order minimizers.
    Predict,
    /// Slow-motion runs of the phase-field flows.
    Dynamics,
    /// Every stage declared by the scenario, then the plots.
    Run,
    /// Plots from an existing result store.
    Plots,
    /// List the built-in scenarios.
    Scenarios,
}

fn load(cli: &Cli, default: &str) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match (&cli.config, &cli.scenario) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ScenarioConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(name)) => builtin(name)?,
        (None, None) => builtin(default)?,
    };
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run_stage(cli: &Cli, stage: Stage) -> anyhow::Result<()> {
    let default = if stage == Stage::Dynamics { "slow-motion" } else { "flat" };
    let mut cfg = load(cli, default)?;
    cfg.stages = stage.closure();
    let store = run_scenario(&cfg)?;
    let record = store.get(stage).context("stage left no record")?;
    println!("{}", serde_json::to_string_pretty(record)?);
    eprintln!("results in {}", store.dir.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Constants => run_stage(&cli, Stage::Constants),
        Command::Profile => run_stage(&cli, Stage::Profile),
        Command::Iso => run_stage(&cli, Stage::Iso),
        Command::Weight => run_stage(&cli, Stage::Weight),
        Command::Minimize1d => run_stage(&cli, Stage::Minimize1d),
        Command::Predict => run_stage(&cli, Stage::Predict),
        Command::Dynamics => run_stage(&cli, Stage::Dynamics),
        Command::Run => {
            let cfg = load(&cli, "flat")?;
            let mut store = run_scenario(&cfg)?;
            let plots = emit_plots(&mut store)?;
            println!("run {} ({})", store.manifest.run_id, store.manifest.scenario);
            println!("stages: {}", store.manifest.completed.join(", "));
            for t in &store.manifest.tables {
                println!("table  {}", store.dir.join(t).display());
            }
            for f in &plots.files {
                println!("plot   {}", f.display());
            }
            for n in &plots.notes {
                println!("note   {n}");
            }
            Ok(())
        }
        Command::Plots => {
            let dir = match &cli.out {
                Some(d) => d.clone(),
                None => load(&cli, "flat")?.output,
            };
            let mut store = ResultStore::open(&dir)?;
            let plots = emit_plots(&mut store)?;
            for f in &plots.files {
                println!("plot   {}", f.display());
            }
            for n in &plots.notes {
                println!("note   {n}");
            }
            Ok(())
        }
        Command::Scenarios => {
            for (name, _) in BUILTINS {
                println!("{name}");
            }
            Ok(())
        }
    }
}
