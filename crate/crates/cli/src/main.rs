use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use cirl_cli::commands::{self, Artifact};
use cirl_cli::config::{parse_seeds, ExperimentConfig};
use cirl_cli::error::{exit_code, EXIT_USAGE};
use cirl_cli::plot::{self, PlotKind};
use cirl_core::policy::AgentKind;

#[derive(Parser)]
#[command(
    name = "cirl",
    version,
    about = "Control-informed RL experiments on a simulated CSTR"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario id or scenario JSON file.
    #[arg(long)]
    scenario: Option<String>,
    /// Seeds as a..b (inclusive), a,b,c or a single number.
    #[arg(long, value_parser = |s: &str| parse_seeds(s).map(Seeds))]
    seeds: Option<Seeds>,
    /// Run directory. Defaults to $CIRL_OUT_DIR/<command>, else runs/<command>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write into a run directory that already holds results.
    #[arg(long)]
    force: bool,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

#[derive(Clone, Copy, ValueEnum)]
enum Agent {
    Cirl,
    Rl,
}

impl From<Agent> for AgentKind {
    fn from(a: Agent) -> Self {
        match a {
            Agent::Cirl => AgentKind::Cirl,
            Agent::Rl => AgentKind::PureRl,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train policies with random search followed by particle swarm optimization.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        agent: Option<Agent>,
        /// Record wall-clock time in the learning curves (breaks byte reproducibility).
        #[arg(long)]
        wall_time: bool,
    },
    /// Tune a static PID with differential evolution.
    TunePid {
        #[command(flatten)]
        common: Common,
    },
    /// Roll out a policy file, gain file or run directory on a scenario.
    Evaluate {
        /// Policy or gain JSON, or a train/tune-pid run directory.
        #[arg(required_unless_present = "reference")]
        artifact: Option<PathBuf>,
        /// Evaluate the built-in reference gain set instead.
        #[arg(long, conflicts_with = "artifact")]
        reference: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Relative gain array at the nominal operating point.
    Rga {
        #[command(flatten)]
        common: Common,
    },
    /// Render trajectory, gain or learning-curve CSVs to SVG.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// trajectory, gains or learning; detected from the header when omitted.
        #[arg(long, value_parser = |s: &str| PlotKind::parse(s).ok_or_else(|| format!("unknown plot kind '{s}'")))]
        kind: Option<PlotKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scenario utilities.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Print a scenario set as JSON.
    Emit {
        /// Built-in id or scenario file.
        scenario: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(common: &Common, default_scenario: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let mut c = ExperimentConfig::default();
            if let Some(s) = default_scenario {
                c.scenario = s.to_string();
            }
            c
        }
    };
    if let Some(s) = &common.scenario {
        cfg.scenario = s.clone();
    }
    if let Some(seeds) = &common.seeds {
        cfg.seeds = seeds.0.clone();
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn scenario_label(cfg: &ExperimentConfig) -> String {
    PathBuf::from(&cfg.scenario)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            common,
            agent,
            wall_time,
        } => {
            let mut cfg = resolve(&common, None)?;
            if let Some(a) = agent {
                cfg.agent = a.into();
            }
            cfg.record_wall_time |= wall_time;
            let dir = commands::run_dir(&cfg, &format!("train-{}-{}", cfg.agent.label(), scenario_label(&cfg)));
            println!("{}", commands::train(&cfg, &dir, common.force)?.render());
        }
        Command::TunePid { common } => {
            let cfg = resolve(&common, None)?;
            let dir = commands::run_dir(&cfg, &format!("tune-pid-{}", scenario_label(&cfg)));
            println!("{}", commands::tune_pid(&cfg, &dir, common.force)?.render());
        }
        Command::Evaluate {
            artifact,
            reference,
            common,
        } => {
            let cfg = resolve(&common, Some("test"))?;
            let art = match (&artifact, reference) {
                (_, true) => Artifact::Reference,
                (Some(p), false) => Artifact::from_path(p),
                (None, false) => unreachable!("clap requires an artifact"),
            };
            let dir = commands::run_dir(&cfg, &format!("evaluate-{}-{}", art.label(), scenario_label(&cfg)));
            println!("{}", commands::evaluate(&cfg, &art, &dir, common.force)?.render());
        }
        Command::Rga { common } => {
            let cfg = resolve(&common, None)?;
            let dir = commands::run_dir(&cfg, "rga");
            let (report, _) = commands::rga_command(&cfg, &dir, common.force)?;
            println!("{}", report.render());
        }
        Command::Plot { csv, kind, out } => {
            let dir = out.unwrap_or_else(|| cirl_cli::config::default_out_root().join("plots"));
            let path = plot::plot(&csv, kind, &dir)?;
            println!("wrote {}", path.display());
        }
        Command::Scenario {
            action: ScenarioAction::Emit { scenario, out },
        } => {
            let cfg = ExperimentConfig {
                scenario,
                ..ExperimentConfig::default()
            };
            let json = commands::scenario_emit(&cfg)?;
            match out {
                Some(p) => std::fs::write(&p, json + "\n")?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
