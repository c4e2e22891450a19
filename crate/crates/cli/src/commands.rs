//! The subcommands. Each one resolves its inputs, writes into a run
//! directory and returns a report for the console.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use cirl_core::control::{rga, steady_state_gain_matrix, write_gain_csv, GainBounds, Matrix2, Pairing, PidGainSet};
use cirl_core::optimize::{
    de_tune_static_pid, rollout_recorded, train_policy, training_seed_base, write_learning_curve, DeConfig, Fitness,
    StaticPidFitness, SwarmConfig,
};
use cirl_core::policy::{Controller, GainFile, PolicyFile, PolicyParams, StaticPid};
use cirl_core::scenarios::ScenarioSet;
use cirl_core::sim::trajectory::write_trajectory_csv;

use crate::config::{default_out_root, ExperimentConfig};
use crate::error::CliError;
use crate::manifest::{seed_dir, RunDir, RunManifest, SeedValue, Summary};

pub const POLICY_FILE: &str = "policy.json";
pub const GAINS_FILE: &str = "gains.json";
pub const REFERENCE_FILE: &str = "reference_gains.json";
pub const LEARNING_CURVE_FILE: &str = "learning_curve.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// `--out`, else `<output root>/<label>`.
pub fn run_dir(cfg: &ExperimentConfig, label: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| default_out_root().join(label))
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedTraining {
    pub seed: u64,
    pub random_search_best: f64,
    pub final_best: f64,
    pub episodes: u64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub seeds: Vec<SeedTraining>,
}

impl TrainReport {
    pub fn render(&self) -> String {
        let mut s = String::from("seed  random-search best  final best   episodes\n");
        for r in &self.seeds {
            let _ = writeln!(
                s,
                "{:>4}  {:>18.4}  {:>10.4}  {:>9}",
                r.seed, r.random_search_best, r.final_best, r.episodes
            );
        }
        if let Some(sum) = &self.manifest.summary {
            let _ = writeln!(s, "final best fitness: mean {:.4}, std {:.4}", sum.mean, sum.std);
        }
        let _ = write!(s, "written to {}", self.dir.display());
        s
    }
}

/// Random search + PSO for every seed; one policy and learning curve each.
pub fn train(cfg: &ExperimentConfig, dir: &Path, force: bool) -> Result<TrainReport> {
    cfg.validate()?;
    let set = cfg.scenario_set()?;
    let mut run = RunDir::create(dir, force)?;
    let trained = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let swarm = SwarmConfig { seed, ..cfg.swarm };
            train_policy(cfg.agent, &set, &swarm, &cfg.env).with_context(|| format!("training seed {seed}"))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(trained.len());
    for (&seed, t) in cfg.seeds.iter().zip(&trained) {
        let sub = seed_dir(seed);
        let file = PolicyFile::new(&t.policy, Some(seed), &cfg.scenario);
        run.write(&format!("{sub}/{POLICY_FILE}"), file.to_json()?.as_bytes())?;
        let mut curve = Vec::new();
        write_learning_curve(&mut curve, &t.outcome.history, cfg.record_wall_time)?;
        run.write(&format!("{sub}/{LEARNING_CURVE_FILE}"), &curve)?;
        rows.push(SeedTraining {
            seed,
            random_search_best: t.outcome.history[0].best_fitness,
            final_best: t.outcome.best_fitness,
            episodes: t.episodes,
        });
    }
    let summary = Summary::new(
        rows.iter()
            .map(|r| SeedValue {
                seed: r.seed,
                value: r.final_best,
            })
            .collect(),
    );
    let manifest = run.finish("train", cfg, Some(summary))?;
    Ok(TrainReport {
        dir: dir.to_path_buf(),
        manifest,
        seeds: rows,
    })
}

#[derive(Debug, Clone)]
pub struct TuneReport {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub tuned: Vec<GainFile>,
    pub reference: GainFile,
}

impl TuneReport {
    pub fn render(&self) -> String {
        let mut s = String::from("seed  fitness     Kp_cb   ti_cb   td_cb    Kp_v    ti_v    td_v\n");
        let mut row = |label: String, g: &GainFile| {
            let v = g.gains.to_array();
            let _ = writeln!(
                s,
                "{label:>4}  {:>9.4}  {:>6.3}  {:>6.3}  {:>6.3}  {:>6.3}  {:>6.3}  {:>6.3}",
                g.fitness.unwrap_or(f64::NAN),
                v[0],
                v[1],
                v[2],
                v[3],
                v[4],
                v[5]
            );
        };
        for g in &self.tuned {
            row(g.seed.map(|x| x.to_string()).unwrap_or_default(), g);
        }
        row("ref".into(), &self.reference);
        let _ = write!(s, "written to {}", self.dir.display());
        s
    }
}

/// Differential evolution of the static gains per seed, plus the reference
/// gain set scored under the same evaluator for comparison.
pub fn tune_pid(cfg: &ExperimentConfig, dir: &Path, force: bool) -> Result<TuneReport> {
    cfg.validate()?;
    let set = cfg.scenario_set()?;
    let bounds = GainBounds::default();
    let mut run = RunDir::create(dir, force)?;
    let tuned = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let de = DeConfig { seed, ..cfg.de };
            de_tune_static_pid(&bounds, &set, &de, cfg.de_episodes, &cfg.env)
                .with_context(|| format!("tuning seed {seed}"))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut files = Vec::with_capacity(tuned.len());
    for (&seed, t) in cfg.seeds.iter().zip(&tuned) {
        let file = GainFile {
            gains: t.gains,
            source: "differential-evolution".into(),
            fitness: Some(t.fitness),
            seed: Some(seed),
        };
        let sub = seed_dir(seed);
        run.write(&format!("{sub}/{GAINS_FILE}"), file.to_json()?.as_bytes())?;
        let mut hist = String::from("generation,best_fitness\n");
        for (g, f) in t.outcome.history.iter().enumerate() {
            let _ = writeln!(hist, "{g},{f}");
        }
        run.write(&format!("{sub}/de_history.csv"), hist.as_bytes())?;
        files.push(file);
    }

    let first = cfg.seeds[0];
    let judge = StaticPidFitness {
        set: &set,
        env: &cfg.env,
        n_e: cfg.de_episodes,
        seed_base: training_seed_base(first, cfg.de_episodes),
    };
    let reference = GainFile {
        gains: PidGainSet::REFERENCE,
        source: "reference".into(),
        fitness: Some(judge.evaluate(&PidGainSet::REFERENCE.to_array())?),
        seed: Some(first),
    };
    run.write(REFERENCE_FILE, reference.to_json()?.as_bytes())?;
    let summary = Summary::new(
        cfg.seeds
            .iter()
            .zip(&files)
            .map(|(&seed, f)| SeedValue {
                seed,
                value: f.fitness.unwrap_or(f64::NAN),
            })
            .collect(),
    );
    let manifest = run.finish("tune-pid", cfg, Some(summary))?;
    Ok(TuneReport {
        dir: dir.to_path_buf(),
        manifest,
        tuned: files,
        reference,
    })
}

/// What `evaluate` runs.
#[derive(Debug, Clone)]
pub enum Artifact {
    /// A policy or gain JSON used for every seed.
    File(PathBuf),
    /// A `train` or `tune-pid` run directory: seed k is scored with the
    /// artifact trained under seed k.
    RunDir(PathBuf),
    /// The built-in reference gain set.
    Reference,
}

impl Artifact {
    pub fn from_path(p: &Path) -> Self {
        if p.is_dir() {
            Artifact::RunDir(p.to_path_buf())
        } else {
            Artifact::File(p.to_path_buf())
        }
    }

    pub fn label(&self) -> String {
        match self {
            Artifact::Reference => "reference".into(),
            Artifact::File(p) | Artifact::RunDir(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "artifact".into()),
        }
    }
}

/// A loaded controller of either family.
pub enum Loaded {
    Policy(PolicyParams),
    Gains(StaticPid),
}

impl Loaded {
    pub fn controller(&self) -> &dyn Controller {
        match self {
            Loaded::Policy(p) => p,
            Loaded::Gains(g) => g,
        }
    }
}

/// Reads a policy document or a gain document.
pub fn load_artifact(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{} is not JSON: {e}", path.display())))?;
    if value.get("params").is_some() {
        let file = PolicyFile::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let policy = file
            .into_policy()
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Ok(Loaded::Policy(policy))
    } else if value.get("gains").is_some() {
        let file = GainFile::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if !GainBounds::default().contains(&file.gains) {
            return Err(CliError::Data(format!("{}: gains outside their bounds", path.display())).into());
        }
        Ok(Loaded::Gains(StaticPid { gains: file.gains }))
    } else {
        Err(CliError::Data(format!("{} is neither a policy nor a gain file", path.display())).into())
    }
}

fn artifact_for_seed(art: &Artifact, seed: u64) -> Result<Loaded> {
    match art {
        Artifact::Reference => Ok(Loaded::Gains(StaticPid {
            gains: PidGainSet::REFERENCE,
        })),
        Artifact::File(p) => load_artifact(p),
        Artifact::RunDir(d) => {
            let sub = d.join(seed_dir(seed));
            for name in [POLICY_FILE, GAINS_FILE] {
                if sub.join(name).exists() {
                    return load_artifact(&sub.join(name));
                }
            }
            Err(CliError::Data(format!("{} has no policy or gains for seed {seed}", d.display())).into())
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub summary: Summary,
}

impl EvalReport {
    pub fn render(&self) -> String {
        let mut s = String::from("seed  test reward\n");
        for v in &self.summary.per_seed {
            let _ = writeln!(s, "{:>4}  {:>11.4}", v.seed, v.value);
        }
        let _ = writeln!(s, "mean {:.4}, std {:.4}", self.summary.mean, self.summary.std);
        let _ = write!(s, "written to {}", self.dir.display());
        s
    }
}

struct SeedEval {
    reward: f64,
    files: Vec<(String, Vec<u8>)>,
}

fn evaluate_seed(ctrl: &dyn Controller, set: &ScenarioSet, cfg: &ExperimentConfig, seed: u64) -> Result<SeedEval> {
    let mut out = SeedEval {
        reward: 0.0,
        files: Vec::new(),
    };
    for s in &set.scenarios {
        let rec =
            rollout_recorded(ctrl, s, &cfg.env, seed).with_context(|| format!("seed {seed}, scenario '{}'", s.id))?;
        out.reward += rec.total_reward;
        let suffix = if set.len() == 1 {
            String::new()
        } else {
            format!("-{}", s.id)
        };
        let mut traj = Vec::new();
        write_trajectory_csv(&mut traj, &rec.rows)?;
        out.files
            .push((format!("{}/trajectory{suffix}.csv", seed_dir(seed)), traj));
        if !rec.gains.is_empty() {
            let mut g = Vec::new();
            write_gain_csv(&mut g, &rec.gains)?;
            out.files.push((format!("{}/gains{suffix}.csv", seed_dir(seed)), g));
        }
    }
    Ok(out)
}

/// Rolls the artifact out on every seed, writing trajectories, gain
/// trajectories and a reward summary.
pub fn evaluate(cfg: &ExperimentConfig, art: &Artifact, dir: &Path, force: bool) -> Result<EvalReport> {
    cfg.validate()?;
    let set = cfg.scenario_set()?;
    let mut run = RunDir::create(dir, force)?;
    let results = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let loaded = artifact_for_seed(art, seed)?;
            evaluate_seed(loaded.controller(), &set, cfg, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_seed = Vec::with_capacity(results.len());
    for (&seed, r) in cfg.seeds.iter().zip(results) {
        for (name, bytes) in &r.files {
            run.write(name, bytes)?;
        }
        per_seed.push(SeedValue { seed, value: r.reward });
    }
    let summary = Summary::new(per_seed);
    run.write(SUMMARY_FILE, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    let manifest = run.finish("evaluate", cfg, Some(summary.clone()))?;
    Ok(EvalReport {
        dir: dir.to_path_buf(),
        manifest,
        summary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RgaReport {
    /// Rows are outputs (C_B, V); columns are inputs (F_in, T_c).
    pub gain_matrix: Matrix2,
    pub lambda: Matrix2,
    pub row_sums: [f64; 2],
    pub column_sums: [f64; 2],
    pub pairing: Pairing,
    pub pairing_text: String,
}

impl RgaReport {
    pub fn render(&self) -> String {
        let l = &self.lambda;
        let k = &self.gain_matrix;
        format!(
            "steady-state gains (rows C_B, V; columns F_in, T_c)\n  [{:>12.6} {:>12.6}]\n  [{:>12.6} {:>12.6}]\n\
             relative gain array\n  [{:>10.6} {:>10.6}]\n  [{:>10.6} {:>10.6}]\n\
             row sums {:.9} {:.9}; column sums {:.9} {:.9}\npairing: {}",
            k[0][0],
            k[0][1],
            k[1][0],
            k[1][1],
            l[0][0],
            l[0][1],
            l[1][0],
            l[1][1],
            self.row_sums[0],
            self.row_sums[1],
            self.column_sums[0],
            self.column_sums[1],
            self.pairing_text
        )
    }
}

pub fn rga_report(cfg: &ExperimentConfig) -> Result<RgaReport> {
    let k = steady_state_gain_matrix(&cfg.env.params, &cfg.rga)?;
    let l = rga(&k)?;
    let pairing = Pairing::from_rga(&l);
    Ok(RgaReport {
        gain_matrix: k,
        lambda: l,
        row_sums: [l[0][0] + l[0][1], l[1][0] + l[1][1]],
        column_sums: [l[0][0] + l[1][0], l[0][1] + l[1][1]],
        pairing,
        pairing_text: pairing.describe().to_string(),
    })
}

/// Computes the RGA at the configured operating point and saves `rga.json`.
pub fn rga_command(cfg: &ExperimentConfig, dir: &Path, force: bool) -> Result<(RgaReport, RunManifest)> {
    let report = rga_report(cfg)?;
    let mut run = RunDir::create(dir, force)?;
    run.write("rga.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
    let manifest = run.finish("rga", cfg, None)?;
    Ok((report, manifest))
}

/// Scenario JSON for a built-in id or a file, with overrides applied.
pub fn scenario_emit(cfg: &ExperimentConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(&cfg.scenario_set()?)?)
}
