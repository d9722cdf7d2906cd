//! Experiment configuration, dispatch and artifact writing behind the
//! `ftnpl` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    convergence_verdict, cycle_score, distance, time_average, RegretPoint, RunSummary, TrajectoryLog,
};
use crate::error::{Error, Result};
use crate::experiment::{
    run_mw, run_pennies, run_replicator_flow, run_toygan, FtnplConfig, GanLearner, GanOptions, PenniesLearner,
    PenniesOptions, ReplicatorOptions, UpdateOrder,
};
use crate::games::PenniesVariant;
use crate::imitation::{run_circleworld, write_trajectories_csv, GailConfig};
use crate::learners::FtplConfig;
use crate::mediator::Penalty;
use crate::numerics::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Pennies,
    PenniesNonconvex,
    Replicator,
    Toygan,
    Circleworld,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Pennies => "pennies",
            Experiment::PenniesNonconvex => "pennies_nonconvex",
            Experiment::Replicator => "replicator",
            Experiment::Toygan => "toygan",
            Experiment::Circleworld => "circleworld",
        }
    }

    fn default_learner(self) -> LearnerKind {
        match self {
            Experiment::Replicator => LearnerKind::FtrlEntropy,
            _ => LearnerKind::Ftnpl,
        }
    }

    fn supports(self, learner: LearnerKind) -> bool {
        use LearnerKind::*;
        match self {
            Experiment::Pennies | Experiment::PenniesNonconvex => matches!(learner, FtrlL2 | Ftpl | Ftnpl),
            Experiment::Replicator => learner == FtrlEntropy,
            Experiment::Toygan => matches!(learner, FtrlL2 | Ftnpl),
            Experiment::Circleworld => learner == Ftnpl,
        }
    }

    fn default_steps(self) -> usize {
        match self {
            Experiment::Pennies | Experiment::PenniesNonconvex | Experiment::Replicator => 10_000,
            Experiment::Toygan => 5_000,
            Experiment::Circleworld => 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    FtrlL2,
    FtrlEntropy,
    Ftpl,
    Ftnpl,
}

impl LearnerKind {
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::FtrlL2 => "ftrl_l2",
            LearnerKind::FtrlEntropy => "ftrl_entropy",
            LearnerKind::Ftpl => "ftpl",
            LearnerKind::Ftnpl => "ftnpl",
        }
    }
}

/// Parses a snake_case enum value, reporting failures against `field`.
pub fn parse_enum<T: DeserializeOwned>(field: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|e| Error::usage(field, e.to_string()))
}

/// Settings of the continuous pennies runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenniesSettings {
    pub phi0: [f64; 2],
    pub omega0: [f64; 2],
    pub order: UpdateOrder,
    /// Box half-width of the regret comparator set.
    pub regret_bound: f64,
    pub regret_points: usize,
    /// Tolerance `ε` of the convergence verdict.
    pub eps: f64,
    /// Final window of the verdict as a fraction of the run.
    pub window_fraction: f64,
}

impl Default for PenniesSettings {
    fn default() -> Self {
        PenniesSettings {
            phi0: [0.5, -0.5],
            omega0: [-0.5, 0.5],
            order: UpdateOrder::Alternating,
            regret_bound: 1.0,
            regret_points: 20,
            eps: 0.05,
            window_fraction: 0.1,
        }
    }
}

/// A full experiment description. `None` fields are filled by
/// [`ExperimentConfig::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub learner: Option<LearnerKind>,
    pub steps: Option<usize>,
    /// Player step size.
    pub lr: Option<f64>,
    pub seed: u64,
    /// Independent runs, one per seed. Empty means `[seed]`.
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub ftnpl: FtnplConfig,
    pub ftpl: FtplConfig,
    pub pennies: PenniesSettings,
    pub replicator: ReplicatorOptions,
    pub toygan: GanOptions,
    pub circleworld: GailConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            learner: None,
            steps: None,
            lr: None,
            seed: 0,
            seeds: Vec::new(),
            out: PathBuf::from("runs"),
            ftnpl: FtnplConfig::default(),
            ftpl: FtplConfig::default(),
            pennies: PenniesSettings::default(),
            replicator: ReplicatorOptions::default(),
            toygan: GanOptions::default(),
            circleworld: GailConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub learner: Option<String>,
    pub k: Option<usize>,
    pub code_size: Option<usize>,
    pub penalty: Option<String>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a JSON document; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::usage(if path == "." { "config".to_string() } else { path }, e.into_inner().to_string())
        })
    }

    /// Defaults, then the file, then the flags.
    pub fn load(experiment: Experiment, file: Option<&str>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(text) => Self::from_json(text)?,
            None => Self::default(),
        };
        if cfg.experiment.is_some_and(|e| e != experiment) {
            return Err(Error::usage("experiment", format!("the file configures another experiment than `{}`", experiment.name())));
        }
        cfg.experiment = Some(experiment);
        if let Some(seed) = flags.seed {
            cfg.seed = seed;
            cfg.seeds.clear();
        }
        if let Some(steps) = flags.steps {
            cfg.steps = Some(steps);
        }
        if let Some(l) = &flags.learner {
            cfg.learner = Some(parse_enum("learner", l)?);
        }
        if let Some(k) = flags.k {
            cfg.ftnpl.k = k;
        }
        if let Some(c) = flags.code_size {
            cfg.ftnpl.code_size = c;
        }
        if let Some(p) = &flags.penalty {
            cfg.ftnpl.penalty = parse_enum::<Penalty>("penalty", p)?;
        }
        if let Some(out) = &flags.out {
            cfg.out = out.clone();
        }
        cfg.resolve()
    }

    /// Fills every default and copies the shared settings into the
    /// experiment sections, so that the result reproduces the run as is.
    pub fn resolve(mut self) -> Result<Self> {
        let experiment = self.experiment.ok_or_else(|| Error::usage("experiment", "no experiment selected"))?;
        let learner = *self.learner.get_or_insert(experiment.default_learner());
        if !experiment.supports(learner) {
            return Err(Error::usage(
                "learner",
                format!("`{}` does not run on `{}`", learner.name(), experiment.name()),
            ));
        }
        let steps = *self.steps.get_or_insert(experiment.default_steps());
        let lr = *self.lr.get_or_insert(match experiment {
            Experiment::Pennies | Experiment::PenniesNonconvex => 0.01,
            Experiment::Replicator => self.replicator.lr,
            Experiment::Toygan => self.toygan.lr,
            Experiment::Circleworld => self.circleworld.surrogate.lr,
        });
        if !(lr > 0.0) {
            return Err(Error::usage("lr", "must be positive"));
        }
        self.replicator.steps = steps;
        self.replicator.lr = lr;
        self.toygan.steps = steps;
        self.toygan.lr = lr;
        self.toygan.game.code_size = self.ftnpl.code_size;
        self.circleworld.ftnpl = self.ftnpl.clone();
        self.circleworld.surrogate.lr = lr;
        if learner == LearnerKind::Ftnpl {
            self.ftnpl.validate()?;
        }
        if learner == LearnerKind::Ftpl {
            self.ftpl.validate()?;
        }
        if experiment == Experiment::Circleworld {
            self.circleworld.validate()?;
        }
        if !(self.pennies.eps > 0.0) {
            return Err(Error::usage("pennies.eps", "must be positive"));
        }
        if !(self.pennies.window_fraction > 0.0 && self.pennies.window_fraction <= 1.0) {
            return Err(Error::usage("pennies.window_fraction", "must lie in (0, 1]"));
        }
        Ok(self)
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.seeds.clone()
        }
    }

    fn experiment(&self) -> Result<Experiment> {
        self.experiment.ok_or_else(|| Error::usage("experiment", "no experiment selected"))
    }

    fn learner(&self) -> Result<LearnerKind> {
        self.learner.ok_or_else(|| Error::usage("learner", "config is not resolved"))
    }

    fn steps(&self) -> Result<usize> {
        self.steps.ok_or_else(|| Error::usage("steps", "config is not resolved"))
    }
}

/// Files written by one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub trajectory_csv: PathBuf,
    pub summary_json: PathBuf,
    /// Expert and learned trajectories of a circleworld run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_csv: Vec<PathBuf>,
    /// The resolved single-seed configuration of the run.
    pub config: ExperimentConfig,
}

/// Contents of the summary JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: Experiment,
    pub learner: LearnerKind,
    pub seed: u64,
    pub summary: RunSummary,
    pub config: ExperimentConfig,
}

/// Writes `bytes` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::usage("out", format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

/// Distance, cycling and verdict digest of a logged strategy trajectory.
pub fn strategy_summary(
    log: &TrajectoryLog,
    mne: &[f64],
    center: [f64; 2],
    eps: f64,
    window_fraction: f64,
    regret: Vec<RegretPoint>,
) -> Result<RunSummary> {
    let states = log.states();
    if states.is_empty() {
        return Err(Error::Unavailable("a verdict needs at least one step".into()));
    }
    let window = ((states.len() as f64 * window_fraction).round() as usize).clamp(1, states.len());
    let dists: Vec<f64> = states.iter().map(|s| distance(s, mne)).collect();
    Ok(RunSummary {
        steps: states.len() as u64,
        final_distance: dists.last().copied(),
        min_distance: dists.iter().copied().reduce(f64::min),
        time_average_distance: Some(distance(&time_average(&states)?, mne)),
        regret,
        cycle_score: Some(cycle_score(&log.plane(), center)),
        verdict: Some(convergence_verdict(&states, Some(mne), eps, window)?),
        extra: BTreeMap::new(),
    })
}

struct RunOutput {
    summary: RunSummary,
    csv: Vec<u8>,
    extra: Vec<(&'static str, Vec<u8>)>,
}

fn execute(cfg: &ExperimentConfig, seed: u64) -> Result<RunOutput> {
    let experiment = cfg.experiment()?;
    let learner = cfg.learner()?;
    let steps = cfg.steps()?;
    let mut rng = Rng::new(seed);
    match experiment {
        Experiment::Pennies | Experiment::PenniesNonconvex => {
            let p = &cfg.pennies;
            let opts = PenniesOptions {
                variant: if experiment == Experiment::Pennies {
                    PenniesVariant::Convex
                } else {
                    PenniesVariant::Relu
                },
                steps,
                lr: cfg.lr.unwrap_or(0.01),
                phi0: p.phi0,
                omega0: p.omega0,
                order: p.order,
                regret_bound: p.regret_bound,
                regret_points: p.regret_points,
            };
            let l = match learner {
                LearnerKind::FtrlL2 => PenniesLearner::FtrlL2,
                LearnerKind::Ftpl => PenniesLearner::Ftpl(cfg.ftpl.clone()),
                _ => PenniesLearner::Ftnpl(cfg.ftnpl.clone()),
            };
            let out = run_pennies(&opts, &l, &mut rng)?;
            let summary = strategy_summary(&out.log, &[0.0; 4], [0.0, 0.0], p.eps, p.window_fraction, out.regret)?;
            Ok(RunOutput {
                summary,
                csv: csv_bytes(|b| out.log.write_csv(b))?,
                extra: Vec::new(),
            })
        }
        Experiment::Replicator => {
            let out = run_mw(&cfg.replicator)?;
            let p = &cfg.pennies;
            let mut summary = strategy_summary(&out.log, &[0.5; 4], [0.5, 0.5], p.eps, p.window_fraction, out.regret)?;
            let flow = run_replicator_flow(&cfg.replicator)?;
            summary.extra.insert("flow_max_deviation".into(), flow.max_deviation());
            summary.extra.insert("flow_max_drift".into(), flow.max_drift);
            Ok(RunOutput {
                summary,
                csv: csv_bytes(|b| out.log.write_csv(b))?,
                extra: Vec::new(),
            })
        }
        Experiment::Toygan => {
            let l = match learner {
                LearnerKind::FtrlL2 => GanLearner::Alternating,
                _ => GanLearner::Ftnpl(cfg.ftnpl.clone()),
            };
            let out = run_toygan(&cfg.toygan, &l, &mut rng)?;
            let mut summary = RunSummary {
                steps: out.rows.len() as u64,
                ..Default::default()
            };
            summary.extra.insert("sample_mean".into(), out.sample_mean);
            summary.extra.insert("sample_std".into(), out.sample_std);
            if !out.rows.is_empty() {
                summary.extra.insert("step_norm_rolling_std".into(), out.final_rolling_std(50));
            }
            Ok(RunOutput {
                summary,
                csv: csv_bytes(|b| out.write_csv(b))?,
                extra: Vec::new(),
            })
        }
        Experiment::Circleworld => {
            let out = run_circleworld(&cfg.circleworld, steps, &mut rng)?;
            let mut summary = RunSummary {
                steps: out.stats.len() as u64,
                ..Default::default()
            };
            summary.extra.insert("score_gap_slope".into(), crate::analytics::trend_slope(&out.score_gaps()));
            summary.extra.insert("learned_radius".into(), out.learned_radius());
            summary.extra.insert("expert_radius".into(), cfg.circleworld.mode.radius);
            Ok(RunOutput {
                summary,
                csv: csv_bytes(|b| out.write_csv(b))?,
                extra: vec![
                    ("expert", csv_bytes(|b| write_trajectories_csv(&out.expert, b))?),
                    ("learned", csv_bytes(|b| write_trajectories_csv(&out.learned, b))?),
                ],
            })
        }
    }
}

/// Runs one seed and writes its artifacts under `cfg.out`.
pub fn run_single(cfg: &ExperimentConfig, seed: u64) -> Result<RunArtifacts> {
    let experiment = cfg.experiment()?;
    let learner = cfg.learner()?;
    let echo = ExperimentConfig {
        seed,
        seeds: Vec::new(),
        ..cfg.clone()
    };
    let output = execute(&echo, seed)?;
    fs::create_dir_all(&cfg.out)?;
    let stem = format!("{}_{}_seed{}", experiment.name(), learner.name(), seed);
    let trajectory_csv = cfg.out.join(format!("{stem}.csv"));
    let summary_json = cfg.out.join(format!("{stem}_summary.json"));
    write_atomic(&trajectory_csv, &output.csv)?;
    let mut extra_csv = Vec::new();
    for (tag, bytes) in &output.extra {
        let path = cfg.out.join(format!("{stem}_{tag}.csv"));
        write_atomic(&path, bytes)?;
        extra_csv.push(path);
    }
    let report = RunReport {
        experiment,
        learner,
        seed,
        summary: output.summary,
        config: echo.clone(),
    };
    write_atomic(&summary_json, &serde_json::to_vec_pretty(&report)?)?;
    Ok(RunArtifacts {
        trajectory_csv,
        summary_json,
        extra_csv,
        config: echo,
    })
}

/// Runs every seed of a resolved configuration, concurrently.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunArtifacts>> {
    let seeds = cfg.run_seeds();
    std::thread::scope(|s| {
        let handles: Vec<_> = seeds.iter().map(|&seed| s.spawn(move || run_single(cfg, seed))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::precondition("a run panicked"))))
            .collect()
    })
}
