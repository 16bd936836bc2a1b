//! Seeded Monte Carlo sweeps over schemes and network parameters.
//!
//! Every trial derives its randomness from `(master_seed, trial)` alone, so a
//! trial index names the same caches, demands, placement and channel at every
//! sweep point and for every scheme, and results do not depend on how trials
//! are spread over worker threads.

mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use output::{emit_results, read_trials};

use crate::channel::{draw_channel_with, place_nodes, ChannelOptions, Placement};
use crate::clique::{SolverPolicy, SolverTag, DEFAULT_EXACT_LIMIT};
use crate::error::{Error, Result};
pub use crate::model::CachingLevel;
use crate::model::{generate_instance, Scenario};
use crate::power::IfeConfig;
use crate::scheduler::{solve, SchemeKind, SolverConfig};

/// The swept parameter and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    NumUsers(Vec<usize>),
    /// Bits/s.
    FronthaulCapacity(Vec<f64>),
    CachingLevel(Vec<CachingLevel>),
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::NumUsers(v) => v.len(),
            Sweep::FronthaulCapacity(v) => v.len(),
            Sweep::CachingLevel(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `index` as a printable value and the scenario / caching level it
    /// induces.
    fn point(&self, index: usize, base: &Scenario) -> (String, Scenario, Option<CachingLevel>) {
        let mut scenario = base.clone();
        match self {
            Sweep::NumUsers(v) => {
                scenario.num_users = v[index];
                (v[index].to_string(), scenario, None)
            }
            Sweep::FronthaulCapacity(v) => {
                scenario.fronthaul_capacity = v[index];
                (format!("{}", v[index]), scenario, None)
            }
            Sweep::CachingLevel(v) => (v[index].label().to_string(), scenario, Some(v[index])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Auto,
    Exact,
    Greedy,
}

/// Explicit coordinates; either list may be omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementOverride {
    pub transmitters: Option<Vec<[f64; 3]>>,
    pub users: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig4,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fig2a" => Ok(Preset::Fig2a),
            "fig2b" => Ok(Preset::Fig2b),
            "fig4" => Ok(Preset::Fig4),
            other => Err(format!("unknown preset `{other}` (expected fig2a, fig2b or fig4)")),
        }
    }
}

/// Flat experiment description: scenario keys sit at the top level next to
/// the experiment keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub sweep: Sweep,
    /// Secondary series; with more than one level the scheme column reads
    /// `<scheme>+<level>`.
    pub caching_levels: Vec<CachingLevel>,
    pub schemes: Vec<SchemeKind>,
    pub trials: usize,
    pub master_seed: u64,
    pub solver: SolverChoice,
    pub exact_limit: usize,
    pub epsilon: f64,
    pub k_max: usize,
    pub outer_max: usize,
    pub outer_tol: f64,
    pub shadowing_std_db: f64,
    pub rayleigh: bool,
    pub placement: Option<PlacementOverride>,
    pub output: PathBuf,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Write measured wall times to `trials.csv` (otherwise 0, which keeps
    /// the file byte-reproducible).
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let ife = IfeConfig::default();
        let solver = SolverConfig::default();
        let channel = ChannelOptions::default();
        Self {
            scenario: Scenario::default(),
            sweep: Sweep::NumUsers(vec![15]),
            caching_levels: vec![CachingLevel::ThreeLevel],
            schemes: SchemeKind::ALL.to_vec(),
            trials: 100,
            master_seed: 1,
            solver: SolverChoice::Auto,
            exact_limit: DEFAULT_EXACT_LIMIT,
            epsilon: ife.epsilon,
            k_max: ife.k_max,
            outer_max: solver.outer_max,
            outer_tol: solver.outer_tol,
            shadowing_std_db: channel.shadowing_std_db,
            rayleigh: channel.rayleigh,
            placement: None,
            output: PathBuf::from("results"),
            workers: 0,
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let base = Self::default();
        let users = vec![10, 20, 30, 40, 50];
        match preset {
            Preset::Fig2a => Self {
                scenario: Scenario {
                    num_sbs: 5,
                    num_uav: 3,
                    num_d2d: 5,
                    num_files: 30,
                    fronthaul_capacity: 10e6,
                    ..base.scenario.clone()
                },
                sweep: Sweep::NumUsers(users),
                output: PathBuf::from("results/fig2a"),
                ..base
            },
            Preset::Fig2b => Self {
                scenario: Scenario {
                    num_sbs: 5,
                    num_uav: 2,
                    num_d2d: 3,
                    num_users: 30,
                    num_files: 30,
                    ..base.scenario.clone()
                },
                sweep: Sweep::FronthaulCapacity(vec![1e6, 10e6, 75e6]),
                output: PathBuf::from("results/fig2b"),
                ..base
            },
            Preset::Fig4 => Self {
                scenario: Scenario {
                    num_sbs: 3,
                    num_uav: 2,
                    num_d2d: 3,
                    num_files: 40,
                    fronthaul_capacity: 10e6,
                    ..base.scenario.clone()
                },
                sweep: Sweep::NumUsers(users),
                caching_levels: vec![CachingLevel::ThreeLevel, CachingLevel::TwoLevel, CachingLevel::NoCaching],
                schemes: vec![SchemeKind::Proposed],
                output: PathBuf::from("results/fig4"),
                ..base
            },
        }
    }

    /// Parse a JSON document, overlaying it on `base`. Unknown keys are
    /// rejected.
    pub fn from_json_over(base: &ExperimentConfig, text: &str) -> Result<Self> {
        let overlay: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("not valid JSON: {e}")))?;
        let serde_json::Value::Object(overlay) = overlay else {
            return Err(Error::Config("top level must be an object".into()));
        };
        let mut merged = match serde_json::to_value(base).expect("config serializes") {
            serde_json::Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        for (k, v) in overlay {
            if !merged.contains_key(&k) && k != "placement" {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
            merged.insert(k, v);
        }
        let config: Self = serde_json::from_value(serde_json::Value::Object(merged))
            .map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(Error::Config("sweep list is empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("scheme list is empty".into()));
        }
        if self.caching_levels.is_empty() {
            return Err(Error::Config("caching_levels is empty".into()));
        }
        if !(self.epsilon > 0.0) || self.k_max == 0 || self.outer_max == 0 {
            return Err(Error::Config("epsilon, k_max and outer_max must be positive".into()));
        }
        if let Sweep::FronthaulCapacity(v) = &self.sweep {
            if v.iter().any(|c| !(*c >= 0.0)) {
                return Err(Error::Config("fronthaul capacities must be non-negative".into()));
            }
        }
        for k in 0..self.sweep.len() {
            self.sweep.point(k, &self.scenario).1.validate()?;
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        let policy = match self.solver {
            SolverChoice::Auto => SolverPolicy::Auto { limit: self.exact_limit },
            SolverChoice::Exact => SolverPolicy::Exact { limit: self.exact_limit },
            SolverChoice::Greedy => SolverPolicy::Greedy,
        };
        SolverConfig {
            policy,
            ife: IfeConfig {
                epsilon: self.epsilon,
                k_max: self.k_max,
            },
            outer_tol: self.outer_tol,
            outer_max: self.outer_max,
        }
    }

    pub fn channel_options(&self) -> ChannelOptions {
        ChannelOptions {
            shadowing_std_db: self.shadowing_std_db,
            rayleigh: self.rayleigh,
        }
    }

    fn scheme_label(&self, scheme: SchemeKind, level: CachingLevel) -> String {
        if self.caching_levels.len() > 1 {
            format!("{}+{}", scheme.as_str(), level.label())
        } else {
            scheme.as_str().to_string()
        }
    }

    fn placement_for(&self, scenario: &Scenario, seed: u64) -> Result<Placement> {
        let mut placement = place_nodes(scenario, seed);
        if let Some(fixed) = &self.placement {
            if let Some(t) = &fixed.transmitters {
                placement.transmitters = t.clone();
            }
            if let Some(u) = &fixed.users {
                placement.users = u.clone();
            }
        }
        placement.check(scenario)?;
        Ok(placement)
    }
}

/// Independent 64-bit seed for one trial.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut z = master ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub sweep_index: usize,
    pub sweep_value: String,
    pub scheme: String,
    pub throughput_bps: f64,
    pub iterations: usize,
    pub solver: SolverTag,
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub sweep_index: usize,
    pub sweep_value: String,
    pub scheme: String,
    pub trials: usize,
    pub mean_throughput_bps: f64,
    pub stderr_throughput_bps: f64,
    pub mean_iterations: f64,
    pub mean_wall_s: f64,
    pub greedy_share: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentOutcome {
    pub fn cell(&self, sweep_value: &str, scheme: &str) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.sweep_value == sweep_value && a.scheme == scheme)
    }

    /// Throughputs of one cell, ordered by trial.
    pub fn throughputs(&self, sweep_value: &str, scheme: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.sweep_value == sweep_value && r.scheme == scheme)
            .map(|r| r.throughput_bps)
            .collect()
    }
}

/// Mean and standard error per (sweep point, scheme), in record order.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut order: Vec<(usize, String)> = Vec::new();
    let mut cells: BTreeMap<(usize, String), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.sweep_index, r.scheme.clone());
        let entry = cells.entry(key.clone()).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rows = &cells[&key];
            let n = rows.len() as f64;
            let mean = rows.iter().map(|r| r.throughput_bps).sum::<f64>() / n;
            let stderr = if rows.len() > 1 {
                let var = rows.iter().map(|r| (r.throughput_bps - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            Aggregate {
                sweep_index: key.0,
                sweep_value: rows[0].sweep_value.clone(),
                scheme: key.1.clone(),
                trials: rows.len(),
                mean_throughput_bps: mean,
                stderr_throughput_bps: stderr,
                mean_iterations: rows.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
                mean_wall_s: rows.iter().map(|r| r.wall_s).sum::<f64>() / n,
                greedy_share: rows.iter().filter(|r| r.solver == SolverTag::Greedy).count() as f64 / n,
            }
        })
        .collect()
}

fn run_trial(config: &ExperimentConfig, sweep_index: usize, trial: usize) -> Result<Vec<TrialRecord>> {
    let (sweep_value, scenario, level_override) = config.sweep.point(sweep_index, &config.scenario);
    let seed = trial_seed(config.master_seed, trial);
    let scenario = Scenario {
        rng_seed: seed,
        ..scenario
    };
    let instance = generate_instance(&scenario)?;
    let placement = config.placement_for(&scenario, seed)?;
    let channel = draw_channel_with::<f64>(&scenario, &placement, seed, config.channel_options())?;
    let solver = config.solver_config();
    let levels = match level_override {
        Some(level) => vec![level],
        None => config.caching_levels.clone(),
    };
    let mut out = Vec::with_capacity(levels.len() * config.schemes.len());
    for level in levels {
        let inst = instance.with_caching_level(level);
        for &scheme in &config.schemes {
            let start = Instant::now();
            let result = solve(scheme, &inst, &channel, &solver)?;
            out.push(TrialRecord {
                trial,
                sweep_index,
                sweep_value: sweep_value.clone(),
                scheme: if level_override.is_some() {
                    scheme.as_str().to_string()
                } else {
                    config.scheme_label(scheme, level)
                },
                throughput_bps: result.throughput,
                iterations: result.iterations,
                solver: result.solver,
                wall_s: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(out)
}

/// Run every (sweep point, trial, caching level, scheme) combination. All
/// schemes of one (sweep point, trial) see the same realization.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..config.sweep.len())
        .flat_map(|p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    let run = || -> Result<Vec<TrialRecord>> {
        let chunks: Vec<Result<Vec<TrialRecord>>> =
            jobs.par_iter().map(|&(p, t)| run_trial(config, p, t)).collect();
        let mut records = Vec::new();
        for chunk in chunks {
            records.extend(chunk?);
        }
        Ok(records)
    };
    let records = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?
    } else {
        run()?
    };
    let aggregates = aggregate(&records);
    Ok(ExperimentOutcome { records, aggregates })
}
