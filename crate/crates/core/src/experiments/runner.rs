use serde::{Deserialize, Serialize};

use super::generator::{generate_scenario, GeneratorSpec};
use super::table::{linear_fit, mean, Cell, Column, ColumnType, Table};
use crate::benchmark::{self, OptimumMethod};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::mechanism::{self, MechanismConfig, MechanismTrace, MESSAGE_CONVENTION};
use crate::model::Scenario;

/// Messages per user for the centralized scheme: each user reports its
/// transmit power, channel gain, background power, input size, workload,
/// local frequency and preference weights.
pub const CENTRALIZED_MESSAGES_PER_USER: u64 = 7;

pub const CENTRALIZED_CONVENTION: &str =
    "centralized: 7 parameter-report messages per user (P, H, omega, B, D, F_local, weights)";

/// Settings shared by all experiments. The mechanism seed is replaced by the
/// per-trial seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSettings {
    pub generator: GeneratorSpec,
    pub mechanism: MechanismConfig,
    pub trials: usize,
    /// Optimum is exhaustive up to this many users, branch-and-bound above.
    pub exhaustive_cap: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            generator: GeneratorSpec::default(),
            mechanism: MechanismConfig::default(),
            trials: 30,
            exhaustive_cap: benchmark::DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

impl ExperimentSettings {
    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.mechanism.validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotSource {
    Trials,
    Aggregates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub source: PlotSource,
    pub x: String,
    pub ys: Vec<String>,
    pub x_label: String,
    pub y_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub id: String,
    pub seed: u64,
    pub trials: Table,
    pub aggregates: Table,
    pub notes: Vec<String>,
    pub plot: Option<PlotSpec>,
}

fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

/// Runs the mechanism and insists on a converged, verified equilibrium.
fn verified_run(s: &Scenario, template: &MechanismConfig, seed: u64) -> Result<MechanismTrace> {
    let cfg = MechanismConfig { seed, ..*template };
    let trace = mechanism::run_mechanism(s, &cfg)?;
    if !trace.converged {
        return Err(Error::MechanismFailed {
            seed,
            reason: format!("no convergence within {} slots", cfg.max_slots),
        });
    }
    if !Game::new(s).is_nash(trace.final_profile.bits()) {
        return Err(Error::MechanismFailed {
            seed,
            reason: format!("final profile {} is not a Nash equilibrium", trace.final_profile),
        });
    }
    Ok(trace)
}

fn col(name: &str, kind: ColumnType, unit: &str, description: &str) -> Column {
    Column::new(name, kind, unit, description)
}

/// Per-slot user costs and potential of a single run.
pub fn experiment_convergence(settings: &ExperimentSettings, seed: u64) -> Result<ExperimentResult> {
    settings.validate()?;
    let spec = GeneratorSpec {
        seed,
        ..settings.generator.clone()
    };
    let s = generate_scenario(&spec)?;
    let trace = verified_run(&s, &settings.mechanism, seed)?;
    let n = s.len();

    let mut columns = vec![
        col(
            "t",
            ColumnType::Int,
            "slot",
            "decision slot; 0 is the initial all-offload state",
        ),
        col(
            "winner",
            ColumnType::Text,
            "user id",
            "user that updated in this slot (empty if none)",
        ),
        col("profile", ColumnType::Text, "bits", "decision profile after the slot"),
        col("potential", ColumnType::Float, "W^2", "potential function value"),
        col("system_cost", ColumnType::Float, "overhead", "sum of user overheads"),
    ];
    for u in 0..n {
        columns.push(col(
            &format!("v_{u}"),
            ColumnType::Float,
            "overhead",
            &format!("overhead of user {u}"),
        ));
    }
    let mut trials = Table::new(columns);
    let mut row: Vec<Cell> = vec![
        0u64.into(),
        "".into(),
        trace.initial_profile.to_string().into(),
        trace.initial_potential.into(),
        trace.initial_system_cost.into(),
    ];
    row.extend(trace.initial_overheads.iter().map(|&v| Cell::Float(v)));
    trials.push(row);
    for r in &trace.slots {
        let mut row: Vec<Cell> = vec![
            (r.t + 1).into(),
            r.winner.map(|w| w.to_string()).unwrap_or_default().into(),
            r.profile.to_string().into(),
            r.potential.into(),
            r.system_cost.into(),
        ];
        row.extend(r.overheads.iter().map(|&v| Cell::Float(v)));
        trials.push(row);
    }

    let mut aggregates = Table::new(vec![
        col("seed", ColumnType::Int, "", "scenario and contention seed"),
        col("n", ColumnType::Int, "users", "number of users"),
        col("updates", ColumnType::Int, "count", "decision updates"),
        col("slots", ColumnType::Int, "count", "simulated slots"),
        col(
            "initial_cost",
            ColumnType::Float,
            "overhead",
            "system cost at the all-offload start",
        ),
        col(
            "final_cost",
            ColumnType::Float,
            "overhead",
            "system cost at the equilibrium",
        ),
        col(
            "final_potential",
            ColumnType::Float,
            "W^2",
            "potential at the equilibrium",
        ),
        col(
            "min_potential",
            ColumnType::Float,
            "W^2",
            "minimum potential along the run",
        ),
        col("messages", ColumnType::Int, "count", "decentralized messages"),
    ]);
    let min_potential = trials.numeric("potential").into_iter().fold(f64::INFINITY, f64::min);
    aggregates.push(vec![
        seed.into(),
        n.into(),
        trace.updates.into(),
        (trace.slots.len() as u64).into(),
        trace.initial_system_cost.into(),
        trace.final_system_cost().into(),
        trace.final_potential().into(),
        min_potential.into(),
        trace.messages.total.into(),
    ]);

    Ok(ExperimentResult {
        id: "convergence".into(),
        seed,
        trials,
        aggregates,
        notes: vec![MESSAGE_CONVENTION.into()],
        plot: Some(PlotSpec {
            title: "Potential and system cost per decision slot".into(),
            source: PlotSource::Trials,
            x: "t".into(),
            ys: vec!["system_cost".into()],
            x_label: "decision slot".into(),
            y_label: "system-wide overhead".into(),
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Cycles,
    InputBits,
}

impl SweepParameter {
    fn id(self) -> &'static str {
        match self {
            SweepParameter::Cycles => "sweep-d",
            SweepParameter::InputBits => "sweep-b",
        }
    }

    fn column(self) -> Column {
        match self {
            SweepParameter::Cycles => col("cycles", ColumnType::Float, "cycles", "task workload D"),
            SweepParameter::InputBits => col("input_bits", ColumnType::Float, "bits", "offloaded data size B"),
        }
    }

    fn apply(self, spec: &mut GeneratorSpec, value: f64) {
        match self {
            SweepParameter::Cycles => spec.cycles = value,
            SweepParameter::InputBits => spec.input_bits = value,
        }
    }
}

pub fn experiment_sweep_d(settings: &ExperimentSettings, grid: &[f64], seed: u64) -> Result<ExperimentResult> {
    sweep(settings, SweepParameter::Cycles, grid, seed)
}

pub fn experiment_sweep_b(settings: &ExperimentSettings, grid: &[f64], seed: u64) -> Result<ExperimentResult> {
    sweep(settings, SweepParameter::InputBits, grid, seed)
}

fn sweep(settings: &ExperimentSettings, param: SweepParameter, grid: &[f64], seed: u64) -> Result<ExperimentResult> {
    settings.validate()?;
    if grid.is_empty() {
        return Err(Error::invalid("grid", "at least one sweep point is required"));
    }
    let mut trials = Table::new(vec![
        col("seed", ColumnType::Int, "", "trial seed"),
        col("n", ColumnType::Int, "users", "number of users"),
        param.column(),
        col(
            "mechanism_cost",
            ColumnType::Float,
            "overhead",
            "system cost at the mechanism's equilibrium",
        ),
        col(
            "all_local_cost",
            ColumnType::Float,
            "overhead",
            "system cost when every user computes locally",
        ),
        col(
            "all_cloud_cost",
            ColumnType::Float,
            "overhead",
            "system cost when every user offloads",
        ),
        col(
            "offloaders",
            ColumnType::Int,
            "users",
            "users offloading at the equilibrium",
        ),
        col("updates", ColumnType::Int, "count", "decision updates"),
    ]);
    let mut aggregates = Table::new(vec![
        param.column(),
        col("trials", ColumnType::Int, "count", "trials at this point"),
        col(
            "mean_mechanism_cost",
            ColumnType::Float,
            "overhead",
            "mean mechanism system cost",
        ),
        col(
            "min_mechanism_cost",
            ColumnType::Float,
            "overhead",
            "minimum mechanism system cost",
        ),
        col(
            "max_mechanism_cost",
            ColumnType::Float,
            "overhead",
            "maximum mechanism system cost",
        ),
        col(
            "mean_all_local_cost",
            ColumnType::Float,
            "overhead",
            "mean all-local system cost",
        ),
        col(
            "mean_all_cloud_cost",
            ColumnType::Float,
            "overhead",
            "mean all-cloud system cost",
        ),
        col(
            "mean_offloaders",
            ColumnType::Float,
            "users",
            "mean number of offloaders",
        ),
        col("mean_updates", ColumnType::Float, "count", "mean decision updates"),
    ]);

    for &value in grid {
        let mut mech = Vec::with_capacity(settings.trials);
        let mut local = Vec::with_capacity(settings.trials);
        let mut cloud = Vec::with_capacity(settings.trials);
        let mut offloaders = Vec::with_capacity(settings.trials);
        let mut updates = Vec::with_capacity(settings.trials);
        for trial in 0..settings.trials {
            let ts = trial_seed(seed, trial);
            let mut spec = GeneratorSpec {
                seed: ts,
                ..settings.generator.clone()
            };
            param.apply(&mut spec, value);
            let s = generate_scenario(&spec)?;
            let trace = verified_run(&s, &settings.mechanism, ts)?;
            let base = benchmark::baselines(&s);
            let cost = trace.final_system_cost();
            let off = trace.final_profile.offloader_count();
            trials.push(vec![
                ts.into(),
                s.len().into(),
                value.into(),
                cost.into(),
                base.all_local.into(),
                base.all_cloud.into(),
                off.into(),
                trace.updates.into(),
            ]);
            mech.push(cost);
            local.push(base.all_local);
            cloud.push(base.all_cloud);
            offloaders.push(off as f64);
            updates.push(trace.updates as f64);
        }
        aggregates.push(vec![
            value.into(),
            settings.trials.into(),
            mean(&mech).into(),
            mech.iter().copied().fold(f64::INFINITY, f64::min).into(),
            mech.iter().copied().fold(f64::NEG_INFINITY, f64::max).into(),
            mean(&local).into(),
            mean(&cloud).into(),
            mean(&offloaders).into(),
            mean(&updates).into(),
        ]);
    }

    let (title, x_label) = match param {
        SweepParameter::Cycles => ("System cost versus task workload", "CPU cycles per task"),
        SweepParameter::InputBits => ("System cost versus offloaded data size", "input size (bits)"),
    };
    let x = param.column().name;
    Ok(ExperimentResult {
        id: param.id().into(),
        seed,
        trials,
        aggregates,
        notes: vec![format!(
            "trial seed = base seed + trial index; same placements at every {x} value"
        )],
        plot: Some(PlotSpec {
            title: title.into(),
            source: PlotSource::Aggregates,
            x,
            ys: vec![
                "mean_mechanism_cost".into(),
                "mean_all_local_cost".into(),
                "mean_all_cloud_cost".into(),
            ],
            x_label: x_label.into(),
            y_label: "mean system-wide overhead".into(),
        }),
    })
}

/// System cost against the optimum and baselines, update counts and message
/// totals as the number of users grows.
pub fn experiment_scaling(settings: &ExperimentSettings, n_grid: &[usize], seed: u64) -> Result<ExperimentResult> {
    settings.validate()?;
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::invalid("grid", "user counts must be >= 1"));
    }
    let mut trials = Table::new(vec![
        col("seed", ColumnType::Int, "", "trial seed"),
        col("n", ColumnType::Int, "users", "number of users"),
        col(
            "mechanism_cost",
            ColumnType::Float,
            "overhead",
            "system cost at the mechanism's equilibrium",
        ),
        col(
            "optimum_cost",
            ColumnType::Float,
            "overhead",
            "centralized minimum system cost",
        ),
        col("optimum_method", ColumnType::Text, "", "exhaustive or branch-and-bound"),
        col(
            "all_local_cost",
            ColumnType::Float,
            "overhead",
            "system cost when every user computes locally",
        ),
        col(
            "all_cloud_cost",
            ColumnType::Float,
            "overhead",
            "system cost when every user offloads",
        ),
        col("updates", ColumnType::Int, "count", "decision updates"),
        col(
            "decentralized_messages",
            ColumnType::Int,
            "count",
            "messages under the decentralized convention",
        ),
        col(
            "centralized_messages",
            ColumnType::Int,
            "count",
            "messages under the centralized convention",
        ),
    ]);
    let mut aggregates = Table::new(vec![
        col("n", ColumnType::Int, "users", "number of users"),
        col("trials", ColumnType::Int, "count", "trials at this point"),
        col(
            "mean_mechanism_cost",
            ColumnType::Float,
            "overhead",
            "mean mechanism system cost",
        ),
        col(
            "mean_optimum_cost",
            ColumnType::Float,
            "overhead",
            "mean optimal system cost",
        ),
        col(
            "cost_ratio",
            ColumnType::Float,
            "",
            "mean mechanism cost / mean optimum cost",
        ),
        col(
            "mean_all_local_cost",
            ColumnType::Float,
            "overhead",
            "mean all-local system cost",
        ),
        col(
            "mean_all_cloud_cost",
            ColumnType::Float,
            "overhead",
            "mean all-cloud system cost",
        ),
        col(
            "min_mechanism_cost",
            ColumnType::Float,
            "overhead",
            "minimum mechanism system cost",
        ),
        col(
            "max_mechanism_cost",
            ColumnType::Float,
            "overhead",
            "maximum mechanism system cost",
        ),
        col("mean_updates", ColumnType::Float, "count", "mean decision updates"),
        col(
            "mean_decentralized_messages",
            ColumnType::Float,
            "count",
            "mean decentralized messages",
        ),
        col(
            "mean_centralized_messages",
            ColumnType::Float,
            "count",
            "mean centralized messages",
        ),
    ]);

    for &n in n_grid {
        let mut mech = Vec::new();
        let mut opt = Vec::new();
        let mut local = Vec::new();
        let mut cloud = Vec::new();
        let mut updates = Vec::new();
        let mut dec = Vec::new();
        let mut cen = Vec::new();
        for trial in 0..settings.trials {
            let ts = trial_seed(seed, trial);
            let spec = GeneratorSpec {
                seed: ts,
                users: n,
                ..settings.generator.clone()
            };
            let s = generate_scenario(&spec)?;
            let trace = verified_run(&s, &settings.mechanism, ts)?;
            let optimum = benchmark::centralized_optimum_with_cap(&s, settings.exhaustive_cap)?;
            let base = benchmark::baselines(&s);
            let cost = trace.final_system_cost();
            let centralized = CENTRALIZED_MESSAGES_PER_USER * n as u64;
            let method = match optimum.method {
                OptimumMethod::Exhaustive => "exhaustive",
                OptimumMethod::BranchAndBound => "branch-and-bound",
            };
            trials.push(vec![
                ts.into(),
                n.into(),
                cost.into(),
                optimum.cost.into(),
                method.into(),
                base.all_local.into(),
                base.all_cloud.into(),
                trace.updates.into(),
                trace.messages.total.into(),
                centralized.into(),
            ]);
            mech.push(cost);
            opt.push(optimum.cost);
            local.push(base.all_local);
            cloud.push(base.all_cloud);
            updates.push(trace.updates as f64);
            dec.push(trace.messages.total as f64);
            cen.push(centralized as f64);
        }
        aggregates.push(vec![
            n.into(),
            settings.trials.into(),
            mean(&mech).into(),
            mean(&opt).into(),
            (mean(&mech) / mean(&opt)).into(),
            mean(&local).into(),
            mean(&cloud).into(),
            mech.iter().copied().fold(f64::INFINITY, f64::min).into(),
            mech.iter().copied().fold(f64::NEG_INFINITY, f64::max).into(),
            mean(&updates).into(),
            mean(&dec).into(),
            mean(&cen).into(),
        ]);
    }

    let mut notes = vec![MESSAGE_CONVENTION.to_string(), CENTRALIZED_CONVENTION.to_string()];
    let xs = aggregates.numeric("n");
    if let Some(fit) = linear_fit(&xs, &aggregates.numeric("mean_updates")) {
        notes.push(format!(
            "mean updates vs n: slope {}, intercept {}, r^2 {}",
            fit.slope, fit.intercept, fit.r_squared
        ));
    }
    Ok(ExperimentResult {
        id: "scaling".into(),
        seed,
        trials,
        aggregates,
        notes,
        plot: Some(PlotSpec {
            title: "Mean system cost versus number of users".into(),
            source: PlotSource::Aggregates,
            x: "n".into(),
            ys: vec![
                "mean_mechanism_cost".into(),
                "mean_optimum_cost".into(),
                "mean_all_local_cost".into(),
                "mean_all_cloud_cost".into(),
            ],
            x_label: "number of users".into(),
            y_label: "mean system-wide overhead".into(),
        }),
    })
}
