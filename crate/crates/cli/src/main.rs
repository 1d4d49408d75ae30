//! `offload` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use offload_core::benchmark;
use offload_core::experiments::{
    emit, experiment_convergence, experiment_scaling, experiment_sweep_b, experiment_sweep_d, generate_scenario,
    ExperimentResult, ExperimentSettings, GeneratorSpec, OutputFormat,
};
use offload_core::game::{self, Game};
use offload_core::homogeneous::{self, HomogeneousView};
use offload_core::mechanism::{self, ContentionMode, MechanismConfig};
use offload_core::{model, DecisionProfile, Scenario};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "offload", version, about = "Multi-user computation offloading game toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random scenario and print it as JSON.
    Gen(GenArgs),
    /// Run the decentralized update mechanism.
    Run(RunArgs),
    /// Check whether a decision profile is a Nash equilibrium.
    NashCheck(NashArgs),
    /// Equilibrium of a homogeneous scenario, or the beneficial group for raw ratios.
    Homogeneous(HomogeneousArgs),
    /// Centralized minimum-cost profile.
    Optimum(OptimumArgs),
    /// Price of anarchy, its upper bound and the equilibrium set.
    Poa(ScenarioArgs),
    /// Run an experiment and write its CSV/SVG outputs.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
    /// Write the files for a saved experiment result.
    Emit(EmitArgs),
}

/// Every generator field; unset flags keep the config or default value.
#[derive(Args, Default)]
struct GeneratorFlags {
    /// Number of users.
    #[arg(long)]
    users: Option<usize>,
    /// Side of the square region (m).
    #[arg(long)]
    region_side: Option<f64>,
    #[arg(long)]
    path_loss_exponent: Option<f64>,
    /// Channel bandwidth (Hz).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Transmit power (W).
    #[arg(long)]
    transmit_power: Option<f64>,
    /// Background noise (W).
    #[arg(long)]
    noise_power: Option<f64>,
    /// Offloaded data size (bits).
    #[arg(long)]
    input_bits: Option<f64>,
    /// Task workload (cycles).
    #[arg(long)]
    cycles: Option<f64>,
    /// Comma-separated local CPU frequencies (Hz).
    #[arg(long, value_delimiter = ',')]
    local_freqs: Option<Vec<f64>>,
    /// Cloud CPU frequency per user (Hz).
    #[arg(long)]
    cloud_freq: Option<f64>,
    #[arg(long)]
    weight_time: Option<f64>,
    #[arg(long)]
    weight_energy: Option<f64>,
    /// Energy per cycle (J); default is 1e-11 * (F in GHz)^2.
    #[arg(long)]
    energy_per_cycle: Option<f64>,
    /// Distance floor (m).
    #[arg(long)]
    min_distance: Option<f64>,
}

impl GeneratorFlags {
    fn apply(&self, spec: &mut GeneratorSpec) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    spec.$field = v.clone();
                }
            )*};
        }
        set!(
            users,
            region_side,
            path_loss_exponent,
            bandwidth,
            transmit_power,
            noise_power,
            input_bits,
            cycles,
            local_freqs,
            cloud_freq,
            weight_time,
            weight_energy,
            min_distance
        );
        if self.energy_per_cycle.is_some() {
            spec.energy_per_cycle = self.energy_per_cycle;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Contention {
    UniformBackoff,
    RandomWinner,
}

impl From<Contention> for ContentionMode {
    fn from(c: Contention) -> Self {
        match c {
            Contention::UniformBackoff => ContentionMode::UniformBackoff,
            Contention::RandomWinner => ContentionMode::RandomWinner,
        }
    }
}

#[derive(Args, Default)]
struct MechanismFlags {
    /// Consecutive quiet slots that end the run.
    #[arg(long)]
    quiet_slots: Option<u32>,
    #[arg(long, value_enum)]
    contention: Option<Contention>,
    #[arg(long)]
    max_slots: Option<u64>,
}

impl MechanismFlags {
    fn apply(&self, cfg: &mut MechanismConfig) {
        if let Some(m) = self.quiet_slots {
            cfg.quiet_slots = m;
        }
        if let Some(c) = self.contention {
            cfg.contention = c.into();
        }
        if let Some(m) = self.max_slots {
            cfg.max_slots = m;
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Generator config (JSON); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    generator: GeneratorFlags,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A scenario read from a file, or generated from a seed.
#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<PathBuf>,
    /// Generator config (JSON) when no scenario file is given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for scenario generation.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    generator: GeneratorFlags,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    mechanism: MechanismFlags,
    /// Per-slot trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct NashArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Decision profile as a 0/1 string, user 0 first.
    #[arg(long)]
    profile: String,
}

#[derive(Args)]
struct HomogeneousArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Raw threshold ratios L/K (comma-separated) instead of a scenario.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ratios: Option<Vec<f64>>,
}

#[derive(Args)]
struct OptimumArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Largest user count solved by exhaustive search.
    #[arg(long, default_value_t = benchmark::DEFAULT_EXHAUSTIVE_CAP)]
    cap: usize,
}

#[derive(Subcommand)]
enum ExperimentKind {
    /// Per-slot overheads and potential of one run.
    Convergence(ExperimentArgs),
    /// System cost across task workloads.
    SweepD(ExperimentArgs),
    /// System cost across offloaded data sizes.
    SweepB(ExperimentArgs),
    /// Cost, optimum, updates and messages across user counts.
    Scaling(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment settings (JSON); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated sweep grid (cycles, bits or user counts).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    exhaustive_cap: Option<usize>,
    #[command(flatten)]
    generator: GeneratorFlags,
    #[command(flatten)]
    mechanism: MechanismFlags,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Comma-separated output formats.
    #[arg(long, value_delimiter = ',', default_value = "csv,svg")]
    format: Vec<Format>,
    /// Also save the full result as JSON (input for `emit`).
    #[arg(long)]
    save_result: Option<PathBuf>,
}

#[derive(Args)]
struct EmitArgs {
    /// Result JSON written by `experiment --save-result`.
    #[arg(long)]
    result: PathBuf,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,svg")]
    format: Vec<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Svg => OutputFormat::Svg,
        }
    }
}

const SWEEP_D_GRID: [f64; 7] = [2e8, 5e8, 1e9, 2e9, 3e9, 4e9, 5e9];
const SWEEP_B_GRID: [f64; 7] = [5e5, 1e6, 2e6, 3.36e6, 5e6, 7.5e6, 1e7];
const SCALING_GRID: [usize; 8] = [2, 4, 6, 8, 10, 12, 14, 16];

enum CliError {
    Core(offload_core::Error),
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Usage(_) => "usage",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
        }
    }
}

impl<E: Into<offload_core::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

fn require_seed(seed: Option<u64>, command: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage(format!("`{command}` is randomized and requires --seed")))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Core(offload_core::Error::Config(format!(
            "cannot read {}: {e}",
            path.display()
        )))
    })
}

fn generator_spec(config: Option<&Path>, flags: &GeneratorFlags, seed: u64) -> CliResult<GeneratorSpec> {
    let mut spec = match config {
        Some(p) => serde_json::from_str(&read(p)?)?,
        None => GeneratorSpec::default(),
    };
    flags.apply(&mut spec);
    spec.seed = seed;
    spec.validate()?;
    Ok(spec)
}

impl ScenarioArgs {
    fn load(&self, command: &str) -> CliResult<Scenario> {
        match &self.scenario {
            Some(path) => Ok(Scenario::from_json(&read(path)?)?),
            None => {
                let seed = self.seed.ok_or_else(|| {
                    CliError::Usage(format!("`{command}` needs --scenario <file> or --seed to generate one"))
                })?;
                Ok(generate_scenario(&generator_spec(
                    self.config.as_deref(),
                    &self.generator,
                    seed,
                )?)?)
            }
        }
    }
}

fn write_stdout(text: &str) {
    // a closed pipe (e.g. `| head`) is not an error
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print(value: &Value) {
    write_stdout(&(serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n"));
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let seed = require_seed(args.seed, "gen")?;
    let spec = generator_spec(args.config.as_deref(), &args.generator, seed)?;
    let json = generate_scenario(&spec)?.to_json()? + "\n";
    match &args.out {
        Some(path) => fs::write(path, json)?,
        None => write_stdout(&json),
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let seed = require_seed(args.scenario.seed, "run")?;
    let s = args.scenario.load("run")?;
    let mut cfg = MechanismConfig::with_seed(seed);
    args.mechanism.apply(&mut cfg);
    let trace = mechanism::run_mechanism(&s, &cfg)?;
    if let Some(path) = &args.trace {
        trace.write_lines(fs::File::create(path)?)?;
    }
    print(&json!({
        "users": s.len(),
        "converged": trace.converged,
        "final_profile": trace.final_profile.to_string(),
        "is_nash": Game::new(&s).is_nash(trace.final_profile.bits()),
        "system_cost": trace.final_system_cost(),
        "potential": trace.final_potential(),
        "updates": trace.updates,
        "slots": trace.slots.len(),
        "messages": to_value(&trace.messages),
        "config": to_value(&trace.config),
    }));
    Ok(())
}

fn cmd_nash(args: &NashArgs) -> CliResult<()> {
    let s = args.scenario.load("nash-check")?;
    let a: DecisionProfile = args.profile.parse()?;
    let is_nash = game::is_nash(&s, &a)?;
    let g = Game::new(&s);
    let overheads: Vec<f64> = (0..s.len())
        .map(|n| model::user_overhead(&s, &a, n))
        .collect::<Result<_, _>>()?;
    let thresholds: Vec<Value> = g
        .thresholds()
        .iter()
        .map(|t| t.value().map_or(Value::from("NEVER_OFFLOAD"), Value::from))
        .collect();
    print(&json!({
        "profile": a.to_string(),
        "is_nash": is_nash,
        "improvers": g.improvers(a.bits()),
        "overheads": overheads,
        "thresholds": thresholds,
        "system_cost": model::system_cost(&s, &a)?,
    }));
    Ok(())
}

fn cmd_homogeneous(args: &HomogeneousArgs) -> CliResult<()> {
    if let Some(ratios) = &args.ratios {
        let view = HomogeneousView::from_ratios(1.0, ratios)?;
        let group = homogeneous::beneficial_group(&view)?;
        print(&json!({
            "order": view.order(),
            "members": group.members,
            "steps": group.steps,
        }));
        return Ok(());
    }
    let s = args.scenario.load("homogeneous")?;
    let view = homogeneous::homogeneous_view(&s)?;
    let a = homogeneous::homogeneous_equilibrium(&s)?;
    let members: Vec<usize> = (0..s.len()).filter(|&n| a.offloads(n)).collect();
    print(&json!({
        "k": view.k(),
        "order": view.order(),
        "ratios": view.ratios(),
        "members": members,
        "profile": a.to_string(),
        "system_cost": model::system_cost(&s, &a)?,
    }));
    Ok(())
}

fn cmd_optimum(args: &OptimumArgs) -> CliResult<()> {
    let s = args.scenario.load("optimum")?;
    let opt = benchmark::centralized_optimum_with_cap(&s, args.cap)?;
    let base = benchmark::baselines(&s);
    print(&json!({
        "profile": opt.profile.to_string(),
        "cost": opt.cost,
        "method": to_value(&opt.method),
        "all_local_cost": base.all_local,
        "all_cloud_cost": base.all_cloud,
    }));
    Ok(())
}

fn cmd_poa(args: &ScenarioArgs) -> CliResult<()> {
    let s = args.load("poa")?;
    let r = benchmark::equilibrium_report(&s)?;
    let equilibria: Vec<String> = r.equilibria.iter().map(|a| a.to_string()).collect();
    print(&json!({
        "poa": r.poa,
        "poa_bound": r.poa_bound,
        "equilibria": equilibria,
        "worst_ne": {"profile": r.worst_ne_profile.to_string(), "cost": r.worst_ne_cost},
        "best_ne": {"profile": r.best_ne_profile.to_string(), "cost": r.best_ne_cost},
        "optimum": {"profile": r.optimum.profile.to_string(), "cost": r.optimum.cost},
        "all_local_cost": r.baselines.all_local,
        "all_cloud_cost": r.baselines.all_cloud,
    }));
    Ok(())
}

fn experiment_settings(args: &ExperimentArgs) -> CliResult<ExperimentSettings> {
    let mut settings: ExperimentSettings = match &args.config {
        Some(p) => serde_json::from_str(&read(p)?)?,
        None => ExperimentSettings::default(),
    };
    args.generator.apply(&mut settings.generator);
    args.mechanism.apply(&mut settings.mechanism);
    if let Some(t) = args.trials {
        settings.trials = t;
    }
    if let Some(c) = args.exhaustive_cap {
        settings.exhaustive_cap = c;
    }
    settings.validate()?;
    Ok(settings)
}

fn user_grid(grid: &[f64]) -> CliResult<Vec<usize>> {
    grid.iter()
        .map(|&x| {
            if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as usize)
            } else {
                Err(CliError::Usage(format!(
                    "user counts must be positive integers, got {x}"
                )))
            }
        })
        .collect()
}

fn write_outputs(result: &ExperimentResult, dir: &Path, formats: &[Format]) -> CliResult<Vec<String>> {
    let formats: Vec<OutputFormat> = formats.iter().map(|&f| f.into()).collect();
    Ok(emit(result, dir, &formats)?
        .into_iter()
        .map(|p| p.display().to_string())
        .collect())
}

fn cmd_experiment(kind: &ExperimentKind) -> CliResult<()> {
    let (name, args) = match kind {
        ExperimentKind::Convergence(a) => ("convergence", a),
        ExperimentKind::SweepD(a) => ("sweep-d", a),
        ExperimentKind::SweepB(a) => ("sweep-b", a),
        ExperimentKind::Scaling(a) => ("scaling", a),
    };
    let seed = require_seed(args.seed, &format!("experiment {name}"))?;
    let settings = experiment_settings(args)?;
    let result = match kind {
        ExperimentKind::Convergence(_) => experiment_convergence(&settings, seed)?,
        ExperimentKind::SweepD(_) => {
            experiment_sweep_d(&settings, args.grid.as_deref().unwrap_or(&SWEEP_D_GRID), seed)?
        }
        ExperimentKind::SweepB(_) => {
            experiment_sweep_b(&settings, args.grid.as_deref().unwrap_or(&SWEEP_B_GRID), seed)?
        }
        ExperimentKind::Scaling(_) => {
            let grid = match &args.grid {
                Some(g) => user_grid(g)?,
                None => SCALING_GRID.to_vec(),
            };
            experiment_scaling(&settings, &grid, seed)?
        }
    };
    if let Some(path) = &args.save_result {
        fs::write(path, serde_json::to_string_pretty(&result)? + "\n")?;
    }
    let files = write_outputs(&result, &args.out_dir, &args.format)?;
    print(&json!({
        "experiment": result.id,
        "seed": seed,
        "files": files,
        "notes": result.notes,
    }));
    Ok(())
}

fn cmd_emit(args: &EmitArgs) -> CliResult<()> {
    let result: ExperimentResult = serde_json::from_str(&read(&args.result)?)?;
    let files = write_outputs(&result, &args.out_dir, &args.format)?;
    print(&json!({ "experiment": result.id, "seed": result.seed, "files": files }));
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::NashCheck(a) => cmd_nash(a),
        Command::Homogeneous(a) => cmd_homogeneous(a),
        Command::Optimum(a) => cmd_optimum(a),
        Command::Poa(a) => cmd_poa(a),
        Command::Experiment { kind } => cmd_experiment(kind),
        Command::Emit(a) => cmd_emit(a),
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim(), 2),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.message(), 1),
    }
}
