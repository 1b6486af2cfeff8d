use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roster_core::extensions::{optimize_with_patterns, plan_rolling_horizon, reoptimize_event};
use roster_core::hybrid::{optimize, HybridConfig, Mode, OptimizationResult, ProgressEvent};
use roster_core::model::{check_feasibility, generate_instance, roster_stats, GeneratorConfig, ObjectiveWeights};
use roster_core::{Roster, RosterInstance};

use crate::bench::{mode_name, render_table, run_bench, BenchConfig};
use crate::clock::StdClock;
use crate::formats::{
    read_changes, read_instance, read_json, read_pattern, read_roster_csv, roster_csv_string, roster_grid,
    stats_csv_string, to_json_pretty, trace_ndjson, write_atomic, write_json, FormatError,
};
use crate::service::{serve, ServiceConfig};

pub const EXIT_FAILURE: u8 = 1;
/// Malformed input files or arguments.
pub const EXIT_INPUT: u8 = 2;
/// The instance has no feasible roster.
pub const EXIT_INFEASIBLE: u8 = 3;
/// `check` found violations.
pub const EXIT_VIOLATIONS: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "roster", version, about = "Fair employee rostering with MILP and scatter search")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance
    Generate(GenerateArgs),
    /// Optimize a roster for an instance
    Solve(SolveArgs),
    /// Re-optimize an existing roster after change requests
    Reopt(ReoptArgs),
    /// Plan consecutive periods with adaptive workload targets
    Rolling(RollingArgs),
    /// Two-stage optimization against a company work pattern
    Patterns(PatternArgs),
    /// Time both modes on seeded instances
    Bench(BenchArgs),
    /// Render a roster as a grid, statistics or JSON
    Export(ExportArgs),
    /// Check a roster against every rule of its instance
    Check(CheckArgs),
    /// Run the HTTP service
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 12)]
    employees: usize,
    #[arg(long, default_value_t = 8)]
    weeks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generator settings as JSON; --employees and --weeks override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Small instance: switching and on-call only, sparse cover
    #[arg(long)]
    toy: bool,
    /// Output file (stdout if absent)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Hybrid,
    Milp,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Hybrid => Mode::Hybrid,
            ModeArg::Milp => Mode::MilpAlone,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Relative optimality gap to stop at
    #[arg(long, default_value_t = 0.05)]
    gap: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Hybrid)]
    mode: ModeArg,
    /// Total time limit in seconds
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    /// Time for the branch-and-bound phase in hybrid mode
    #[arg(long, default_value_t = 30.0)]
    phase1_time: f64,
    /// Fix integral LP variables before branch-and-bound
    #[arg(long)]
    relax_fix: bool,
    /// Skip the final bound-tightening search
    #[arg(long)]
    no_tighten: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Objective weights as JSON
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// Print progress events to stderr
    #[arg(long, short)]
    verbose: bool,
}

impl SolverArgs {
    fn config(&self) -> HybridConfig {
        HybridConfig {
            gap_target: self.gap,
            mode: self.mode.into(),
            total_time_limit: self.time_limit,
            phase1_time_budget: self.phase1_time.min(self.time_limit),
            use_relax_and_fix: self.relax_fix,
            tighten_bound: !self.no_tighten,
            seed: self.seed,
            ..HybridConfig::default()
        }
    }

    fn weights(&self) -> Result<ObjectiveWeights, CliError> {
        let mut w = match &self.weights {
            Some(p) => read_json(p)?,
            None => ObjectiveWeights::default(),
        };
        if let Some(g) = self.gamma {
            w.gamma = g;
        }
        if let Some(m) = self.mu {
            w.mu = m;
        }
        Ok(w)
    }

    fn sink(&self) -> impl FnMut(&ProgressEvent) + '_ {
        move |e| {
            if self.verbose {
                eprintln!(
                    "{:8.2}s {:?} incumbent {} bound {} gap {} {}",
                    e.elapsed_s,
                    e.phase,
                    fmt_opt(e.incumbent),
                    fmt_opt(e.bound),
                    fmt_opt(e.gap),
                    e.detail
                );
            }
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.4}"))
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, short)]
    instance: PathBuf,
    /// Output directory for roster.csv, stats.csv, trace.ndjson, result.json
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct ReoptArgs {
    #[arg(long, short)]
    instance: PathBuf,
    /// The roster in force, as CSV
    #[arg(long)]
    roster: PathBuf,
    /// Change requests as a JSON list
    #[arg(long)]
    changes: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct RollingArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long)]
    period_weeks: usize,
    /// Correct each period's targets by the deviation so far
    #[arg(long)]
    adaptive: bool,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct PatternArgs {
    #[arg(long, short)]
    instance: PathBuf,
    /// Pattern grid: one week per line, seven day labels
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Comma-separated: hybrid, milp
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::Hybrid, ModeArg::Milp])]
    modes: Vec<ModeArg>,
    #[arg(long, default_value_t = 6)]
    employees: usize,
    #[arg(long, default_value_t = 2)]
    weeks: usize,
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Time limit per run in seconds
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 20.0)]
    phase1_time: f64,
    /// Directory for table.md and report.json
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExportFormat {
    Grid,
    Stats,
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long)]
    roster: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Grid)]
    format: ExportFormat,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, short)]
    instance: PathBuf,
    #[arg(long)]
    roster: PathBuf,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, env = "ROSTER_DATA_DIR", default_value = "roster-data")]
    data_dir: PathBuf,
    #[arg(long, env = "ROSTER_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "ROSTER_WORKERS", default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] roster_core::Error),
    #[error("{0}")]
    Other(String),
    #[error("{0} violation(s)")]
    Violations(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Format(FormatError::Io { .. }) => EXIT_FAILURE,
            Self::Format(FormatError::Core(e)) | Self::Core(e) => core_exit_code(e),
            Self::Format(_) => EXIT_INPUT,
            Self::Violations(_) => EXIT_VIOLATIONS,
            Self::Other(_) => EXIT_FAILURE,
        }
    }
}

fn core_exit_code(e: &roster_core::Error) -> u8 {
    use roster_core::Error as E;
    match e {
        E::Infeasible | E::LockedPrefixConflict(_) => EXIT_INFEASIBLE,
        E::InvalidInstance(_)
        | E::InvalidConfig(_)
        | E::InvalidChange(_)
        | E::ConflictingChanges(_)
        | E::WeightOutOfRange { .. }
        | E::UnknownShiftLabel(_)
        | E::DimensionMismatch { .. } => EXIT_INPUT,
        _ => EXIT_FAILURE,
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes roster.csv, stats.csv, trace.ndjson and result.json into `dir`.
fn write_solution(dir: &Path, inst: &RosterInstance, res: &OptimizationResult) -> Result<(), CliError> {
    write_atomic(&dir.join("roster.csv"), roster_csv_string(inst, &res.roster).as_bytes())?;
    let stats = roster_stats(inst, &res.roster)?;
    write_atomic(&dir.join("stats.csv"), stats_csv_string(&stats).as_bytes())?;
    write_atomic(&dir.join("trace.ndjson"), trace_ndjson(&res.trace).as_bytes())?;
    write_json(&dir.join("result.json"), res)?;
    Ok(())
}

fn summary(res: &OptimizationResult) -> String {
    format!(
        "objective {:.4}  bound {:.4}  gap {:.2}%  status {:?}  {:.1}s",
        res.objective.total,
        res.lower_bound,
        res.gap * 100.0,
        res.status,
        res.timings.total
    )
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => {
            let mut cfg = match (&a.config, a.toy) {
                (Some(p), _) => read_json(p)?,
                (None, true) => GeneratorConfig::toy(a.employees, a.weeks),
                (None, false) => GeneratorConfig::new(a.employees, a.weeks),
            };
            cfg.employees = a.employees;
            cfg.weeks = a.weeks;
            let inst = generate_instance(&cfg, a.seed)?;
            write_text(a.out.as_deref(), &to_json_pretty(&inst))
        }
        Command::Solve(a) => {
            let inst = read_instance(&a.instance)?;
            let clock = StdClock::new();
            let res = optimize(&inst, &a.solver.weights()?, &a.solver.config(), &clock, &mut a.solver.sink())?;
            write_solution(&a.out, &inst, &res)?;
            println!("{}", summary(&res));
            Ok(())
        }
        Command::Reopt(a) => {
            let inst = read_instance(&a.instance)?;
            let original = read_roster_csv(&a.roster, &inst)?;
            let changes = read_changes(&a.changes)?;
            let clock = StdClock::new();
            let res = reoptimize_event(
                &inst,
                &original,
                &changes,
                &a.solver.weights()?,
                &a.solver.config(),
                &clock,
                &mut a.solver.sink(),
            )?;
            write_solution(&a.out, &res.instance, &res.result)?;
            write_json(&a.out.join("instance.json"), &res.instance)?;
            println!("{}  deviation {}", summary(&res.result), res.deviation);
            Ok(())
        }
        Command::Rolling(a) => {
            let inst = read_instance(&a.instance)?;
            let clock = StdClock::new();
            let mut sink = a.solver.sink();
            let plan = plan_rolling_horizon(
                &inst,
                a.period_weeks,
                &a.solver.weights()?,
                &a.solver.config(),
                a.adaptive,
                &clock,
                &mut |_, e| sink(e),
            )?;
            for p in &plan.periods {
                let dir = a.out.join(format!("period-{}", p.period + 1));
                write_solution(&dir, &p.instance, &p.result)?;
                println!("period {}: {}", p.period + 1, summary(&p.result));
            }
            write_json(&a.out.join("plan.json"), &plan)?;
            println!("weekend spread {:.4}", plan.weekend_spread());
            match plan.failure {
                Some(f) => Err(roster_core::Error::from(f).into()),
                None => Ok(()),
            }
        }
        Command::Patterns(a) => {
            let inst = read_instance(&a.instance)?;
            let pattern = read_pattern(&a.pattern)?;
            let clock = StdClock::new();
            let res = optimize_with_patterns(
                &inst,
                &pattern,
                &a.solver.weights()?,
                &a.solver.config(),
                &clock,
                &mut a.solver.sink(),
            )?;
            write_solution(&a.out, &inst, &res.result)?;
            write_atomic(&a.out.join("company.csv"), roster_csv_string(&inst, &res.company).as_bytes())?;
            println!("{}  pattern deviation {}  variants {:?}", summary(&res.result), res.f4, res.variants);
            Ok(())
        }
        Command::Bench(a) => {
            let cfg = BenchConfig {
                trials: a.trials,
                modes: a.modes.iter().map(|&m| m.into()).collect(),
                employees: a.employees,
                weeks: a.weeks,
                base_seed: a.base_seed,
                solver: HybridConfig {
                    total_time_limit: a.time_limit,
                    phase1_time_budget: a.phase1_time.min(a.time_limit),
                    ..BenchConfig::default().solver
                },
                ..BenchConfig::default()
            };
            let report = run_bench(&cfg, &mut |r| {
                eprintln!(
                    "trial {} {}: objective {} gap {} in {:.1}s{}",
                    r.trial,
                    mode_name(r.mode),
                    fmt_opt(r.objective),
                    fmt_opt(r.gap),
                    r.elapsed_s,
                    r.error.as_ref().map_or(String::new(), |e| format!(" ({e})"))
                )
            })?;
            let table = render_table(&report);
            print!("{table}");
            if let Some(dir) = &a.out {
                write_atomic(&dir.join("table.md"), table.as_bytes())?;
                write_json(&dir.join("report.json"), &report)?;
            }
            Ok(())
        }
        Command::Export(a) => {
            let inst = read_instance(&a.instance)?;
            let x = read_roster_csv(&a.roster, &inst)?;
            let text = match a.format {
                ExportFormat::Grid => roster_grid(&inst, &x),
                ExportFormat::Stats => stats_csv_string(&roster_stats(&inst, &x)?),
                ExportFormat::Json => to_json_pretty(&x),
                ExportFormat::Csv => roster_csv_string(&inst, &x),
            };
            write_text(a.out.as_deref(), &text)
        }
        Command::Check(a) => {
            let inst = read_instance(&a.instance)?;
            let x: Roster = read_roster_csv(&a.roster, &inst)?;
            let report = check_feasibility(&inst, &x)?;
            if report.feasible {
                println!("feasible");
                return Ok(());
            }
            for v in &report.violations {
                println!("{v:?}");
            }
            Err(CliError::Violations(report.violations.len()))
        }
        Command::Serve(a) => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Other(e.to_string()))?;
            let cfg = ServiceConfig {
                data_dir: a.data_dir,
                workers: a.workers,
            };
            rt.block_on(serve(cfg, a.port)).map_err(|e| CliError::Other(e.to_string()))
        }
    }
}
