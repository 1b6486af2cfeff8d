//! Randomized benchmark: seeded instances solved in each mode, reported as
//! the mean time to reach a ladder of optimality gaps.

use roster_core::bnb::compute_gap;
use roster_core::clock::Clock;
use roster_core::hybrid::{optimize, HybridConfig, Mode, ProgressEvent};
use roster_core::model::{generate_instance, GeneratorConfig, ObjectiveWeights};
use serde::{Deserialize, Serialize};

use crate::clock::StdClock;

pub const GAP_THRESHOLDS: [f64; 6] = [0.50, 0.20, 0.10, 0.05, 0.03, 0.01];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub trials: usize,
    pub modes: Vec<Mode>,
    pub employees: usize,
    pub weeks: usize,
    /// Instance seeds are `base_seed + trial`.
    pub base_seed: u64,
    /// Settings shared by every run; `mode` and `seed` are overridden.
    pub solver: HybridConfig,
    pub weights: ObjectiveWeights,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            trials: 5,
            modes: vec![Mode::Hybrid, Mode::MilpAlone],
            employees: 6,
            weeks: 2,
            base_seed: 1,
            solver: HybridConfig {
                gap_target: 0.01,
                total_time_limit: 60.0,
                phase1_time_budget: 20.0,
                ..HybridConfig::default()
            },
            weights: ObjectiveWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub trial: usize,
    pub seed: u64,
    pub mode: Mode,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub elapsed_s: f64,
    pub error: Option<String>,
    pub events: Vec<ProgressEvent>,
}

impl BenchRun {
    /// First time the trace proves a gap of at most `gap`, recomputed from
    /// the incumbent and bound of each event.
    pub fn time_to_gap(&self, gap: f64) -> Option<f64> {
        self.events.iter().find_map(|e| match (e.incumbent, e.bound) {
            (Some(u), Some(l)) if compute_gap(u, l) <= gap => Some(e.elapsed_s),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCell {
    pub mode: Mode,
    /// Mean over the trials that reached the gap.
    pub mean_time_s: Option<f64>,
    pub reached: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub gap: f64,
    pub cells: Vec<ModeCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub runs: Vec<BenchRun>,
    pub table: Vec<BenchRow>,
    pub total_elapsed_s: f64,
}

pub fn run_bench(config: &BenchConfig, on_run: &mut dyn FnMut(&BenchRun)) -> roster_core::Result<BenchReport> {
    config.solver.validate()?;
    config.weights.validate()?;
    let wall = StdClock::new();
    let mut runs = Vec::new();
    for trial in 0..config.trials {
        let seed = config.base_seed + trial as u64;
        let inst = generate_instance(&GeneratorConfig::new(config.employees, config.weeks), seed)?;
        for &mode in &config.modes {
            let solver = HybridConfig {
                mode,
                seed,
                ..config.solver.clone()
            };
            let clock = StdClock::new();
            let mut events = Vec::new();
            let res = optimize(&inst, &config.weights, &solver, &clock, &mut |e| events.push(e.clone()));
            let run = BenchRun {
                trial,
                seed,
                mode,
                objective: res.as_ref().ok().map(|r| r.objective.total),
                gap: res.as_ref().ok().map(|r| r.gap),
                elapsed_s: clock.elapsed_secs(),
                error: res.err().map(|e| e.to_string()),
                events,
            };
            on_run(&run);
            runs.push(run);
        }
    }
    let table = summarize(&config.modes, &runs);
    Ok(BenchReport {
        config: config.clone(),
        runs,
        table,
        total_elapsed_s: wall.elapsed_secs(),
    })
}

pub fn summarize(modes: &[Mode], runs: &[BenchRun]) -> Vec<BenchRow> {
    GAP_THRESHOLDS
        .iter()
        .map(|&gap| BenchRow {
            gap,
            cells: modes
                .iter()
                .map(|&mode| {
                    let times: Vec<f64> = runs
                        .iter()
                        .filter(|r| r.mode == mode)
                        .filter_map(|r| r.time_to_gap(gap))
                        .collect();
                    ModeCell {
                        mode,
                        mean_time_s: (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64),
                        reached: times.len(),
                    }
                })
                .collect(),
        })
        .collect()
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Hybrid => "hybrid",
        Mode::MilpAlone => "milp",
    }
}

/// Markdown table: one row per gap threshold, mean seconds and the number
/// of trials that got there for each mode.
pub fn render_table(report: &BenchReport) -> String {
    let trials = report.config.trials;
    let mut out = String::from("| Optimality gap |");
    for m in &report.config.modes {
        out.push_str(&format!(" {} mean time (s) | {} reached |", mode_name(*m), mode_name(*m)));
    }
    out.push_str("\n|---:|");
    out.push_str(&"---:|---:|".repeat(report.config.modes.len()));
    out.push('\n');
    for row in &report.table {
        out.push_str(&format!("| {:.0}% |", row.gap * 100.0));
        for c in &row.cells {
            let t = c.mean_time_s.map_or("-".to_string(), |t| format!("{t:.2}"));
            out.push_str(&format!(" {t} | {}/{trials} |", c.reached));
        }
        out.push('\n');
    }
    out
}
