//! Jobs and their file-backed store: one directory per job holding the
//! request, an instance snapshot, the event trace and the result.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use roster_core::clock::Clock;
use roster_core::extensions::{
    optimize_with_patterns, plan_rolling_horizon, reoptimize_event, ChangeRequest, EventResult, PatternResult,
    RollingPlan,
};
use roster_core::hybrid::{optimize, HybridConfig, OptimizationResult, ProgressEvent};
use roster_core::milp::WorkPattern;
use roster_core::model::{roster_stats, ObjectiveWeights, RosterStats};
use roster_core::{Roster, RosterInstance};
use serde::{Deserialize, Serialize};

use crate::bench::{run_bench, BenchConfig, BenchReport};
use crate::formats::{read_json, roster_csv_string, write_atomic, write_json, FormatError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Optimize,
    EventReoptimize,
    RollingHorizon,
    Patterns,
    Benchmark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
    Cancelled,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Done | Self::Failed | Self::Cancelled)
    }

    pub fn can_become(self, next: JobState) -> bool {
        matches!(
            (self, next),
            (Self::Queued, Self::Running) | (Self::Running, Self::Done | Self::Failed | Self::Cancelled)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    Optimize {
        instance_id: String,
    },
    EventReoptimize {
        source_job: String,
        changes: Vec<ChangeRequest>,
    },
    RollingHorizon {
        instance_id: String,
        period_weeks: usize,
        #[serde(default)]
        adaptive: bool,
    },
    Patterns {
        instance_id: String,
        pattern: WorkPattern,
    },
    Benchmark {
        #[serde(default)]
        bench: BenchConfig,
    },
}

impl Task {
    pub fn kind(&self) -> JobKind {
        match self {
            Self::Optimize { .. } => JobKind::Optimize,
            Self::EventReoptimize { .. } => JobKind::EventReoptimize,
            Self::RollingHorizon { .. } => JobKind::RollingHorizon,
            Self::Patterns { .. } => JobKind::Patterns,
            Self::Benchmark { .. } => JobKind::Benchmark,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(flatten)]
    pub task: Task,
    #[serde(default)]
    pub config: HybridConfig,
    #[serde(default)]
    pub weights: ObjectiveWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: JobKind,
    pub spec: JobSpec,
    pub state: JobState,
    pub error: Option<String>,
    pub created_at: u64,
    pub finished_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "output", rename_all = "snake_case")]
pub enum JobOutput {
    Optimize(OptimizationResult),
    EventReoptimize(EventResult),
    RollingHorizon(RollingPlan),
    Patterns(PatternResult),
    Benchmark(BenchReport),
}

impl JobOutput {
    /// The single roster a job produced, with the instance it belongs to.
    pub fn roster<'a>(&'a self, snapshot: &'a RosterInstance) -> Option<(&'a RosterInstance, &'a Roster)> {
        match self {
            Self::Optimize(r) => Some((snapshot, &r.roster)),
            Self::EventReoptimize(r) => Some((&r.instance, &r.result.roster)),
            Self::Patterns(r) => Some((snapshot, &r.result.roster)),
            Self::RollingHorizon(_) | Self::Benchmark(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobResult {
    #[serde(flatten)]
    pub output: JobOutput,
    pub stats: Option<RosterStats>,
    /// Changed assignments against the source roster (event jobs).
    pub deviation: Option<usize>,
}

/// One line of a job's progress stream. Rolling-horizon and benchmark jobs
/// run several searches; `segment` numbers them and the incumbent and bound
/// are monotone within a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub seq: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<usize>,
    #[serde(flatten)]
    pub event: Option<ProgressEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<JobState>,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("illegal state change {from:?} -> {to:?}")]
    IllegalTransition { from: JobState, to: JobState },
    #[error(transparent)]
    Format(#[from] FormatError),
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn next_id(dir: &Path, prefix: &str) -> std::io::Result<u64> {
    let mut max = 0;
    if dir.exists() {
        for entry in fs::read_dir(dir)? {
            let name = entry?.file_name().to_string_lossy().into_owned();
            let stem = name.strip_suffix(".json").unwrap_or(&name);
            if let Some(n) = stem.strip_prefix(prefix).and_then(|n| n.parse::<u64>().ok()) {
                max = max.max(n);
            }
        }
    }
    Ok(max + 1)
}

const INSTANCE_PREFIX: &str = "inst-";
const JOB_PREFIX: &str = "job-";

/// Instances live in `instances/<id>.json`, jobs in `jobs/<id>/`.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    ids: Mutex<(u64, u64)>,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| FormatError::Io { path, source }
        };
        let (inst_dir, job_dir) = (root.join("instances"), root.join("jobs"));
        fs::create_dir_all(&inst_dir).map_err(io(&inst_dir))?;
        fs::create_dir_all(&job_dir).map_err(io(&job_dir))?;
        let ids = (
            next_id(&inst_dir, INSTANCE_PREFIX).map_err(io(&inst_dir))?,
            next_id(&job_dir, JOB_PREFIX).map_err(io(&job_dir))?,
        );
        Ok(Self {
            root,
            ids: Mutex::new(ids),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn instance_path(&self, id: &str) -> PathBuf {
        self.root.join("instances").join(format!("{id}.json"))
    }

    pub fn job_dir(&self, id: &str) -> PathBuf {
        self.root.join("jobs").join(id)
    }

    fn valid_id(id: &str, prefix: &str) -> bool {
        id.strip_prefix(prefix).is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
    }

    pub fn put_instance(&self, inst: &RosterInstance) -> Result<String, StoreError> {
        let mut ids = self.ids.lock().expect("id lock");
        let id = format!("{INSTANCE_PREFIX}{:06}", ids.0);
        write_json(&self.instance_path(&id), inst)?;
        ids.0 += 1;
        Ok(id)
    }

    pub fn get_instance(&self, id: &str) -> Result<RosterInstance, StoreError> {
        let path = self.instance_path(id);
        if !Self::valid_id(id, INSTANCE_PREFIX) || !path.exists() {
            return Err(StoreError::NotFound(format!("instance {id}")));
        }
        Ok(read_json(&path)?)
    }

    pub fn list_instances(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = list_dir(&self.root.join("instances"))?
            .into_iter()
            .filter_map(|n| n.strip_suffix(".json").map(String::from))
            .filter(|n| Self::valid_id(n, INSTANCE_PREFIX))
            .collect::<Vec<_>>();
        ids.sort();
        Ok(ids)
    }

    /// Creates a queued job with its instance snapshot.
    pub fn create_job(&self, spec: JobSpec, snapshot: Option<&RosterInstance>) -> Result<JobRecord, StoreError> {
        let mut ids = self.ids.lock().expect("id lock");
        let id = format!("{JOB_PREFIX}{:06}", ids.1);
        let rec = JobRecord {
            id: id.clone(),
            kind: spec.task.kind(),
            spec,
            state: JobState::Queued,
            error: None,
            created_at: now_secs(),
            finished_at: None,
        };
        let dir = self.job_dir(&id);
        if let Some(inst) = snapshot {
            write_json(&dir.join("instance.json"), inst)?;
        }
        write_json(&dir.join("job.json"), &rec)?;
        ids.1 += 1;
        Ok(rec)
    }

    pub fn load_job(&self, id: &str) -> Result<JobRecord, StoreError> {
        let path = self.job_dir(id).join("job.json");
        if !Self::valid_id(id, JOB_PREFIX) || !path.exists() {
            return Err(StoreError::NotFound(format!("job {id}")));
        }
        Ok(read_json(&path)?)
    }

    pub fn list_jobs(&self) -> Result<Vec<JobRecord>, StoreError> {
        let mut names = list_dir(&self.root.join("jobs"))?;
        names.retain(|n| Self::valid_id(n, JOB_PREFIX));
        names.sort();
        names.iter().map(|n| self.load_job(n)).collect()
    }

    /// Moves a job to `next`, enforcing the lifecycle.
    pub fn transition(&self, id: &str, next: JobState, error: Option<String>) -> Result<JobRecord, StoreError> {
        let mut rec = self.load_job(id)?;
        if !rec.state.can_become(next) {
            return Err(StoreError::IllegalTransition {
                from: rec.state,
                to: next,
            });
        }
        rec.state = next;
        rec.error = error;
        if next.is_terminal() {
            rec.finished_at = Some(now_secs());
        }
        write_json(&self.job_dir(id).join("job.json"), &rec)?;
        Ok(rec)
    }

    pub fn snapshot(&self, id: &str) -> Result<RosterInstance, StoreError> {
        let path = self.job_dir(id).join("instance.json");
        if !path.exists() {
            return Err(StoreError::NotFound(format!("instance snapshot of job {id}")));
        }
        Ok(read_json(&path)?)
    }

    pub fn append_event(&self, id: &str, line: &str) -> Result<(), StoreError> {
        let path = self.job_dir(id).join("events.ndjson");
        let io = |source| FormatError::Io {
            path: path.clone(),
            source,
        };
        let mut f = fs::OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        writeln!(f, "{line}").map_err(io)?;
        Ok(())
    }

    pub fn read_events(&self, id: &str) -> Result<Vec<String>, StoreError> {
        let path = self.job_dir(id).join("events.ndjson");
        match fs::read_to_string(&path) {
            Ok(s) => Ok(s.lines().map(String::from).collect()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
            Err(source) => Err(FormatError::Io { path, source }.into()),
        }
    }

    pub fn write_result(&self, id: &str, result: &JobResult) -> Result<(), StoreError> {
        let dir = self.job_dir(id);
        let snapshot = self.snapshot(id).ok();
        if let Some((inst, x)) = snapshot.as_ref().and_then(|s| result.output.roster(s)) {
            write_atomic(&dir.join("roster.csv"), roster_csv_string(inst, x).as_bytes())?;
        }
        write_json(&dir.join("result.json"), result)?;
        Ok(())
    }

    pub fn read_result(&self, id: &str) -> Result<JobResult, StoreError> {
        let path = self.job_dir(id).join("result.json");
        if !path.exists() {
            return Err(StoreError::NotFound(format!("result of job {id}")));
        }
        Ok(read_json(&path)?)
    }

    pub fn roster_csv(&self, id: &str) -> Result<String, StoreError> {
        let path = self.job_dir(id).join("roster.csv");
        fs::read_to_string(&path).map_err(|_| StoreError::NotFound(format!("roster of job {id}")))
    }
}

fn list_dir(dir: &Path) -> Result<Vec<String>, StoreError> {
    let io = |source| FormatError::Io {
        path: dir.into(),
        source,
    };
    fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()).map_err(io))
        .collect::<Result<_, _>>()
        .map_err(Into::into)
}

/// Failure of a job run, as stored in the job record.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] roster_core::Error),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn with_stats(output: JobOutput, snapshot: Option<&RosterInstance>) -> Result<JobResult, RunError> {
    let stats = match snapshot.and_then(|s| output.roster(s)) {
        Some((inst, x)) => Some(roster_stats(inst, x)?),
        None => None,
    };
    let deviation = match &output {
        JobOutput::EventReoptimize(r) => Some(r.deviation),
        _ => None,
    };
    Ok(JobResult {
        output,
        stats,
        deviation,
    })
}

/// Runs a job to completion. `sink` receives `(segment, event)` pairs.
pub fn execute(
    store: &Store,
    rec: &JobRecord,
    clock: &dyn Clock,
    sink: &mut dyn FnMut(Option<usize>, &ProgressEvent),
) -> Result<JobResult, RunError> {
    let JobSpec { task, config, weights } = &rec.spec;
    let snapshot = store.snapshot(&rec.id).ok();
    let inst = || snapshot.clone().ok_or_else(|| StoreError::NotFound(format!("instance of job {}", rec.id)));
    let output = match task {
        Task::Optimize { .. } => JobOutput::Optimize(optimize(&inst()?, weights, config, clock, &mut |e| sink(None, e))?),
        Task::EventReoptimize { source_job, changes } => {
            let source = store.read_result(source_job)?;
            let source_inst = store.snapshot(source_job)?;
            let (_, original) = source
                .output
                .roster(&source_inst)
                .ok_or_else(|| roster_core::Error::InvalidChange(format!("job {source_job} has no single roster")))?;
            JobOutput::EventReoptimize(reoptimize_event(
                &inst()?,
                original,
                changes,
                weights,
                config,
                clock,
                &mut |e| sink(None, e),
            )?)
        }
        Task::RollingHorizon {
            period_weeks, adaptive, ..
        } => JobOutput::RollingHorizon(plan_rolling_horizon(
            &inst()?,
            *period_weeks,
            weights,
            config,
            *adaptive,
            clock,
            &mut |p, e| sink(Some(p), e),
        )?),
        Task::Patterns { pattern, .. } => JobOutput::Patterns(optimize_with_patterns(
            &inst()?,
            pattern,
            weights,
            config,
            clock,
            &mut |e| sink(None, e),
        )?),
        Task::Benchmark { bench } => {
            let mut segment = 0;
            JobOutput::Benchmark(run_bench(bench, &mut |run| {
                for e in &run.events {
                    sink(Some(segment), e);
                }
                segment += 1;
            })?)
        }
    };
    with_stats(output, snapshot.as_ref())
}
