//! File formats: JSON instances, roster and statistics CSV, change-request
//! lists, work-pattern grids and NDJSON progress traces.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use roster_core::extensions::ChangeRequest;
use roster_core::hybrid::ProgressEvent;
use roster_core::milp::WorkPattern;
use roster_core::model::{
    validate_instance, RosterStats, ShiftKind, BLOCKS_PER_DAY, BLOCKS_PER_WEEK, DAYS_PER_WEEK,
};
use roster_core::{Roster, RosterInstance};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub const DAY_NAMES: [&str; DAYS_PER_WEEK] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
pub const SLOT_NAMES: [&str; BLOCKS_PER_DAY] = ["M", "A", "N"];
pub const ROSTER_HEADER: [&str; 5] = ["employee", "week", "day", "slot", "shift"];

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}:{column}: {msg}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("{path}:{line}: {msg}")]
    Line { path: PathBuf, line: usize, msg: String },
    #[error("{path}: invalid instance:\n  {}", issues.join("\n  "))]
    InvalidInstance { path: PathBuf, issues: Vec<String> },
    #[error(transparent)]
    Core(#[from] roster_core::Error),
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    let mut s = String::new();
    let res = if path == Path::new("-") {
        io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        fs::File::open(path).and_then(|mut f| f.read_to_string(&mut s)).map(|_| ())
    };
    res.map_err(|source| FormatError::Io {
        path: path.into(),
        source,
    })?;
    Ok(s)
}

/// Writes through a temporary sibling and a rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let io_err = |source| FormatError::Io {
        path: path.into(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Json {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    parse_json(path, &read_text(path)?)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    write_atomic(path, to_json_pretty(value).as_bytes())
}

/// Parses and validates an instance document.
pub fn parse_instance(path: &Path, text: &str) -> Result<RosterInstance, FormatError> {
    let inst: RosterInstance = parse_json(path, text)?;
    let report = validate_instance(&inst);
    if !report.issues.is_empty() {
        return Err(FormatError::InvalidInstance {
            path: path.into(),
            issues: report.issues.iter().map(|i| i.describe()).collect(),
        });
    }
    Ok(inst)
}

pub fn read_instance(path: &Path) -> Result<RosterInstance, FormatError> {
    parse_instance(path, &read_text(path)?)
}

pub fn read_changes(path: &Path) -> Result<Vec<ChangeRequest>, FormatError> {
    read_json(path)
}

/// Writes one row per worked `(employee, block, shift type)`; weeks count
/// from 1, employees from 0.
pub fn write_roster_csv<W: Write>(inst: &RosterInstance, x: &Roster, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ROSTER_HEADER)?;
    let (n, m, s) = x.dims();
    for e in 0..n {
        for j in 0..m {
            for k in 0..s {
                if x.get(e, j, k) {
                    let day = (j % BLOCKS_PER_WEEK) / BLOCKS_PER_DAY;
                    w.write_record([
                        e.to_string().as_str(),
                        &(j / BLOCKS_PER_WEEK + 1).to_string(),
                        DAY_NAMES[day],
                        SLOT_NAMES[j % BLOCKS_PER_DAY],
                        &inst.shift_types[k].label,
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn roster_csv_string(inst: &RosterInstance, x: &Roster) -> String {
    let mut buf = Vec::new();
    write_roster_csv(inst, x, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 csv")
}

pub fn parse_roster_csv(path: &Path, text: &str, inst: &RosterInstance) -> Result<Roster, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let err = |line: usize, msg: String| FormatError::Line {
        path: path.into(),
        line,
        msg,
    };
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(ROSTER_HEADER) {
        return Err(err(1, format!("expected header {}", ROSTER_HEADER.join(","))));
    }
    let mut x = Roster::for_instance(inst);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(i).unwrap_or("");
        let e: usize = field(0)
            .parse()
            .ok()
            .filter(|&e| e < inst.employees)
            .ok_or_else(|| err(line, format!("employee: `{}` is not in 0..{}", field(0), inst.employees)))?;
        let week: usize = field(1)
            .parse()
            .ok()
            .filter(|w| (1..=inst.weeks).contains(w))
            .ok_or_else(|| err(line, format!("week: `{}` is not in 1..={}", field(1), inst.weeks)))?;
        let day = DAY_NAMES
            .iter()
            .position(|d| d.eq_ignore_ascii_case(field(2)))
            .ok_or_else(|| err(line, format!("day: unknown day `{}`", field(2))))?;
        let slot = SLOT_NAMES
            .iter()
            .position(|s| *s == field(3))
            .ok_or_else(|| err(line, format!("slot: `{}` is not M, A or N", field(3))))?;
        let k = inst
            .shift_index(field(4))
            .ok_or_else(|| err(line, format!("shift: unknown shift type `{}`", field(4))))?;
        x.set(e, (week - 1) * BLOCKS_PER_WEEK + day * BLOCKS_PER_DAY + slot, k, true);
    }
    Ok(x)
}

pub fn read_roster_csv(path: &Path, inst: &RosterInstance) -> Result<Roster, FormatError> {
    parse_roster_csv(path, &read_text(path)?, inst)
}

/// Per-employee statistics, one row each, followed by a `total` row.
pub fn write_stats_csv<W: Write>(stats: &RosterStats, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["employee".to_string()];
    header.extend(stats.shift_labels.iter().cloned());
    header.extend(stats.shift_labels.iter().map(|l| format!("{l}_weekend")));
    header.extend(
        ["worked_sundays", "rest_days", "preferences", "preferences_violated", "preference_satisfaction"].map(String::from),
    );
    w.write_record(&header)?;
    let s = stats.shift_labels.len();
    let mut sums = vec![0.0; 2 * s + 4];
    for e in &stats.employees {
        let nums: Vec<f64> = e
            .shifts
            .iter()
            .chain(&e.weekend_shifts)
            .copied()
            .chain([
                e.worked_sundays as f64,
                e.rest_days as f64,
                e.preferences as f64,
                e.preferences_violated as f64,
            ])
            .collect();
        for (a, b) in sums.iter_mut().zip(&nums) {
            *a += b;
        }
        let mut row = vec![e.employee.to_string()];
        row.extend(nums.iter().map(|v| v.to_string()));
        row.push(format!("{:.4}", e.preference_satisfaction));
        w.write_record(&row)?;
    }
    let mut row = vec!["total".to_string()];
    row.extend(sums.iter().map(|v| v.to_string()));
    row.push(format!("{:.4}", stats.preference_satisfaction));
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

pub fn stats_csv_string(stats: &RosterStats) -> String {
    let mut buf = Vec::new();
    write_stats_csv(stats, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("utf-8 csv")
}

/// Day label of employee `e` on horizon day `d`, in the notation of work
/// pattern files: `M`/`A`/`N` for the first eight-hour type, `label:slot`
/// for other eight-hour types, the label for all-day types and `-` for rest.
pub fn day_label(inst: &RosterInstance, x: &Roster, e: usize, d: usize) -> String {
    let first_eight = inst.shift_types.iter().position(|t| t.kind == ShiftKind::EightHour);
    let mut parts = Vec::new();
    for b in 0..BLOCKS_PER_DAY {
        let j = d * BLOCKS_PER_DAY + b;
        for (k, t) in inst.shift_types.iter().enumerate() {
            if !x.get(e, j, k) {
                continue;
            }
            match t.kind {
                ShiftKind::AllDay if b == 0 => parts.push(t.label.clone()),
                ShiftKind::AllDay => {}
                ShiftKind::EightHour if Some(k) == first_eight => parts.push(SLOT_NAMES[b].to_string()),
                ShiftKind::EightHour => parts.push(format!("{}:{}", t.label, SLOT_NAMES[b])),
            }
        }
    }
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join("+")
    }
}

/// Week-by-day grid per employee, the layout managers read rosters in.
pub fn roster_grid(inst: &RosterInstance, x: &Roster) -> String {
    let mut out = String::new();
    for e in 0..inst.employees {
        out.push_str(&format!("employee {e}\n      {}\n", DAY_NAMES.map(|d| format!("{d:>5}")).join("")));
        for week in 0..inst.weeks {
            out.push_str(&format!("w{:<4} ", week + 1));
            for day in 0..DAYS_PER_WEEK {
                out.push_str(&format!("{:>5}", day_label(inst, x, e, week * DAYS_PER_WEEK + day)));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// A pattern grid: one week per line, seven whitespace-separated labels.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_pattern(path: &Path, text: &str) -> Result<WorkPattern, FormatError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split_whitespace().collect();
        let row: [&str; DAYS_PER_WEEK] = cells.as_slice().try_into().map_err(|_| FormatError::Line {
            path: path.into(),
            line: i + 1,
            msg: format!("expected {DAYS_PER_WEEK} day labels, found {}", cells.len()),
        })?;
        rows.push(row);
    }
    Ok(WorkPattern::from_rows(&rows)?)
}

pub fn read_pattern(path: &Path) -> Result<WorkPattern, FormatError> {
    parse_pattern(path, &read_text(path)?)
}

pub fn pattern_text(p: &WorkPattern) -> String {
    p.grid.iter().map(|w| w.join(" ") + "\n").collect()
}

pub fn trace_ndjson(events: &[ProgressEvent]) -> String {
    events
        .iter()
        .map(|e| serde_json::to_string(e).expect("serializable event") + "\n")
        .collect()
}

pub fn parse_trace(path: &Path, text: &str) -> Result<Vec<ProgressEvent>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| FormatError::Json {
                path: path.into(),
                line: i + 1,
                column: e.column(),
                msg: e.to_string(),
            })
        })
        .collect()
}
