//! CSV formats: decision logs, ROC points, trajectories and traces.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! file read back parses to bit-identical values.

use std::io::{Read, Write};
use std::path::Path;

use ethics2vec::{DecisionLog, EthicsTrace, Record, RocCurve, Trajectory, TrajectoryStep};

use crate::error::{CliError, Result};

pub const LOG_COLUMNS: [&str; 3] = ["score", "action", "truth"];
pub const TRAJECTORY_COLUMNS: [&str; 3] = ["t", "x", "u"];

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Column positions for the required names, in order.
fn locate_columns(headers: &csv::StringRecord, required: &[&str], path: &Path) -> Result<Vec<usize>> {
    required
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| parse_error(path, 1, format!("missing column `{name}`")))
        })
        .collect()
}

fn parse_binary(field: &str, column: &str, path: &Path, line: u64) -> Result<bool> {
    match field.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(parse_error(path, line, format!("column `{column}` must be 0 or 1, got `{other}`"))),
    }
}

fn parse_real(field: &str, column: &str, path: &Path, line: u64) -> Result<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_error(path, line, format!("column `{column}` is not a number: `{field}`")))?;
    if !value.is_finite() {
        return Err(parse_error(path, line, format!("column `{column}` is not finite: `{field}`")));
    }
    Ok(value)
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader)
}

fn csv_error(path: &Path, err: csv::Error) -> CliError {
    let line = err.position().map_or(0, |p| p.line());
    parse_error(path, line, err.to_string())
}

/// Reads a `score,action,truth` log. `path` only labels error messages.
pub fn read_decision_log<R: Read>(reader: R, path: &Path) -> Result<DecisionLog> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = locate_columns(&headers, &LOG_COLUMNS, path)?;
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        records.push(Record::new(
            parse_real(&row[cols[0]], "score", path, line)?,
            parse_binary(&row[cols[1]], "action", path, line)?,
            parse_binary(&row[cols[2]], "truth", path, line)?,
        ));
    }
    if records.is_empty() {
        return Err(parse_error(path, 1, "no records after the header"));
    }
    Ok(DecisionLog::new(records)?)
}

pub fn load_decision_log(path: &Path) -> Result<DecisionLog> {
    let file = std::fs::File::open(path).map_err(|e| parse_error(path, 0, e.to_string()))?;
    read_decision_log(std::io::BufReader::new(file), path)
}

pub fn write_decision_log<W: Write>(log: &DecisionLog, mut out: W) -> std::io::Result<()> {
    writeln!(out, "score,action,truth")?;
    for r in log.records() {
        writeln!(out, "{},{},{}", r.score, u8::from(r.action), u8::from(r.truth))?;
    }
    Ok(())
}

pub fn write_roc<W: Write>(roc: &RocCurve, mut out: W) -> std::io::Result<()> {
    writeln!(out, "tau,fpr,tpr")?;
    for p in roc.points() {
        writeln!(out, "{},{},{}", p.tau, p.fpr, p.tpr)?;
    }
    Ok(())
}

/// Reads a `t,x,u` trajectory; `dt` is taken from the first two rows.
pub fn read_trajectory<R: Read>(reader: R, path: &Path, destination: f64) -> Result<Trajectory> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let cols = locate_columns(&headers, &TRAJECTORY_COLUMNS, path)?;
    let mut steps = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        steps.push(TrajectoryStep {
            t: parse_real(&row[cols[0]], "t", path, line)?,
            x: parse_real(&row[cols[1]], "x", path, line)?,
            u: parse_real(&row[cols[2]], "u", path, line)?,
        });
    }
    if steps.len() < 2 {
        return Err(parse_error(path, 1, "a trajectory needs at least two rows"));
    }
    let trajectory = Trajectory { dt: steps[1].t - steps[0].t, steps, destination };
    trajectory.validate()?;
    Ok(trajectory)
}

pub fn write_trajectory<W: Write>(trajectory: &Trajectory, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,x,u")?;
    for s in &trajectory.steps {
        writeln!(out, "{},{},{}", s.t, s.x, s.u)?;
    }
    Ok(())
}

/// `t,x,u,E1,...,ER`, one row per step.
pub fn write_trace<W: Write>(trajectory: &Trajectory, trace: &EthicsTrace, mut out: W) -> std::io::Result<()> {
    write!(out, "t,x,u")?;
    for i in 1..=trace.risk_count() {
        write!(out, ",E{i}")?;
    }
    writeln!(out)?;
    for (s, v) in trajectory.steps.iter().zip(&trace.vectors) {
        write!(out, "{},{},{}", s.t, s.x, s.u)?;
        for e in v {
            write!(out, ",{e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
