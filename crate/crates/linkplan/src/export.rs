//! CSV artifacts.
//!
//! * trajectory: `t,q0..q{D-1},qd0..qd{D-1}`, one row per command sample
//! * anchors: `index,q0..q{D-1}`
//! * path: `x,y`
//! * stats: one row per benchmark arm
//! * trials: one row per benchmark trial

use std::io::{Read, Write};

use linkplan_core::trajectory::CommandSample;
use linkplan_core::{AnchorSequence, ReferencePath};

use crate::bench::{BenchmarkStats, TrialRecord};
use crate::ConfigError;

fn csv_error(e: csv::Error) -> ConfigError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ConfigError::Io(io),
        kind => ConfigError::Parse { line, message: format!("{kind:?}") },
    }
}

fn header(prefix: &str, dim: usize) -> impl Iterator<Item = String> + '_ {
    (0..dim).map(move |i| format!("{prefix}{i}"))
}

pub fn write_trajectory_csv(out: impl Write, samples: &[CommandSample]) -> Result<(), ConfigError> {
    let dim = samples.first().map_or(0, |s| s.q.len());
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<String> = std::iter::once("t".to_string()).chain(header("q", dim)).chain(header("qd", dim)).collect();
    w.write_record(&names).map_err(csv_error)?;
    for s in samples {
        let row = std::iter::once(s.t).chain(s.q.iter().copied()).chain(s.qdot.iter().copied());
        w.write_record(row.map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory_csv`].
pub fn read_trajectory_csv(input: impl Read) -> Result<Vec<CommandSample>, ConfigError> {
    let mut r = csv::Reader::from_reader(input);
    let names = r.headers().map_err(csv_error)?.clone();
    let columns = names.len();
    if columns < 3 || columns % 2 == 0 || names.get(0) != Some("t") {
        return Err(ConfigError::Parse { line: 1, message: "expected header `t,q0..,qd0..`".into() });
    }
    let dim = (columns - 1) / 2;
    let mut samples = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let values: Vec<f64> = record
            .iter()
            .map(|f| f.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| ConfigError::Parse { line, message: "non-numeric field".into() })?;
        samples.push(CommandSample { t: values[0], q: values[1..=dim].to_vec(), qdot: values[dim + 1..].to_vec() });
    }
    Ok(samples)
}

pub fn write_anchors_csv(out: impl Write, anchors: &AnchorSequence) -> Result<(), ConfigError> {
    let dim = anchors.states.first().map_or(0, |q| q.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("index".to_string()).chain(header("q", dim))).map_err(csv_error)?;
    for (i, q) in anchors.states.iter().enumerate() {
        w.write_record(std::iter::once(i.to_string()).chain(q.as_slice().iter().map(|v| v.to_string()))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_path_csv(out: impl Write, path: &ReferencePath) -> Result<(), ConfigError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y"]).map_err(csv_error)?;
    for p in &path.waypoints {
        w.write_record([p[0].to_string(), p[1].to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stats_csv(out: impl Write, stats: &[BenchmarkStats]) -> Result<(), ConfigError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "arm",
        "trials",
        "successes",
        "success_rate",
        "time_mean_s",
        "time_std_s",
        "root_length_mean_m",
        "root_length_std_m",
        "generalized_length_mean",
        "generalized_length_std",
        "collision_failures",
    ])
    .map_err(csv_error)?;
    for s in stats {
        w.write_record([
            s.arm.name().to_string(),
            s.trials.to_string(),
            s.successes.to_string(),
            s.success_rate.to_string(),
            s.time_mean.to_string(),
            s.time_std.to_string(),
            s.root_length_mean.to_string(),
            s.root_length_std.to_string(),
            s.generalized_length_mean.to_string(),
            s.generalized_length_std.to_string(),
            s.collision_failures.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials_csv(out: impl Write, trials: &[TrialRecord]) -> Result<(), ConfigError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "arm",
        "seed",
        "start_x",
        "success",
        "time_s",
        "anchors",
        "collision",
        "controllability",
        "velocity",
        "joint",
        "root_length_m",
        "generalized_length",
        "speed_excess",
        "min_tau",
        "error",
    ])
    .map_err(csv_error)?;
    for t in trials {
        w.write_record([
            t.arm.name().to_string(),
            t.seed.to_string(),
            t.start_x.to_string(),
            t.success.to_string(),
            t.time.to_string(),
            t.anchors.to_string(),
            t.collision_violations.to_string(),
            t.controllability_violations.to_string(),
            t.velocity_violations.to_string(),
            t.joint_violations.to_string(),
            t.root_length.to_string(),
            t.generalized_length.to_string(),
            t.speed_excess.to_string(),
            t.min_tau.to_string(),
            t.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
