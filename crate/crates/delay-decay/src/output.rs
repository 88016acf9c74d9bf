//! CSV and JSON writers.

use std::io::{self, Write};

use delay_decay_core::sim::InitialHistory;
use delay_decay_core::{CriticalCurve, PointStatus, Trajectory};
use serde::Serialize;

use crate::spec::render;

pub const SCHEMA_VERSION: &str = "1";

/// Every JSON document carries the schema version and the producing command.
#[derive(Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    pub result: T,
}

pub fn write_json<T: Serialize>(
    w: &mut dyn Write,
    command: &str,
    dist: Option<String>,
    result: T,
) -> io::Result<()> {
    let doc = Document { schema_version: SCHEMA_VERSION, command, dist, result };
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}

pub fn write_curve_csv(w: &mut dyn Write, curve: &CriticalCurve) -> io::Result<()> {
    write!(
        w,
        "# family={} scan={} critical={} tol={}",
        curve.family, curve.scan_name, curve.critical_name, curve.config.tol
    )?;
    for (k, v) in &curve.fixed_params {
        write!(w, " {k}={v}")?;
    }
    writeln!(w)?;
    writeln!(w, "scan,critical,bracket,feasible_side")?;
    for p in &curve.points {
        let side = match p.status {
            PointStatus::InfeasibleEverywhere => "none",
            _ => p.feasible_side.as_str(),
        };
        writeln!(w, "{},{},{},{}", p.scan_value, p.critical_value, p.bracket_width, side)?;
    }
    Ok(())
}

fn history_label(h: &InitialHistory) -> String {
    match h {
        InitialHistory::Constant(c) => format!("constant({c})"),
        InitialHistory::Table(rows) => format!("table({} rows)", rows.len()),
    }
}

pub fn write_trajectory_csv(w: &mut dyn Write, traj: &Trajectory) -> io::Result<()> {
    let c = &traj.config;
    writeln!(
        w,
        "# dist={} t_end={} h={} eps_tail={:e} quad_points_per_step={} history={} blow_up={}",
        render(&traj.dist),
        c.t_end,
        c.h,
        c.eps_tail,
        c.quad_points_per_step,
        history_label(&traj.history),
        traj.blow_up
    )?;
    writeln!(w, "t,u")?;
    for (t, u) in traj.times().zip(&traj.values) {
        writeln!(w, "{t:.16e},{u:.16e}")?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct TrajectoryJson<'a> {
    pub config: &'a delay_decay_core::SimConfig,
    pub history: &'a InitialHistory,
    pub blow_up: bool,
    pub t: Vec<f64>,
    pub u: &'a [f64],
}

impl<'a> From<&'a Trajectory> for TrajectoryJson<'a> {
    fn from(traj: &'a Trajectory) -> Self {
        TrajectoryJson {
            config: &traj.config,
            history: &traj.history,
            blow_up: traj.blow_up,
            t: traj.times().collect(),
            u: &traj.values,
        }
    }
}

/// `s,u` rows of an initial-history table. Blank lines, `#` comments and a
/// non-numeric header row are skipped.
pub fn read_history_csv(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (Some(s), Some(u), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(format!("line {}: expected two columns `s,u`", i + 1));
        };
        match (s.parse::<f64>(), u.parse::<f64>()) {
            (Ok(s), Ok(u)) => rows.push((s, u)),
            _ if rows.is_empty() => continue,
            _ => return Err(format!("line {}: `{line}` is not numeric", i + 1)),
        }
    }
    Ok(rows)
}
