//! Metric file emission and trajectory serialization.
//!
//! Per-cycle metric files are comma-separated with a fixed column order:
//! `step,t,x,y,v,a,j,theta,kappa,kappa_dot,a_y,j_y,heading_err,lat_offset`,
//! then one distance column per obstacle and per non-crossable boundary.
//! Floats are written in shortest round-trip form, so identical runs produce
//! byte-identical files. The run summary additionally carries solve timing,
//! which varies between runs and is excluded from reproducibility checks.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::types::{Trajectory, VehicleAction, VehicleState};

use super::scenario::Scenario;
use super::sim::CycleLog;

/// Aggregates across a receding-horizon run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub cycles: usize,
    pub min_obstacle_distance: Option<f64>,
    pub min_boundary_distance: Option<f64>,
    pub max_abs_lateral_accel: f64,
    pub max_abs_lateral_jerk: f64,
    pub max_abs_lateral_offset: f64,
    pub max_abs_heading_error: f64,
    /// Smallest boundary distance at the final executed ego state.
    pub final_boundary_clearance: Option<f64>,
    pub total_iterations: usize,
    pub all_feasible: bool,
    pub all_converged: bool,
    pub solve_time_ms_mean: f64,
    pub solve_time_ms_max: f64,
}

fn fold_max_abs(values: impl Iterator<Item = f64>, init: f64) -> f64 {
    values.fold(init, |m, v| m.max(v.abs()))
}

pub fn summarize(logs: &[CycleLog]) -> RunSummary {
    let mut summary = RunSummary {
        cycles: logs.len(),
        min_obstacle_distance: None,
        min_boundary_distance: None,
        max_abs_lateral_accel: 0.0,
        max_abs_lateral_jerk: 0.0,
        max_abs_lateral_offset: 0.0,
        max_abs_heading_error: 0.0,
        final_boundary_clearance: None,
        total_iterations: 0,
        all_feasible: true,
        all_converged: true,
        solve_time_ms_mean: 0.0,
        solve_time_ms_max: 0.0,
    };
    let mut time_total = 0.0_f64;
    for log in logs {
        let m = &log.metrics;
        for row in &m.obstacle_distances {
            for &d in row {
                summary.min_obstacle_distance =
                    Some(summary.min_obstacle_distance.map_or(d, |x| x.min(d)));
            }
        }
        for row in &m.boundary_distances {
            for &d in row {
                summary.min_boundary_distance =
                    Some(summary.min_boundary_distance.map_or(d, |x| x.min(d)));
            }
        }
        summary.max_abs_lateral_accel =
            fold_max_abs(m.a_y.iter().copied(), summary.max_abs_lateral_accel);
        summary.max_abs_lateral_jerk =
            fold_max_abs(m.j_y.iter().copied(), summary.max_abs_lateral_jerk);
        summary.max_abs_lateral_offset =
            fold_max_abs(m.lat_offset.iter().copied(), summary.max_abs_lateral_offset);
        summary.max_abs_heading_error =
            fold_max_abs(m.heading_err.iter().copied(), summary.max_abs_heading_error);
        summary.total_iterations += log.diagnostics.iterations;
        summary.all_feasible &= log.diagnostics.feasible;
        summary.all_converged &= log.diagnostics.converged;
        let ms = log.diagnostics.wall_time_s * 1e3;
        time_total += ms;
        summary.solve_time_ms_max = summary.solve_time_ms_max.max(ms);
    }
    if let Some(last) = logs.last() {
        let k = last.executed_steps.min(last.trajectory.horizon());
        summary.final_boundary_clearance = last
            .metrics
            .boundary_distances
            .iter()
            .map(|row| row[k])
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |x| x.min(d)))
            });
    }
    if !logs.is_empty() {
        summary.solve_time_ms_mean = time_total / logs.len() as f64;
    }
    summary
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

/// Write one CSV per cycle plus `summary.txt`; returns the summary.
pub fn emit_metrics(
    logs: &[CycleLog],
    scenario: &Scenario,
    out_dir: impl AsRef<Path>,
) -> std::io::Result<RunSummary> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;

    let boundary_labels: Vec<String> = scenario
        .boundaries()
        .into_iter()
        .filter(|b| !b.crossable)
        .enumerate()
        .map(|(i, _)| format!("dist_boundary_{i}"))
        .collect();
    let obstacle_labels: Vec<String> = scenario
        .obstacles
        .iter()
        .map(|o| format!("dist_{}", sanitize(&o.name)))
        .collect();

    for log in logs {
        let mut file = fs::File::create(out_dir.join(format!("cycle_{:03}.csv", log.cycle)))?;
        let mut header =
            String::from("step,t,x,y,v,a,j,theta,kappa,kappa_dot,a_y,j_y,heading_err,lat_offset");
        for label in &obstacle_labels {
            header.push(',');
            header.push_str(label);
        }
        for label in &boundary_labels {
            header.push(',');
            header.push_str(label);
        }
        writeln!(file, "{header}")?;

        let traj = &log.trajectory;
        let m = &log.metrics;
        let n = traj.horizon();
        for k in 0..=n {
            let s = &traj.states[k];
            let t = log.start_time + k as f64 * traj.dt;
            // The last row repeats the final action's jerk so every row has
            // the full column set.
            let j = m.j[k.min(n.saturating_sub(1))];
            let mut row = format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                k,
                t,
                s.x,
                s.y,
                m.v[k],
                m.a[k],
                j,
                s.theta,
                m.kappa[k],
                m.kappa_dot[k],
                m.a_y[k],
                m.j_y[k],
                m.heading_err[k],
                m.lat_offset[k]
            );
            for row_d in &m.obstacle_distances {
                row.push_str(&format!(",{}", row_d[k]));
            }
            for row_d in &m.boundary_distances {
                row.push_str(&format!(",{}", row_d[k]));
            }
            writeln!(file, "{row}")?;
        }
    }

    let summary = summarize(logs);
    let mut file = fs::File::create(out_dir.join("summary.txt"))?;
    writeln!(file, "scenario = {}", scenario.name)?;
    writeln!(file, "cycles = {}", summary.cycles)?;
    if let Some(d) = summary.min_obstacle_distance {
        writeln!(file, "min_obstacle_distance = {d}")?;
    }
    if let Some(d) = summary.min_boundary_distance {
        writeln!(file, "min_boundary_distance = {d}")?;
    }
    writeln!(
        file,
        "max_abs_lateral_accel = {}",
        summary.max_abs_lateral_accel
    )?;
    writeln!(
        file,
        "max_abs_lateral_jerk = {}",
        summary.max_abs_lateral_jerk
    )?;
    writeln!(
        file,
        "max_abs_lateral_offset = {}",
        summary.max_abs_lateral_offset
    )?;
    writeln!(
        file,
        "max_abs_heading_error = {}",
        summary.max_abs_heading_error
    )?;
    if let Some(d) = summary.final_boundary_clearance {
        writeln!(file, "final_boundary_clearance = {d}")?;
    }
    writeln!(file, "total_iterations = {}", summary.total_iterations)?;
    writeln!(file, "all_feasible = {}", summary.all_feasible)?;
    writeln!(file, "all_converged = {}", summary.all_converged)?;
    writeln!(file, "# timing varies between runs")?;
    writeln!(file, "solve_time_ms_mean = {}", summary.solve_time_ms_mean)?;
    writeln!(file, "solve_time_ms_max = {}", summary.solve_time_ms_max)?;

    Ok(summary)
}

/// Plain-text trajectory dump; reloads bit-identically for finite values.
pub fn write_trajectory(path: impl AsRef<Path>, traj: &Trajectory) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "dt = {}", traj.dt)?;
    writeln!(file, "states = {}", traj.states.len())?;
    for s in &traj.states {
        writeln!(
            file,
            "{} {} {} {} {} {} {}",
            s.x, s.y, s.v, s.theta, s.a, s.kappa, s.kappa_dot
        )?;
    }
    writeln!(file, "actions = {}", traj.actions.len())?;
    for u in &traj.actions {
        writeln!(file, "{} {}", u.j, u.kappa_ddot)?;
    }
    Ok(())
}

pub fn read_trajectory(path: impl AsRef<Path>) -> std::io::Result<Trajectory> {
    let text = fs::read_to_string(path)?;
    let bad = |msg: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string());
    let mut lines = text.lines();

    let dt_line = lines.next().ok_or_else(|| bad("missing dt line"))?;
    let dt: f64 = dt_line
        .strip_prefix("dt = ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("malformed dt line"))?;

    let count_line = lines.next().ok_or_else(|| bad("missing states line"))?;
    let n_states: usize = count_line
        .strip_prefix("states = ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("malformed states line"))?;
    let mut states = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let line = lines.next().ok_or_else(|| bad("truncated state rows"))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("malformed state row"))?;
        if vals.len() != 7 {
            return Err(bad("state row needs 7 values"));
        }
        states.push(VehicleState {
            x: vals[0],
            y: vals[1],
            v: vals[2],
            theta: vals[3],
            a: vals[4],
            kappa: vals[5],
            kappa_dot: vals[6],
        });
    }

    let count_line = lines.next().ok_or_else(|| bad("missing actions line"))?;
    let n_actions: usize = count_line
        .strip_prefix("actions = ")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("malformed actions line"))?;
    let mut actions = Vec::with_capacity(n_actions);
    for _ in 0..n_actions {
        let line = lines.next().ok_or_else(|| bad("truncated action rows"))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("malformed action row"))?;
        if vals.len() != 2 {
            return Err(bad("action row needs 2 values"));
        }
        actions.push(VehicleAction {
            j: vals[0],
            kappa_ddot: vals[1],
        });
    }

    Trajectory::new(states, actions, dt)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}
