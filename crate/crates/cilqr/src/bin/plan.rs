//! Receding-horizon planner CLI.
//!
//! Usage:
//!
//! ```text
//! plan --scenario <path> [--cycles K] [--replan-period P] [--out DIR]
//!      [--max-iter N] [--line-search golden|backtracking]
//!      [--seed-nominal straight|previous] [--dump-iterates]
//! ```
//!
//! Exit codes: 0 success, 1 usage, 2 scenario error, 3 solver error, 4 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use cilqr::harness::{
    emit_metrics, load_scenario, run_receding_horizon, write_trajectory, SeedMode,
};
use cilqr::types::LineSearchKind;

struct Args {
    scenario: PathBuf,
    cycles: Option<usize>,
    replan_period: usize,
    out: PathBuf,
    max_iter: Option<usize>,
    line_search: Option<LineSearchKind>,
    seed: SeedMode,
    dump_iterates: bool,
}

const USAGE: &str = "usage: plan --scenario <path> [--cycles K] [--replan-period P] [--out DIR] \
[--max-iter N] [--line-search golden|backtracking] [--seed-nominal straight|previous] [--dump-iterates]";

fn parse_args() -> Result<Args, String> {
    let mut scenario = None;
    let mut cycles = None;
    let mut replan_period = 1;
    let mut out = PathBuf::from("out");
    let mut max_iter = None;
    let mut line_search = None;
    let mut seed = SeedMode::Previous;
    let mut dump_iterates = false;

    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        let mut value = |name: &str| {
            args.next()
                .ok_or_else(|| format!("missing value for {name}"))
        };
        match arg.as_str() {
            "--scenario" => scenario = Some(PathBuf::from(value("--scenario")?)),
            "--cycles" => {
                cycles = Some(
                    value("--cycles")?
                        .parse()
                        .map_err(|_| "--cycles expects a positive integer".to_string())?,
                )
            }
            "--replan-period" => {
                replan_period = value("--replan-period")?
                    .parse()
                    .map_err(|_| "--replan-period expects a positive integer".to_string())?;
                if replan_period == 0 {
                    return Err("--replan-period must be >= 1".to_string());
                }
            }
            "--out" => out = PathBuf::from(value("--out")?),
            "--max-iter" => {
                max_iter = Some(
                    value("--max-iter")?
                        .parse()
                        .map_err(|_| "--max-iter expects a positive integer".to_string())?,
                )
            }
            "--line-search" => {
                line_search = Some(match value("--line-search")?.as_str() {
                    "golden" | "golden_section" => LineSearchKind::GoldenSection,
                    "backtracking" => LineSearchKind::Backtracking,
                    other => return Err(format!("unknown line search '{other}'")),
                })
            }
            "--seed-nominal" => {
                seed = match value("--seed-nominal")?.as_str() {
                    "straight" => SeedMode::Straight,
                    "previous" => SeedMode::Previous,
                    other => return Err(format!("unknown seed mode '{other}'")),
                }
            }
            "--dump-iterates" => dump_iterates = true,
            "--help" | "-h" => return Err(String::new()),
            other => return Err(format!("unknown argument '{other}'")),
        }
    }

    Ok(Args {
        scenario: scenario.ok_or_else(|| "--scenario is required".to_string())?,
        cycles,
        replan_period,
        out,
        max_iter,
        line_search,
        seed,
        dump_iterates,
    })
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(args) => args,
        Err(message) => {
            if !message.is_empty() {
                eprintln!("error: {message}");
            }
            eprintln!("{USAGE}");
            return ExitCode::from(1);
        }
    };

    let mut scenario = match load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("scenario error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(max_iter) = args.max_iter {
        scenario.solver.max_iterations = max_iter;
    }
    if let Some(kind) = args.line_search {
        scenario.solver.line_search = kind;
    }
    let cycles = args.cycles.unwrap_or(scenario.default_cycles);

    println!(
        "planning '{}': {} cycles, horizon {} x {} s, replan every {} step(s)",
        scenario.name, cycles, scenario.horizon, scenario.dt, args.replan_period
    );

    let outcome = run_receding_horizon(&scenario, cycles, args.replan_period, args.seed);

    let summary = match emit_metrics(&outcome.logs, &scenario, &args.out) {
        Ok(summary) => summary,
        Err(e) => {
            eprintln!("failed to write metrics: {e}");
            return ExitCode::from(4);
        }
    };

    if args.dump_iterates {
        for log in &outcome.logs {
            let path = args
                .out
                .join(format!("cycle_{:03}_iterates.csv", log.cycle));
            let mut text = String::from("iteration,cost,alpha\n");
            for (i, cost) in log.diagnostics.cost_history.iter().enumerate() {
                let alpha = if i == 0 {
                    String::new()
                } else {
                    format!("{}", log.diagnostics.alpha_history[i - 1])
                };
                text.push_str(&format!("{i},{cost},{alpha}\n"));
            }
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("failed to write {}: {e}", path.display());
                return ExitCode::from(4);
            }
            let traj_path = args.out.join(format!("cycle_{:03}_plan.traj", log.cycle));
            if let Err(e) = write_trajectory(&traj_path, &log.trajectory) {
                eprintln!("failed to write {}: {e}", traj_path.display());
                return ExitCode::from(4);
            }
        }
    }

    println!(
        "{} cycle(s) planned, {} iterations total, mean solve {:.1} ms",
        summary.cycles, summary.total_iterations, summary.solve_time_ms_mean
    );
    if let Some(d) = summary.min_obstacle_distance {
        println!("min obstacle distance: {d:.3} m");
    }
    if let Some(d) = summary.min_boundary_distance {
        println!("min boundary distance: {d:.3} m");
    }
    println!(
        "max |a_y| {:.3} m/s^2, max |j_y| {:.3} m/s^3, max |lat offset| {:.3} m",
        summary.max_abs_lateral_accel, summary.max_abs_lateral_jerk, summary.max_abs_lateral_offset
    );
    println!("metrics written to {}", args.out.display());

    if let Some((cycle, e)) = outcome.error {
        eprintln!("solver error at cycle {cycle}: {e}");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
