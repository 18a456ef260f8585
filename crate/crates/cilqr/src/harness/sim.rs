//! Nominal-trajectory synthesis and the receding-horizon loop.
//!
//! Execution is perfect tracking: after each solve the ego state jumps to the
//! planned state `replan_period` steps ahead, obstacles advance by the same
//! amount of time, and the next cycle replans from there.

use nalgebra::Point2;

use crate::barrier::BarrierParams;
use crate::constraints::{
    augment, collision_constraints, kinematic_constraints, lane_boundary_constraints,
    AugmentedObjective, ConstraintSet, ObstaclePrediction,
};
use crate::cost::{CostModel, ReferencePoint, ReferenceProfile};
use crate::geometry::{box_footprint, box_to_box_distance, box_to_polyline_distance, Polyline};
use crate::solver::{solve, SolveDiagnostics, SolverError};
use crate::types::{normalize_angle, Trajectory, VehicleAction, VehicleState};
use crate::vehicle_model::{
    lateral_quantities, rollout, steer_domain_to_curvature_domain, Dynamics, KinematicModel,
    ModelError,
};

use super::scenario::Scenario;

/// How the nominal trajectory is seeded each cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// Fresh centerline-following rollout every cycle.
    Straight,
    /// Shifted previous solution (first cycle falls back to Straight).
    Previous,
}

/// Per-point metrics for one planned trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleMetrics {
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    /// Longitudinal jerk per action, length N.
    pub j: Vec<f64>,
    pub a_y: Vec<f64>,
    pub j_y: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_dot: Vec<f64>,
    pub heading_err: Vec<f64>,
    pub lat_offset: Vec<f64>,
    /// One row per obstacle, one column per trajectory point.
    pub obstacle_distances: Vec<Vec<f64>>,
    /// One row per non-crossable boundary, one column per trajectory point.
    pub boundary_distances: Vec<Vec<f64>>,
}

/// Everything recorded about one planning cycle.
#[derive(Debug, Clone)]
pub struct CycleLog {
    pub cycle: usize,
    pub start_time: f64,
    /// Steps of the plan executed before the next replan.
    pub executed_steps: usize,
    pub trajectory: Trajectory,
    pub metrics: CycleMetrics,
    pub diagnostics: SolveDiagnostics,
}

/// Logs plus the error that halted the run, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub logs: Vec<CycleLog>,
    pub error: Option<(usize, SolverError)>,
}

// Path-following gains for the nominal synthesizer. The outer gains are
// normalized by speed so the closed-loop lateral poles stay put: the path
// response scales with v^2 (offset) and v (heading).
const GAIN_OFFSET: f64 = 3.0;
const GAIN_HEADING: f64 = 3.5;
const GAIN_KAPPA: f64 = 25.0;
const GAIN_KAPPA_DOT: f64 = 10.0;

/// Build a nominal trajectory for one planning cycle.
///
/// With a previous solution, its actions are shifted by `shift` steps, padded
/// by repeating the last action, and re-rolled from `start`. Otherwise a
/// constant-speed centerline-following rollout is generated; either way the
/// result is dynamically consistent by construction.
pub fn synthesize_nominal(
    scenario: &Scenario,
    model: &KinematicModel,
    start: &VehicleState,
    previous: Option<&Trajectory>,
    shift: usize,
) -> Result<Trajectory, ModelError> {
    let n = scenario.horizon;
    if let Some(prev) = previous {
        let mut actions: Vec<VehicleAction> = prev.actions.iter().skip(shift).copied().collect();
        let pad = *prev.actions.last().expect("previous plan has actions");
        while actions.len() < n {
            actions.push(pad);
        }
        actions.truncate(n);
        return rollout(model, *start, &actions, scenario.dt);
    }

    let centerline = &scenario.lanes[0].centerline;
    let limits = steer_domain_to_curvature_domain(&scenario.vehicle, 0.0)?;
    let kappa_cmd_cap = 0.8 * limits.kappa_max;
    let kappa_ddot_cap = 0.8 * limits.kappa_ddot_max;

    let mut states = Vec::with_capacity(n + 1);
    let mut actions = Vec::with_capacity(n);
    states.push(*start);
    for k in 0..n {
        let s = &states[k];
        let proj = centerline.project(Point2::new(s.x, s.y));
        let heading_err = normalize_angle(s.theta - proj.tangent);
        let speed = s.v.abs().max(1.0);
        let kappa_cmd = (-(GAIN_OFFSET * proj.signed_offset / speed + GAIN_HEADING * heading_err)
            / speed)
            .clamp(-kappa_cmd_cap, kappa_cmd_cap);
        let kappa_ddot = (GAIN_KAPPA * (kappa_cmd - s.kappa) - GAIN_KAPPA_DOT * s.kappa_dot)
            .clamp(-kappa_ddot_cap, kappa_ddot_cap);
        let action = VehicleAction { j: 0.0, kappa_ddot };
        let next = model.step(s, &action, scenario.dt)?;
        states.push(next);
        actions.push(action);
    }
    Ok(Trajectory {
        states,
        actions,
        dt: scenario.dt,
    })
}

/// Tracking references for the current nominal: each state is projected onto
/// the centerline; tangents are unwrapped along the profile.
fn build_references(scenario: &Scenario, nominal: &Trajectory) -> ReferenceProfile {
    let centerline = &scenario.lanes[0].centerline;
    let mut points = Vec::with_capacity(nominal.states.len());
    let mut prev_theta = nominal.states[0].theta;
    for s in &nominal.states {
        let proj = centerline.project(Point2::new(s.x, s.y));
        let mut theta_ref = proj.tangent;
        while theta_ref - prev_theta > std::f64::consts::PI {
            theta_ref -= 2.0 * std::f64::consts::PI;
        }
        while theta_ref - prev_theta < -std::f64::consts::PI {
            theta_ref += 2.0 * std::f64::consts::PI;
        }
        prev_theta = theta_ref;
        points.push(ReferencePoint {
            v_ref: scenario.target_speed,
            ref_point: proj.point,
            theta_ref,
        });
    }
    ReferenceProfile { points }
}

/// Assemble the barrier-augmented objective for one solver iteration.
fn build_objective(
    scenario: &Scenario,
    boundaries: &[Polyline],
    predictions: &[ObstaclePrediction],
    nominal: &Trajectory,
) -> AugmentedObjective {
    let cfg = &scenario.solver;
    let kin_barrier = BarrierParams::new(cfg.barrier_t, cfg.barrier_k, cfg.epsilon.kinematic)
        .expect("config validated at scenario load");
    let lane_barrier = BarrierParams::new(cfg.barrier_t, cfg.barrier_k, cfg.epsilon.lane_boundary)
        .expect("config validated at scenario load");
    let col_barrier = BarrierParams::new(cfg.barrier_t, cfg.barrier_k, cfg.epsilon.collision)
        .expect("config validated at scenario load");

    let mut set = ConstraintSet::empty();
    set.terminal_index = scenario.horizon;
    set.constraints.extend(
        kinematic_constraints(&scenario.vehicle, nominal, kin_barrier)
            .expect("steer geometry validated at scenario load"),
    );
    let (hard, soft) = lane_boundary_constraints(
        boundaries,
        &scenario.vehicle,
        scenario.limits.boundary_d_min,
        scenario.limits.boundary_d_soft,
        lane_barrier,
        scenario.weights.boundary_soft,
    );
    set.constraints.extend(hard);
    set.soft_terms.extend(soft);
    set.constraints.extend(
        collision_constraints(
            predictions,
            &scenario.vehicle,
            scenario.limits.collision_d_min,
            scenario.horizon,
            col_barrier,
        )
        .expect("prediction lengths match the horizon by construction"),
    );

    let refs = build_references(scenario, nominal);
    augment(CostModel::new(scenario.weights, refs), set)
}

fn compute_metrics(
    scenario: &Scenario,
    boundaries: &[Polyline],
    predictions: &[ObstaclePrediction],
    traj: &Trajectory,
) -> CycleMetrics {
    let centerline = &scenario.lanes[0].centerline;
    let n_points = traj.states.len();
    let mut metrics = CycleMetrics {
        v: Vec::with_capacity(n_points),
        a: Vec::with_capacity(n_points),
        j: traj.actions.iter().map(|u| u.j).collect(),
        a_y: Vec::with_capacity(n_points),
        j_y: Vec::with_capacity(n_points),
        kappa: Vec::with_capacity(n_points),
        kappa_dot: Vec::with_capacity(n_points),
        heading_err: Vec::with_capacity(n_points),
        lat_offset: Vec::with_capacity(n_points),
        obstacle_distances: vec![Vec::with_capacity(n_points); predictions.len()],
        boundary_distances: vec![Vec::with_capacity(n_points); boundaries.len()],
    };
    for (k, s) in traj.states.iter().enumerate() {
        let (a_y, j_y) = lateral_quantities(s);
        let proj = centerline.project(Point2::new(s.x, s.y));
        metrics.v.push(s.v);
        metrics.a.push(s.a);
        metrics.a_y.push(a_y);
        metrics.j_y.push(j_y);
        metrics.kappa.push(s.kappa);
        metrics.kappa_dot.push(s.kappa_dot);
        metrics
            .heading_err
            .push(normalize_angle(s.theta - proj.tangent));
        metrics.lat_offset.push(proj.signed_offset);

        let footprint = box_footprint(s, &scenario.vehicle);
        for (o, pred) in predictions.iter().enumerate() {
            metrics.obstacle_distances[o].push(box_to_box_distance(
                &footprint,
                &pred.boxes[k.min(pred.boxes.len() - 1)],
            ));
        }
        for (b, boundary) in boundaries.iter().enumerate() {
            metrics.boundary_distances[b].push(box_to_polyline_distance(&footprint, boundary));
        }
    }
    metrics
}

/// Plan, execute `replan_period` steps, advance obstacles, repeat.
///
/// Solver failures halt the simulation; everything logged up to that point is
/// returned alongside the error.
pub fn run_receding_horizon(
    scenario: &Scenario,
    cycles: usize,
    replan_period: usize,
    seed: SeedMode,
) -> RunOutcome {
    let model = KinematicModel;
    let n = scenario.horizon;
    let replan = replan_period.clamp(1, n);
    let boundaries: Vec<Polyline> = scenario
        .boundaries()
        .into_iter()
        .filter(|b| !b.crossable)
        .cloned()
        .collect();

    let mut logs: Vec<CycleLog> = Vec::with_capacity(cycles);
    let mut ego = scenario.initial_state;
    let mut previous: Option<Trajectory> = None;

    for cycle in 0..cycles {
        let t0 = (cycle * replan) as f64 * scenario.dt;
        let predictions: Vec<ObstaclePrediction> = scenario
            .obstacles
            .iter()
            .map(|o| o.prediction(t0, n, scenario.dt))
            .collect();

        let seed_prev = match seed {
            SeedMode::Previous => previous.as_ref(),
            SeedMode::Straight => None,
        };
        let nominal = match synthesize_nominal(scenario, &model, &ego, seed_prev, replan) {
            Ok(t) => t,
            Err(e) => {
                return RunOutcome {
                    logs,
                    error: Some((cycle, SolverError::Model(e))),
                }
            }
        };

        let objective_for =
            |nominal: &Trajectory| build_objective(scenario, &boundaries, &predictions, nominal);
        match solve(nominal, &model, objective_for, &scenario.solver) {
            Ok((traj, diagnostics)) => {
                let metrics = compute_metrics(scenario, &boundaries, &predictions, &traj);
                ego = traj.states[replan];
                previous = Some(traj.clone());
                logs.push(CycleLog {
                    cycle,
                    start_time: t0,
                    executed_steps: replan,
                    trajectory: traj,
                    metrics,
                    diagnostics,
                });
            }
            Err(e) => {
                return RunOutcome {
                    logs,
                    error: Some((cycle, e)),
                }
            }
        }
    }
    RunOutcome { logs, error: None }
}
