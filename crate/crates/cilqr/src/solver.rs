//! The constrained iterative-LQR engine.
//!
//! Each outer iteration rebuilds the barrier-augmented objective around the
//! current nominal trajectory, runs a value-function backward pass for
//! open-loop and feedback action updates, line-searches the step size on the
//! true rolled-out cost, and accepts the improved trajectory. Iteration stops
//! when the relative cost drop falls below the configured threshold.

use std::fmt;
use std::time::Instant;

use crate::cost::{CostDerivatives, StageObjective, TerminalDerivatives};
use crate::types::{
    is_dynamically_consistent, ActionMatrix, ActionVector, GainMatrix, LineSearchKind,
    SolverConfig, SpecError, StateMatrix, Trajectory, TrajectoryError, VehicleAction,
};
use crate::vehicle_model::{Dynamics, Linearization, ModelError};

/// Regularization ceiling for the escalation inside [`solve`].
const MAX_REGULARIZATION: f64 = 1e-2;
/// Golden-section bracket width at which the search stops.
const GOLDEN_TOL: f64 = 1e-3;
const BACKTRACKING_TRIALS: usize = 30;

#[derive(Debug)]
pub enum SolverError {
    /// The action-block Hessian failed its positive-definiteness check.
    NotPositiveDefinite {
        step: usize,
    },
    NonFiniteCost {
        context: String,
    },
    InvalidAlpha(f64),
    LengthMismatch {
        linearizations: usize,
        cost_derivatives: usize,
    },
    EmptyHorizon,
    /// The nominal trajectory does not satisfy the dynamics.
    InconsistentNominal,
    InvalidConfig(SpecError),
    Model(ModelError),
    Structure(TrajectoryError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotPositiveDefinite { step } => write!(
                f,
                "action Hessian not positive definite at step {step}; larger regularization needed"
            ),
            Self::NonFiniteCost { context } => write!(f, "non-finite cost: {context}"),
            Self::InvalidAlpha(a) => write!(f, "step size must lie in (0, 1], got {a}"),
            Self::LengthMismatch {
                linearizations,
                cost_derivatives,
            } => write!(
                f,
                "derivative arrays disagree: {linearizations} linearizations vs {cost_derivatives} cost derivatives"
            ),
            Self::EmptyHorizon => write!(f, "trajectory has no actions to optimize"),
            Self::InconsistentNominal => {
                write!(f, "nominal trajectory is not dynamically consistent")
            }
            Self::InvalidConfig(e) => write!(f, "invalid solver config: {e}"),
            Self::Model(e) => write!(f, "{e}"),
            Self::Structure(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<ModelError> for SolverError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

/// Open-loop and feedback action updates from one backward pass.
#[derive(Debug, Clone)]
pub struct BackwardPassResult {
    /// q_k, the open-loop action increment per step.
    pub open_loop: Vec<ActionVector>,
    /// Q_k, the feedback gain on the state deviation per step.
    pub feedback: Vec<GainMatrix>,
    /// Predicted cost change per step (nonpositive).
    pub expected_decrease: Vec<f64>,
}

impl BackwardPassResult {
    pub fn total_expected_decrease(&self) -> f64 {
        self.expected_decrease.iter().sum()
    }
}

/// Inverse of a symmetric 2x2 matrix, or None if it is not positive definite.
fn invert_pd_2x2(m: &ActionMatrix) -> Option<ActionMatrix> {
    let a = m[(0, 0)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let d = m[(1, 1)];
    let det = a * d - b * b;
    if !(a > 0.0 && det > 0.0 && det.is_finite()) {
        return None;
    }
    Some(ActionMatrix::new(d, -b, -b, a) / det)
}

/// Value-function recursion over the horizon.
///
/// Starting from the terminal cost derivatives, each step forms the local
/// quadratic expansion of the cost-to-go (dynamics second derivatives
/// dropped), regularizes the inherited value Hessian before building the
/// action block, and emits the minimizing open-loop and feedback updates.
pub fn backward_pass(
    linearizations: &[Linearization],
    cost_derivatives: &[CostDerivatives],
    terminal: &TerminalDerivatives,
    regularization: f64,
) -> Result<BackwardPassResult, SolverError> {
    let n = linearizations.len();
    if n != cost_derivatives.len() {
        return Err(SolverError::LengthMismatch {
            linearizations: n,
            cost_derivatives: cost_derivatives.len(),
        });
    }
    if n == 0 {
        return Err(SolverError::EmptyHorizon);
    }

    let mut v_x = terminal.l_x;
    let mut v_xx = terminal.l_xx;
    let mut open_loop = vec![ActionVector::zeros(); n];
    let mut feedback = vec![GainMatrix::zeros(); n];
    let mut expected_decrease = vec![0.0; n];

    for k in (0..n).rev() {
        let lin = &linearizations[k];
        let cd = &cost_derivatives[k];
        let fx_t = lin.f_x.transpose();
        let fu_t = lin.f_u.transpose();
        let v_xx_reg = v_xx + StateMatrix::identity() * regularization;

        let p_x = cd.l_x + fx_t * v_x;
        let p_u = cd.l_u + fu_t * v_x;
        let p_xx = cd.l_xx + fx_t * v_xx * lin.f_x;
        let p_uu = cd.l_uu + fu_t * v_xx_reg * lin.f_u;
        let p_ux = cd.l_ux + fu_t * v_xx * lin.f_x;

        let p_uu_inv = invert_pd_2x2(&p_uu).ok_or(SolverError::NotPositiveDefinite { step: k })?;
        let q = -p_uu_inv * p_u;
        let gain = -p_uu_inv * p_ux;

        expected_decrease[k] = 0.5 * p_u.dot(&q);
        v_x = p_x + p_ux.transpose() * q;
        v_xx = p_xx + p_ux.transpose() * gain;
        v_xx = 0.5 * (v_xx + v_xx.transpose());

        open_loop[k] = q;
        feedback[k] = gain;
    }

    Ok(BackwardPassResult {
        open_loop,
        feedback,
        expected_decrease,
    })
}

/// Roll the updated actions through the true dynamics:
/// `u_k = u~_k + alpha (q_k + Q_k (x_k - x~_k))`, `x_{k+1} = f(x_k, u_k)`.
/// The result is dynamically consistent by construction.
pub fn forward_pass<M: Dynamics>(
    traj: &Trajectory,
    bp: &BackwardPassResult,
    alpha: f64,
    model: &M,
) -> Result<Trajectory, SolverError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SolverError::InvalidAlpha(alpha));
    }
    let n = traj.horizon();
    if bp.open_loop.len() != n {
        return Err(SolverError::LengthMismatch {
            linearizations: bp.open_loop.len(),
            cost_derivatives: n,
        });
    }

    let mut states = Vec::with_capacity(n + 1);
    let mut actions = Vec::with_capacity(n);
    states.push(traj.states[0]);
    for k in 0..n {
        let dx = states[k].to_vector() - traj.states[k].to_vector();
        let du = alpha * (bp.open_loop[k] + bp.feedback[k] * dx);
        let action = VehicleAction::from_vector(&(traj.actions[k].to_vector() + du));
        let next = model.step(&states[k], &action, traj.dt)?;
        actions.push(action);
        states.push(next);
    }
    Ok(Trajectory {
        states,
        actions,
        dt: traj.dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub objective: f64,
    /// False when no evaluated step size beat the baseline cost.
    pub improved: bool,
}

/// Pick a step size in (0, 1] minimizing `objective`.
///
/// Golden section shrinks the bracket until its width is below 1e-3 and
/// returns the best evaluated point. Backtracking starts at 1 and multiplies
/// by the configured ratio until the objective beats `baseline` or the trial
/// budget is exhausted, returning the best found either way.
pub fn line_search(
    mut objective: impl FnMut(f64) -> f64,
    baseline: f64,
    kind: LineSearchKind,
    backtracking_ratio: f64,
) -> LineSearchResult {
    let mut best_alpha = f64::NAN;
    let mut best_value = f64::INFINITY;
    let consider = |alpha: f64, value: f64, best_alpha: &mut f64, best_value: &mut f64| {
        if value < *best_value || best_alpha.is_nan() {
            *best_alpha = alpha;
            *best_value = value;
        }
    };

    match kind {
        LineSearchKind::GoldenSection => {
            let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
            let mut lo = 0.0_f64;
            let mut hi = 1.0_f64;
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            let mut f1 = objective(x1);
            let mut f2 = objective(x2);
            consider(x1, f1, &mut best_alpha, &mut best_value);
            consider(x2, f2, &mut best_alpha, &mut best_value);
            while hi - lo > GOLDEN_TOL {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = objective(x1);
                    consider(x1, f1, &mut best_alpha, &mut best_value);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = objective(x2);
                    consider(x2, f2, &mut best_alpha, &mut best_value);
                }
            }
        }
        LineSearchKind::Backtracking => {
            let mut alpha = 1.0;
            for _ in 0..BACKTRACKING_TRIALS {
                let value = objective(alpha);
                consider(alpha, value, &mut best_alpha, &mut best_value);
                if value < baseline {
                    break;
                }
                alpha *= backtracking_ratio;
            }
        }
    }

    LineSearchResult {
        alpha: best_alpha,
        objective: best_value,
        improved: best_value < baseline,
    }
}

/// Run diagnostics for one solve.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// Total augmented cost per accepted iterate, starting with the nominal.
    pub cost_history: Vec<f64>,
    pub alpha_history: Vec<f64>,
    pub converged: bool,
    /// Exact constraint recheck of the returned trajectory, no barriers.
    pub feasible: bool,
    pub wall_time_s: f64,
    pub time_derivatives_s: f64,
    pub time_backward_s: f64,
    pub time_line_search_s: f64,
}

/// Optimize the nominal trajectory.
///
/// `objective_for` is invoked once per outer iteration with the current
/// nominal; it returns the augmented objective for that iteration (reference
/// matching and state-dependent constraint bounds frozen at that nominal).
pub fn solve<M, O, F>(
    nominal: Trajectory,
    model: &M,
    objective_for: F,
    config: &SolverConfig,
) -> Result<(Trajectory, SolveDiagnostics), SolverError>
where
    M: Dynamics,
    O: StageObjective,
    F: Fn(&Trajectory) -> O,
{
    config.validate().map_err(SolverError::InvalidConfig)?;
    if nominal.horizon() == 0 {
        return Err(SolverError::EmptyHorizon);
    }
    match is_dynamically_consistent(&nominal, model, 1e-6) {
        Ok(true) => {}
        Ok(false) => return Err(SolverError::InconsistentNominal),
        Err(e) => return Err(SolverError::Structure(e)),
    }

    let start = Instant::now();
    let mut traj = nominal;
    let mut cost_history = Vec::new();
    let mut alpha_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut time_derivatives = 0.0;
    let mut time_backward = 0.0;
    let mut time_line_search = 0.0;

    while iterations < config.max_iterations {
        let objective = objective_for(&traj);
        let baseline = objective.total_cost(&traj);
        if !baseline.is_finite() {
            let context = objective
                .describe_non_finite(&traj)
                .unwrap_or_else(|| "total cost".to_string());
            return Err(SolverError::NonFiniteCost { context });
        }
        if cost_history.is_empty() {
            cost_history.push(baseline);
        }

        let t0 = Instant::now();
        let n = traj.horizon();
        let mut linearizations = Vec::with_capacity(n);
        let mut cost_derivatives = Vec::with_capacity(n);
        for k in 0..n {
            linearizations.push(model.linearize(&traj.states[k], &traj.actions[k], traj.dt)?);
            cost_derivatives.push(objective.stage_derivatives(
                k,
                &traj.states[k],
                &traj.actions[k],
            ));
        }
        let terminal = objective.terminal_derivatives(traj.states.last().expect("non-empty"));
        time_derivatives += t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let mut reg = config.regularization;
        let bp = loop {
            match backward_pass(&linearizations, &cost_derivatives, &terminal, reg) {
                Ok(bp) => break bp,
                Err(SolverError::NotPositiveDefinite { step }) => {
                    if reg >= MAX_REGULARIZATION {
                        return Err(SolverError::NotPositiveDefinite { step });
                    }
                    reg = (reg * 10.0).min(MAX_REGULARIZATION);
                }
                Err(e) => return Err(e),
            }
        };
        time_backward += t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let rollout_cost = |alpha: f64| match forward_pass(&traj, &bp, alpha, model) {
            Ok(candidate) => {
                let c = objective.total_cost(&candidate);
                if c.is_finite() {
                    c
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        };
        let ls = line_search(
            rollout_cost,
            baseline,
            config.line_search,
            config.backtracking_ratio,
        );
        time_line_search += t0.elapsed().as_secs_f64();

        iterations += 1;
        if !ls.improved {
            // Stationary: nothing beats the current nominal.
            converged = true;
            break;
        }

        traj = forward_pass(&traj, &bp, ls.alpha, model)?;
        alpha_history.push(ls.alpha);
        cost_history.push(ls.objective);

        let rel_drop = (baseline - ls.objective) / baseline.abs().max(1e-12);
        if rel_drop < config.convergence_rel_tol {
            converged = true;
            break;
        }
    }

    let feasible = objective_for(&traj).exact_feasible(&traj);
    let diagnostics = SolveDiagnostics {
        iterations,
        cost_history,
        alpha_history,
        converged,
        feasible,
        wall_time_s: start.elapsed().as_secs_f64(),
        time_derivatives_s: time_derivatives,
        time_backward_s: time_backward,
        time_line_search_s: time_line_search,
    };
    Ok((traj, diagnostics))
}
