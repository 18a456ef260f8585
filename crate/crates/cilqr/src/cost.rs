//! Step and terminal costs with analytic first and second derivatives.
//!
//! All terms are quadratic either in a raw state/action component or in a
//! smooth composite of states (lateral acceleration, lateral jerk), so the
//! derivatives are exact.

use nalgebra::Point2;

use crate::types::{
    ActionMatrix, ActionVector, GainMatrix, StateMatrix, StateVector, Trajectory, VehicleAction,
    VehicleState,
};

// State component indices.
const IX: usize = 0;
const IY: usize = 1;
const IV: usize = 2;
const ITHETA: usize = 3;
const IA: usize = 4;
const IKAPPA: usize = 5;
const IKAPPA_DOT: usize = 6;

/// Per-step tracking references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub v_ref: f64,
    pub ref_point: Point2<f64>,
    /// Lane tangent at the reference point \[rad\], unwrapped along the profile.
    pub theta_ref: f64,
}

/// References for every step, length N + 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile {
    pub points: Vec<ReferencePoint>,
}

impl ReferenceProfile {
    /// Constant-speed profile along a fixed point, mostly for tests.
    pub fn constant(point: ReferencePoint, len: usize) -> Self {
        Self {
            points: vec![point; len],
        }
    }
}

/// Recomputes tracking references for the current nominal trajectory. Called
/// once per solver iteration so costs stay smooth within an iteration.
pub trait ReferenceSource {
    fn references(&self, nominal: &Trajectory) -> ReferenceProfile;
}

/// A profile that does not depend on the nominal trajectory.
#[derive(Debug, Clone)]
pub struct FixedReference(pub ReferenceProfile);

impl ReferenceSource for FixedReference {
    fn references(&self, _nominal: &Trajectory) -> ReferenceProfile {
        self.0.clone()
    }
}

/// Nonnegative weights for each cost term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    pub accel: f64,
    pub curvature: f64,
    pub velocity: f64,
    pub reference: f64,
    pub lateral_accel: f64,
    pub lateral_jerk: f64,
    pub longitudinal_jerk: f64,
    pub direction: f64,
    /// Quadratic soft cost on closing below the boundary soft threshold.
    pub boundary_soft: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            accel: 0.1,
            curvature: 10.0,
            velocity: 0.5,
            reference: 1.0,
            lateral_accel: 0.5,
            lateral_jerk: 0.2,
            longitudinal_jerk: 0.1,
            direction: 5.0,
            boundary_soft: 2.0,
        }
    }
}

/// First and second derivatives of one step cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDerivatives {
    pub l_x: StateVector,
    pub l_u: ActionVector,
    pub l_xx: StateMatrix,
    pub l_uu: ActionMatrix,
    pub l_ux: GainMatrix,
}

impl CostDerivatives {
    pub fn zeros() -> Self {
        Self {
            l_x: StateVector::zeros(),
            l_u: ActionVector::zeros(),
            l_xx: StateMatrix::zeros(),
            l_uu: ActionMatrix::zeros(),
            l_ux: GainMatrix::zeros(),
        }
    }
}

/// Derivatives of the terminal cost (state only).
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalDerivatives {
    pub l_x: StateVector,
    pub l_xx: StateMatrix,
}

impl TerminalDerivatives {
    pub fn zeros() -> Self {
        Self {
            l_x: StateVector::zeros(),
            l_xx: StateMatrix::zeros(),
        }
    }
}

/// The objective interface consumed by the solver: per-step cost, terminal
/// cost, and their derivatives around a nominal point.
pub trait StageObjective {
    fn stage_cost(&self, k: usize, state: &VehicleState, action: &VehicleAction) -> f64;
    fn terminal_cost(&self, state: &VehicleState) -> f64;
    fn stage_derivatives(
        &self,
        k: usize,
        state: &VehicleState,
        action: &VehicleAction,
    ) -> CostDerivatives;
    fn terminal_derivatives(&self, state: &VehicleState) -> TerminalDerivatives;

    fn total_cost(&self, traj: &Trajectory) -> f64 {
        let mut total = 0.0;
        for k in 0..traj.actions.len() {
            total += self.stage_cost(k, &traj.states[k], &traj.actions[k]);
        }
        total + self.terminal_cost(traj.states.last().expect("non-empty trajectory"))
    }

    /// Exact constraint recheck (no barriers). Unconstrained objectives are
    /// trivially feasible.
    fn exact_feasible(&self, _traj: &Trajectory) -> bool {
        true
    }

    /// Locate the first non-finite cost contribution, for error reporting.
    fn describe_non_finite(&self, traj: &Trajectory) -> Option<String> {
        for k in 0..traj.actions.len() {
            if !self
                .stage_cost(k, &traj.states[k], &traj.actions[k])
                .is_finite()
            {
                return Some(format!("stage cost at step {k}"));
            }
        }
        if !self
            .terminal_cost(traj.states.last().expect("non-empty trajectory"))
            .is_finite()
        {
            return Some("terminal cost".to_string());
        }
        None
    }
}

/// State-only cost terms shared by step and terminal costs.
fn state_cost(state: &VehicleState, refs: &ReferencePoint, w: &CostWeights) -> f64 {
    let dv = state.v - refs.v_ref;
    let dx = state.x - refs.ref_point.x;
    let dy = state.y - refs.ref_point.y;
    let dtheta = state.theta - refs.theta_ref;
    let a_y = state.kappa * state.v * state.v;
    let j_y = 2.0 * state.v * state.kappa * state.a + state.v * state.v * state.kappa_dot;

    w.accel * state.a * state.a
        + w.curvature * state.kappa * state.kappa
        + w.velocity * dv * dv
        + w.reference * (dx * dx + dy * dy)
        + w.lateral_accel * a_y * a_y
        + w.lateral_jerk * j_y * j_y
        + w.direction * dtheta * dtheta
}

pub fn step_cost(
    state: &VehicleState,
    action: &VehicleAction,
    refs: &ReferencePoint,
    weights: &CostWeights,
) -> f64 {
    state_cost(state, refs, weights) + weights.longitudinal_jerk * action.j * action.j
}

pub fn terminal_cost(state: &VehicleState, refs: &ReferencePoint, weights: &CostWeights) -> f64 {
    state_cost(state, refs, weights)
}

/// Gradient and Hessian of the state-only terms.
fn state_cost_derivatives(
    state: &VehicleState,
    refs: &ReferencePoint,
    w: &CostWeights,
) -> (StateVector, StateMatrix) {
    let mut g = StateVector::zeros();
    let mut h = StateMatrix::zeros();

    g[IA] += 2.0 * w.accel * state.a;
    h[(IA, IA)] += 2.0 * w.accel;

    g[IKAPPA] += 2.0 * w.curvature * state.kappa;
    h[(IKAPPA, IKAPPA)] += 2.0 * w.curvature;

    g[IV] += 2.0 * w.velocity * (state.v - refs.v_ref);
    h[(IV, IV)] += 2.0 * w.velocity;

    g[IX] += 2.0 * w.reference * (state.x - refs.ref_point.x);
    g[IY] += 2.0 * w.reference * (state.y - refs.ref_point.y);
    h[(IX, IX)] += 2.0 * w.reference;
    h[(IY, IY)] += 2.0 * w.reference;

    g[ITHETA] += 2.0 * w.direction * (state.theta - refs.theta_ref);
    h[(ITHETA, ITHETA)] += 2.0 * w.direction;

    // Lateral acceleration m = kappa v^2: cost w m^2.
    {
        let m = state.kappa * state.v * state.v;
        let mut gm = StateVector::zeros();
        gm[IV] = 2.0 * state.kappa * state.v;
        gm[IKAPPA] = state.v * state.v;
        let mut hm = StateMatrix::zeros();
        hm[(IV, IV)] = 2.0 * state.kappa;
        hm[(IV, IKAPPA)] = 2.0 * state.v;
        hm[(IKAPPA, IV)] = 2.0 * state.v;
        g += 2.0 * w.lateral_accel * m * gm;
        h += 2.0 * w.lateral_accel * (gm * gm.transpose() + m * hm);
    }

    // Lateral jerk m = 2 v kappa a + v^2 kappa_dot: cost w m^2.
    {
        let m = 2.0 * state.v * state.kappa * state.a + state.v * state.v * state.kappa_dot;
        let mut gm = StateVector::zeros();
        gm[IV] = 2.0 * state.kappa * state.a + 2.0 * state.v * state.kappa_dot;
        gm[IA] = 2.0 * state.v * state.kappa;
        gm[IKAPPA] = 2.0 * state.v * state.a;
        gm[IKAPPA_DOT] = state.v * state.v;
        let mut hm = StateMatrix::zeros();
        hm[(IV, IV)] = 2.0 * state.kappa_dot;
        hm[(IV, IA)] = 2.0 * state.kappa;
        hm[(IA, IV)] = 2.0 * state.kappa;
        hm[(IV, IKAPPA)] = 2.0 * state.a;
        hm[(IKAPPA, IV)] = 2.0 * state.a;
        hm[(IV, IKAPPA_DOT)] = 2.0 * state.v;
        hm[(IKAPPA_DOT, IV)] = 2.0 * state.v;
        hm[(IA, IKAPPA)] = 2.0 * state.v;
        hm[(IKAPPA, IA)] = 2.0 * state.v;
        g += 2.0 * w.lateral_jerk * m * gm;
        h += 2.0 * w.lateral_jerk * (gm * gm.transpose() + m * hm);
    }

    (g, h)
}

pub fn step_cost_derivatives(
    state: &VehicleState,
    action: &VehicleAction,
    refs: &ReferencePoint,
    weights: &CostWeights,
) -> CostDerivatives {
    let (l_x, l_xx) = state_cost_derivatives(state, refs, weights);
    let mut l_u = ActionVector::zeros();
    let mut l_uu = ActionMatrix::zeros();
    l_u[0] = 2.0 * weights.longitudinal_jerk * action.j;
    l_uu[(0, 0)] = 2.0 * weights.longitudinal_jerk;
    CostDerivatives {
        l_x,
        l_u,
        l_xx,
        l_uu,
        l_ux: GainMatrix::zeros(),
    }
}

pub fn terminal_cost_derivatives(
    state: &VehicleState,
    refs: &ReferencePoint,
    weights: &CostWeights,
) -> TerminalDerivatives {
    let (l_x, l_xx) = state_cost_derivatives(state, refs, weights);
    TerminalDerivatives { l_x, l_xx }
}

/// Weighted tracking objective over a reference profile.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub weights: CostWeights,
    pub refs: ReferenceProfile,
}

impl CostModel {
    pub fn new(weights: CostWeights, refs: ReferenceProfile) -> Self {
        Self { weights, refs }
    }

    fn row(&self, k: usize) -> &ReferencePoint {
        let last = self.refs.points.len() - 1;
        &self.refs.points[k.min(last)]
    }

    fn terminal_row(&self) -> &ReferencePoint {
        self.refs
            .points
            .last()
            .expect("non-empty reference profile")
    }
}

impl StageObjective for CostModel {
    fn stage_cost(&self, k: usize, state: &VehicleState, action: &VehicleAction) -> f64 {
        step_cost(state, action, self.row(k), &self.weights)
    }

    fn terminal_cost(&self, state: &VehicleState) -> f64 {
        terminal_cost(state, self.terminal_row(), &self.weights)
    }

    fn stage_derivatives(
        &self,
        k: usize,
        state: &VehicleState,
        action: &VehicleAction,
    ) -> CostDerivatives {
        step_cost_derivatives(state, action, self.row(k), &self.weights)
    }

    fn terminal_derivatives(&self, state: &VehicleState) -> TerminalDerivatives {
        terminal_cost_derivatives(state, self.terminal_row(), &self.weights)
    }
}
