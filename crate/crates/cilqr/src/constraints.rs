//! Inequality constraints `g(x, u) < 0` and their barrier augmentation.
//!
//! Constraints are assembled once per solver iteration. Bounds that depend on
//! the operating point (curvature-rate and curvature-acceleration limits) are
//! frozen at the nominal trajectory's curvature for the duration of that
//! iteration, which keeps every evaluator a fixed function of (state, action)
//! while the backward and forward passes run.

use std::fmt;

use crate::barrier::{relaxed_log_barrier, relaxed_log_barrier_derivatives, BarrierParams};
use crate::cost::{CostDerivatives, CostModel, StageObjective, TerminalDerivatives};
use crate::geometry::{
    box_footprint, box_to_box_distance, box_to_polyline_distance, OrientedBox, Polyline,
};
use crate::types::{StateVector, Trajectory, VehicleAction, VehicleSpec, VehicleState};
use crate::vehicle_model::{steer_domain_to_curvature_domain, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintClass {
    Kinematic,
    LaneBoundary,
    Collision,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintError {
    HorizonMismatch { expected: usize, got: usize },
    Model(ModelError),
}

impl fmt::Display for ConstraintError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HorizonMismatch { expected, got } => write!(
                f,
                "obstacle prediction covers {got} steps, horizon needs {expected}"
            ),
            Self::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConstraintError {}

impl From<ModelError> for ConstraintError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

type Evaluator = Box<dyn Fn(&VehicleState, &VehicleAction, usize) -> f64 + Send + Sync>;

/// One inequality constraint with its barrier parameters.
///
/// The dependency masks tell the numeric differentiator which components can
/// influence g; unmasked components have exactly zero gradient.
pub struct ConstraintSpec {
    pub class: ConstraintClass,
    pub label: String,
    pub barrier: BarrierParams,
    /// Whether the constraint also applies to the terminal state.
    pub terminal: bool,
    pub state_mask: [bool; 7],
    pub action_mask: [bool; 2],
    eval: Evaluator,
}

impl ConstraintSpec {
    pub fn new(
        class: ConstraintClass,
        label: impl Into<String>,
        barrier: BarrierParams,
        terminal: bool,
        state_mask: [bool; 7],
        action_mask: [bool; 2],
        eval: Evaluator,
    ) -> Self {
        Self {
            class,
            label: label.into(),
            barrier,
            terminal,
            state_mask,
            action_mask,
            eval,
        }
    }

    pub fn g(&self, state: &VehicleState, action: &VehicleAction, k: usize) -> f64 {
        (self.eval)(state, action, k)
    }
}

impl fmt::Debug for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSpec")
            .field("class", &self.class)
            .field("label", &self.label)
            .field("terminal", &self.terminal)
            .finish_non_exhaustive()
    }
}

/// Predicted obstacle poses over the horizon, one box per step (N + 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ObstaclePrediction {
    pub label: String,
    pub boxes: Vec<OrientedBox>,
}

/// Quadratic penalty for closing below a distance threshold, used to keep
/// some margin to non-crossable boundaries before the hard constraint
/// engages.
pub struct SoftDistanceTerm {
    pub label: String,
    pub weight: f64,
    pub threshold: f64,
    distance: Box<dyn Fn(&VehicleState) -> f64 + Send + Sync>,
    state_mask: [bool; 7],
}

impl SoftDistanceTerm {
    pub fn cost(&self, state: &VehicleState) -> f64 {
        let shortfall = (self.threshold - (self.distance)(state)).max(0.0);
        self.weight * shortfall * shortfall
    }
}

impl fmt::Debug for SoftDistanceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SoftDistanceTerm")
            .field("label", &self.label)
            .field("weight", &self.weight)
            .field("threshold", &self.threshold)
            .finish_non_exhaustive()
    }
}

/// All constraints active for one solver iteration.
#[derive(Debug, Default)]
pub struct ConstraintSet {
    pub constraints: Vec<ConstraintSpec>,
    pub soft_terms: Vec<SoftDistanceTerm>,
    /// Step index used when evaluating terminal constraints.
    pub terminal_index: usize,
}

impl ConstraintSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty() && self.soft_terms.is_empty()
    }
}

/// Hard bounds on acceleration and on curvature and its derivatives.
///
/// The curvature-rate and curvature-acceleration bounds depend on the
/// operating curvature; they are evaluated at the nominal trajectory and
/// frozen for this iteration.
pub fn kinematic_constraints(
    spec: &VehicleSpec,
    nominal: &Trajectory,
    barrier: BarrierParams,
) -> Result<Vec<ConstraintSpec>, ConstraintError> {
    let n_points = nominal.states.len();
    let mut kappa_dot_bound = Vec::with_capacity(n_points);
    let mut kappa_ddot_bound = Vec::with_capacity(n_points);
    let mut kappa_max = 0.0;
    for state in &nominal.states {
        let lim = steer_domain_to_curvature_domain(spec, state.kappa)?;
        kappa_dot_bound.push(lim.kappa_dot_max);
        kappa_ddot_bound.push(lim.kappa_ddot_max);
        kappa_max = lim.kappa_max;
    }

    let max_accel = spec.max_accel;
    let max_decel = spec.max_decel;
    let a_mask = {
        let mut m = [false; 7];
        m[4] = true;
        m
    };
    let kappa_mask = {
        let mut m = [false; 7];
        m[5] = true;
        m
    };
    let kappa_dot_mask = {
        let mut m = [false; 7];
        m[6] = true;
        m
    };
    let no_state = [false; 7];
    let no_action = [false; 2];
    let kappa_ddot_action = [false, true];

    let at = |bounds: Vec<f64>| move |k: usize| bounds[k.min(bounds.len() - 1)];
    let kd_up = at(kappa_dot_bound.clone());
    let kd_lo = at(kappa_dot_bound);
    let kdd_up = at(kappa_ddot_bound.clone());
    let kdd_lo = at(kappa_ddot_bound);

    Ok(vec![
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "accel_upper",
            barrier,
            false,
            a_mask,
            no_action,
            Box::new(move |x, _, _| x.a - max_accel),
        ),
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "accel_lower",
            barrier,
            false,
            a_mask,
            no_action,
            Box::new(move |x, _, _| max_decel - x.a),
        ),
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "kappa_upper",
            barrier,
            true,
            kappa_mask,
            no_action,
            Box::new(move |x, _, _| x.kappa - kappa_max),
        ),
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "kappa_lower",
            barrier,
            true,
            kappa_mask,
            no_action,
            Box::new(move |x, _, _| -x.kappa - kappa_max),
        ),
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "kappa_dot_upper",
            barrier,
            false,
            kappa_dot_mask,
            no_action,
            Box::new(move |x, _, k| x.kappa_dot - kd_up(k)),
        ),
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "kappa_dot_lower",
            barrier,
            false,
            kappa_dot_mask,
            no_action,
            Box::new(move |x, _, k| -x.kappa_dot - kd_lo(k)),
        ),
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "kappa_ddot_upper",
            barrier,
            false,
            no_state,
            kappa_ddot_action,
            Box::new(move |_, u, k| u.kappa_ddot - kdd_up(k)),
        ),
        ConstraintSpec::new(
            ConstraintClass::Kinematic,
            "kappa_ddot_lower",
            barrier,
            false,
            no_state,
            kappa_ddot_action,
            Box::new(move |_, u, k| -u.kappa_ddot - kdd_lo(k)),
        ),
    ])
}

const POSE_MASK: [bool; 7] = [true, true, false, true, false, false, false];

/// Hard clearance constraints plus soft centering penalties against every
/// non-crossable boundary in `boundaries`. Crossable lines are skipped.
pub fn lane_boundary_constraints(
    boundaries: &[Polyline],
    spec: &VehicleSpec,
    d_min: f64,
    d_soft: f64,
    barrier: BarrierParams,
    soft_weight: f64,
) -> (Vec<ConstraintSpec>, Vec<SoftDistanceTerm>) {
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for (i, boundary) in boundaries.iter().enumerate() {
        if boundary.crossable {
            continue;
        }
        let label = format!("boundary_{i}");
        let spec_copy = *spec;
        let line = boundary.clone();
        hard.push(ConstraintSpec::new(
            ConstraintClass::LaneBoundary,
            label.clone(),
            barrier,
            true,
            POSE_MASK,
            [false; 2],
            Box::new(move |x, _, _| {
                d_min - box_to_polyline_distance(&box_footprint(x, &spec_copy), &line)
            }),
        ));
        let spec_copy = *spec;
        let line = boundary.clone();
        soft.push(SoftDistanceTerm {
            label,
            weight: soft_weight,
            threshold: d_soft,
            distance: Box::new(move |x| {
                box_to_polyline_distance(&box_footprint(x, &spec_copy), &line)
            }),
            state_mask: POSE_MASK,
        });
    }
    (hard, soft)
}

/// Time-matched clearance constraints against each predicted obstacle: the
/// footprint at step k is paired with the obstacle's box at step k.
pub fn collision_constraints(
    obstacles: &[ObstaclePrediction],
    spec: &VehicleSpec,
    d_min: f64,
    horizon: usize,
    barrier: BarrierParams,
) -> Result<Vec<ConstraintSpec>, ConstraintError> {
    let mut out = Vec::new();
    for obstacle in obstacles {
        if obstacle.boxes.len() != horizon + 1 {
            return Err(ConstraintError::HorizonMismatch {
                expected: horizon + 1,
                got: obstacle.boxes.len(),
            });
        }
        let spec_copy = *spec;
        let boxes = obstacle.boxes.clone();
        out.push(ConstraintSpec::new(
            ConstraintClass::Collision,
            obstacle.label.clone(),
            barrier,
            true,
            POSE_MASK,
            [false; 2],
            Box::new(move |x, _, k| {
                let other = &boxes[k.min(boxes.len() - 1)];
                d_min - box_to_box_distance(&box_footprint(x, &spec_copy), other)
            }),
        ));
    }
    Ok(out)
}

/// Fold a constraint set into a cost model: the result is the original cost
/// plus one relaxed barrier per constraint plus the soft distance terms.
pub fn augment(base: CostModel, set: ConstraintSet) -> AugmentedObjective {
    AugmentedObjective { base, set }
}

/// Cost model plus barrier and soft-penalty contributions.
///
/// Gradients compose the analytic barrier derivatives with numerically
/// differentiated constraint values; second-order terms keep only the
/// Gauss-Newton part `beta'' grad_g grad_g^T`, which is positive
/// semidefinite for convex barriers.
pub struct AugmentedObjective {
    pub base: CostModel,
    pub set: ConstraintSet,
}

fn fd_step(value: f64) -> f64 {
    1e-6_f64.max(1e-6 * value.abs())
}

impl AugmentedObjective {
    fn constraint_state_grad(
        &self,
        c: &ConstraintSpec,
        state: &VehicleState,
        action: &VehicleAction,
        k: usize,
    ) -> StateVector {
        let x0 = state.to_vector();
        let mut grad = StateVector::zeros();
        for i in 0..7 {
            if !c.state_mask[i] {
                continue;
            }
            let h = fd_step(x0[i]);
            let mut plus = x0;
            let mut minus = x0;
            plus[i] += h;
            minus[i] -= h;
            let gp = c.g(&VehicleState::from_vector(&plus), action, k);
            let gm = c.g(&VehicleState::from_vector(&minus), action, k);
            grad[i] = (gp - gm) / (2.0 * h);
        }
        grad
    }

    fn constraint_action_grad(
        &self,
        c: &ConstraintSpec,
        state: &VehicleState,
        action: &VehicleAction,
        k: usize,
    ) -> crate::types::ActionVector {
        let u0 = action.to_vector();
        let mut grad = crate::types::ActionVector::zeros();
        for i in 0..2 {
            if !c.action_mask[i] {
                continue;
            }
            let h = fd_step(u0[i]);
            let mut plus = u0;
            let mut minus = u0;
            plus[i] += h;
            minus[i] -= h;
            let gp = c.g(state, &VehicleAction::from_vector(&plus), k);
            let gm = c.g(state, &VehicleAction::from_vector(&minus), k);
            grad[i] = (gp - gm) / (2.0 * h);
        }
        grad
    }

    fn soft_state_grad(&self, term: &SoftDistanceTerm, state: &VehicleState) -> StateVector {
        let x0 = state.to_vector();
        let mut grad = StateVector::zeros();
        for i in 0..7 {
            if !term.state_mask[i] {
                continue;
            }
            let h = fd_step(x0[i]);
            let mut plus = x0;
            let mut minus = x0;
            plus[i] += h;
            minus[i] -= h;
            let dp = (term.distance)(&VehicleState::from_vector(&plus));
            let dm = (term.distance)(&VehicleState::from_vector(&minus));
            grad[i] = (dp - dm) / (2.0 * h);
        }
        grad
    }

    fn barrier_sum(
        &self,
        state: &VehicleState,
        action: &VehicleAction,
        k: usize,
        terminal: bool,
    ) -> f64 {
        let mut total = 0.0;
        for c in &self.set.constraints {
            if terminal && !c.terminal {
                continue;
            }
            total += relaxed_log_barrier(c.g(state, action, k), &c.barrier);
        }
        for term in &self.set.soft_terms {
            total += term.cost(state);
        }
        total
    }
}

impl StageObjective for AugmentedObjective {
    fn stage_cost(&self, k: usize, state: &VehicleState, action: &VehicleAction) -> f64 {
        self.base.stage_cost(k, state, action) + self.barrier_sum(state, action, k, false)
    }

    fn terminal_cost(&self, state: &VehicleState) -> f64 {
        self.base.terminal_cost(state)
            + self.barrier_sum(
                state,
                &VehicleAction::zeros(),
                self.set.terminal_index,
                true,
            )
    }

    fn stage_derivatives(
        &self,
        k: usize,
        state: &VehicleState,
        action: &VehicleAction,
    ) -> CostDerivatives {
        let mut d = self.base.stage_derivatives(k, state, action);
        for c in &self.set.constraints {
            let g0 = c.g(state, action, k);
            let (b1, b2) = relaxed_log_barrier_derivatives(g0, &c.barrier);
            let gx = self.constraint_state_grad(c, state, action, k);
            let gu = self.constraint_action_grad(c, state, action, k);
            d.l_x += b1 * gx;
            d.l_u += b1 * gu;
            d.l_xx += b2 * gx * gx.transpose();
            d.l_uu += b2 * gu * gu.transpose();
            d.l_ux += b2 * gu * gx.transpose();
        }
        for term in &self.set.soft_terms {
            let dist = (term.distance)(state);
            if dist < term.threshold {
                let shortfall = term.threshold - dist;
                let dx = self.soft_state_grad(term, state);
                d.l_x += -2.0 * term.weight * shortfall * dx;
                d.l_xx += 2.0 * term.weight * dx * dx.transpose();
            }
        }
        d
    }

    fn terminal_derivatives(&self, state: &VehicleState) -> TerminalDerivatives {
        let mut d = self.base.terminal_derivatives(state);
        let k = self.set.terminal_index;
        let action = VehicleAction::zeros();
        for c in &self.set.constraints {
            if !c.terminal {
                continue;
            }
            let g0 = c.g(state, &action, k);
            let (b1, b2) = relaxed_log_barrier_derivatives(g0, &c.barrier);
            let gx = self.constraint_state_grad(c, state, &action, k);
            d.l_x += b1 * gx;
            d.l_xx += b2 * gx * gx.transpose();
        }
        for term in &self.set.soft_terms {
            let dist = (term.distance)(state);
            if dist < term.threshold {
                let shortfall = term.threshold - dist;
                let dx = self.soft_state_grad(term, state);
                d.l_x += -2.0 * term.weight * shortfall * dx;
                d.l_xx += 2.0 * term.weight * dx * dx.transpose();
            }
        }
        d
    }

    fn exact_feasible(&self, traj: &Trajectory) -> bool {
        for k in 0..traj.actions.len() {
            for c in &self.set.constraints {
                if c.g(&traj.states[k], &traj.actions[k], k) >= 0.0 {
                    return false;
                }
            }
        }
        let last = traj.states.last().expect("non-empty trajectory");
        let action = VehicleAction::zeros();
        for c in &self.set.constraints {
            if c.terminal && c.g(last, &action, self.set.terminal_index) >= 0.0 {
                return false;
            }
        }
        true
    }

    fn describe_non_finite(&self, traj: &Trajectory) -> Option<String> {
        for k in 0..traj.actions.len() {
            let (x, u) = (&traj.states[k], &traj.actions[k]);
            if !self.base.stage_cost(k, x, u).is_finite() {
                return Some(format!("tracking cost at step {k}"));
            }
            for c in &self.set.constraints {
                if !relaxed_log_barrier(c.g(x, u, k), &c.barrier).is_finite() {
                    return Some(format!("barrier '{}' at step {k}", c.label));
                }
            }
            for t in &self.set.soft_terms {
                if !t.cost(x).is_finite() {
                    return Some(format!("soft term '{}' at step {k}", t.label));
                }
            }
        }
        let last = traj.states.last().expect("non-empty trajectory");
        if !self.terminal_cost(last).is_finite() {
            return Some("terminal cost".to_string());
        }
        None
    }
}
