//! Shared value types and trajectory containers.

use std::fmt;

use nalgebra::{SMatrix, SVector};

use crate::vehicle_model::{Dynamics, ModelError};

pub const STATE_DIM: usize = 7;
pub const ACTION_DIM: usize = 2;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type ActionVector = SVector<f64, ACTION_DIM>;
pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type ActionMatrix = SMatrix<f64, ACTION_DIM, ACTION_DIM>;
/// Action-by-state matrix (feedback gains, mixed cost Hessians).
pub type GainMatrix = SMatrix<f64, ACTION_DIM, STATE_DIM>;
/// State-by-action matrix (action Jacobian of the dynamics).
pub type InputMatrix = SMatrix<f64, STATE_DIM, ACTION_DIM>;

/// Planar kinematic vehicle state.
///
/// `theta` is kept unwrapped (continuous) internally; it is normalized to
/// (-pi, pi] only when crossing scenario I/O boundaries so that costs and
/// constraints stay differentiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Position east \[m\].
    pub x: f64,
    /// Position north \[m\].
    pub y: f64,
    /// Longitudinal speed \[m/s\].
    pub v: f64,
    /// Heading \[rad\], unwrapped.
    pub theta: f64,
    /// Longitudinal acceleration \[m/s^2\].
    pub a: f64,
    /// Curvature \[1/m\].
    pub kappa: f64,
    /// Curvature time-derivative \[1/(m s)\].
    pub kappa_dot: f64,
}

impl VehicleState {
    pub fn zeros() -> Self {
        Self::from_vector(&StateVector::zeros())
    }

    pub fn to_vector(&self) -> StateVector {
        StateVector::from_column_slice(&[
            self.x,
            self.y,
            self.v,
            self.theta,
            self.a,
            self.kappa,
            self.kappa_dot,
        ])
    }

    pub fn from_vector(v: &StateVector) -> Self {
        Self {
            x: v[0],
            y: v[1],
            v: v[2],
            theta: v[3],
            a: v[4],
            kappa: v[5],
            kappa_dot: v[6],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|c| c.is_finite())
    }
}

/// Control input: longitudinal jerk and curvature second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleAction {
    /// Longitudinal jerk \[m/s^3\].
    pub j: f64,
    /// Curvature second time-derivative \[1/(m s^2)\].
    pub kappa_ddot: f64,
}

impl VehicleAction {
    pub fn zeros() -> Self {
        Self {
            j: 0.0,
            kappa_ddot: 0.0,
        }
    }

    pub fn to_vector(&self) -> ActionVector {
        ActionVector::new(self.j, self.kappa_ddot)
    }

    pub fn from_vector(v: &ActionVector) -> Self {
        Self {
            j: v[0],
            kappa_ddot: v[1],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.j.is_finite() && self.kappa_ddot.is_finite()
    }
}

/// Paired state/action sequences over a fixed-step horizon.
///
/// `states` has one more entry than `actions`. A trajectory is *dynamically
/// consistent* when every state follows from its predecessor through the
/// model; this is checked by [`is_dynamically_consistent`], never assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<VehicleState>,
    pub actions: Vec<VehicleAction>,
    /// Step duration \[s\].
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryError {
    LengthMismatch { states: usize, actions: usize },
    EmptyStates,
    InvalidDt(f64),
    Model(ModelError),
}

impl fmt::Display for TrajectoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LengthMismatch { states, actions } => write!(
                f,
                "trajectory has {states} states and {actions} actions; expected states = actions + 1"
            ),
            Self::EmptyStates => write!(f, "trajectory must contain at least one state"),
            Self::InvalidDt(dt) => write!(f, "step duration must be positive and finite, got {dt}"),
            Self::Model(e) => write!(f, "model evaluation failed: {e}"),
        }
    }
}

impl std::error::Error for TrajectoryError {}

impl From<ModelError> for TrajectoryError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl Trajectory {
    pub fn new(
        states: Vec<VehicleState>,
        actions: Vec<VehicleAction>,
        dt: f64,
    ) -> Result<Self, TrajectoryError> {
        if states.is_empty() {
            return Err(TrajectoryError::EmptyStates);
        }
        if states.len() != actions.len() + 1 {
            return Err(TrajectoryError::LengthMismatch {
                states: states.len(),
                actions: actions.len(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(TrajectoryError::InvalidDt(dt));
        }
        Ok(Self {
            states,
            actions,
            dt,
        })
    }

    /// Number of steps N (one less than the number of states).
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }
}

/// True iff every state follows from its predecessor through `model` within
/// `tol`, component-wise. A single-state trajectory is vacuously consistent.
pub fn is_dynamically_consistent<M: Dynamics + ?Sized>(
    traj: &Trajectory,
    model: &M,
    tol: f64,
) -> Result<bool, TrajectoryError> {
    if traj.states.len() != traj.actions.len() + 1 {
        return Err(TrajectoryError::LengthMismatch {
            states: traj.states.len(),
            actions: traj.actions.len(),
        });
    }
    for k in 0..traj.actions.len() {
        let predicted = model.step(&traj.states[k], &traj.actions[k], traj.dt)?;
        let diff = traj.states[k + 1].to_vector() - predicted.to_vector();
        if diff.iter().any(|d| d.abs() > tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Static vehicle parameters. Angles and angular rates are stored in radians
/// at the steering wheel; conversion from degrees happens at scenario load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleSpec {
    pub length: f64,
    pub width: f64,
    pub wheelbase: f64,
    pub steer_ratio: f64,
    pub max_accel: f64,
    pub max_decel: f64,
    /// Steering-wheel angle limit \[rad\].
    pub max_steer_angle: f64,
    /// Steering-wheel rate limit \[rad/s\].
    pub max_steer_rate: f64,
    /// Steering-wheel acceleration limit \[rad/s^2\].
    pub max_steer_accel: f64,
    /// Longitudinal offset from the state (x, y) anchor (rear axle) to the
    /// bounding-box center \[m\].
    pub box_ref_offset: f64,
}

impl Default for VehicleSpec {
    /// Mid-size passenger vehicle parameters.
    fn default() -> Self {
        Self {
            length: 4.77,
            width: 1.93,
            wheelbase: 2.88,
            steer_ratio: 15.8,
            max_accel: 5.0,
            max_decel: -5.0,
            max_steer_angle: 475.0_f64.to_radians(),
            max_steer_rate: 550.0_f64.to_radians(),
            max_steer_accel: 1200.0_f64.to_radians(),
            box_ref_offset: 1.44,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid {}: {}", self.field, self.message)
    }
}

impl std::error::Error for SpecError {}

fn require(ok: bool, field: &'static str, message: &str) -> Result<(), SpecError> {
    if ok {
        Ok(())
    } else {
        Err(SpecError {
            field,
            message: message.to_string(),
        })
    }
}

impl VehicleSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        require(self.length > 0.0, "length", "must be > 0")?;
        require(self.width > 0.0, "width", "must be > 0")?;
        require(self.wheelbase > 0.0, "wheelbase", "must be > 0")?;
        require(self.steer_ratio > 0.0, "steer_ratio", "must be > 0")?;
        require(self.max_accel > 0.0, "max_accel", "must be > 0")?;
        require(self.max_decel < 0.0, "max_decel", "must be < 0")?;
        require(self.max_steer_angle > 0.0, "max_steer_angle", "must be > 0")?;
        require(self.max_steer_rate > 0.0, "max_steer_rate", "must be > 0")?;
        require(self.max_steer_accel > 0.0, "max_steer_accel", "must be > 0")?;
        require(
            self.box_ref_offset.is_finite(),
            "box_ref_offset",
            "must be finite",
        )?;
        Ok(())
    }
}

/// Relaxation width of the barrier, per constraint class. The width is in the
/// constraint's native unit (meters for distances, the bound unit for
/// kinematic limits).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonByClass {
    pub kinematic: f64,
    pub lane_boundary: f64,
    pub collision: f64,
}

impl Default for EpsilonByClass {
    fn default() -> Self {
        Self {
            kinematic: 0.05,
            lane_boundary: 0.1,
            collision: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchKind {
    GoldenSection,
    Backtracking,
}

/// Solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Barrier sharpness t (> 0).
    pub barrier_t: f64,
    /// Barrier relaxation order k (even integer >= 2).
    pub barrier_k: u32,
    pub epsilon: EpsilonByClass,
    /// Added to each diagonal element of the value Hessian before forming
    /// the action-block Hessian in the backward pass.
    pub regularization: f64,
    /// Relative cost-drop threshold for convergence.
    pub convergence_rel_tol: f64,
    pub max_iterations: usize,
    pub line_search: LineSearchKind,
    pub backtracking_ratio: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            barrier_t: 5.0,
            barrier_k: 2,
            epsilon: EpsilonByClass::default(),
            regularization: 1e-6,
            convergence_rel_tol: 0.01,
            max_iterations: 50,
            line_search: LineSearchKind::GoldenSection,
            backtracking_ratio: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SpecError> {
        require(self.barrier_t > 0.0, "barrier_t", "must be > 0")?;
        require(
            self.barrier_k >= 2 && self.barrier_k % 2 == 0,
            "barrier_k",
            "must be an even integer >= 2",
        )?;
        require(
            self.epsilon.kinematic > 0.0,
            "epsilon.kinematic",
            "must be > 0",
        )?;
        require(
            self.epsilon.lane_boundary > 0.0,
            "epsilon.lane_boundary",
            "must be > 0",
        )?;
        require(
            self.epsilon.collision > 0.0,
            "epsilon.collision",
            "must be > 0",
        )?;
        require(self.regularization > 0.0, "regularization", "must be > 0")?;
        require(
            self.convergence_rel_tol > 0.0 && self.convergence_rel_tol < 1.0,
            "convergence_rel_tol",
            "must be in (0, 1)",
        )?;
        require(self.max_iterations >= 1, "max_iterations", "must be >= 1")?;
        require(
            self.backtracking_ratio > 0.0 && self.backtracking_ratio < 1.0,
            "backtracking_ratio",
            "must be in (0, 1)",
        )?;
        Ok(())
    }
}

/// Normalize an angle to (-pi, pi]. Used only at scenario I/O boundaries.
pub fn normalize_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = theta.rem_euclid(two_pi);
    if a > std::f64::consts::PI {
        a -= two_pi;
    }
    a
}
