//! Discrete-time kinematic vehicle model with curvature derivatives.
//!
//! The model integrates a 7-state vehicle over one step of duration `dt`
//! assuming constant longitudinal jerk and constant curvature second
//! derivative within the step, and a constant heading derivative with
//! respect to travel distance equal to the step-average curvature.

use std::fmt;

use crate::types::{
    InputMatrix, StateMatrix, Trajectory, VehicleAction, VehicleSpec, VehicleState,
};

/// Below this heading change \[rad\] the arc kernels switch to their series
/// expansion to avoid cancellation.
const ARC_SERIES_SWITCH: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    NonFinite {
        what: &'static str,
    },
    InvalidDt(f64),
    /// Front-wheel angle limit reaches the tan singularity.
    SteerRangeSingular {
        delta_max: f64,
    },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFinite { what } => write!(f, "non-finite {what}"),
            Self::InvalidDt(dt) => write!(f, "step duration must be positive and finite, got {dt}"),
            Self::SteerRangeSingular { delta_max } => write!(
                f,
                "front-wheel angle limit {delta_max} rad reaches or exceeds pi/2"
            ),
        }
    }
}

impl std::error::Error for ModelError {}

/// Distance traveled and average curvature over one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepIntermediates {
    /// Arc length covered during the step \[m\].
    pub s_r: f64,
    /// Curvature averaged over the step \[1/m\].
    pub kappa_bar: f64,
}

pub fn step_intermediates(
    state: &VehicleState,
    action: &VehicleAction,
    dt: f64,
) -> StepIntermediates {
    StepIntermediates {
        s_r: state.v * dt + 0.5 * state.a * dt * dt + action.j * dt * dt * dt / 6.0,
        kappa_bar: state.kappa + 0.5 * state.kappa_dot * dt + action.kappa_ddot * dt * dt / 6.0,
    }
}

/// State and action Jacobians of the discrete dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub f_x: StateMatrix,
    pub f_u: InputMatrix,
}

/// Discrete dynamics interface consumed by the solver.
pub trait Dynamics {
    fn step(
        &self,
        state: &VehicleState,
        action: &VehicleAction,
        dt: f64,
    ) -> Result<VehicleState, ModelError>;

    /// Central finite differences of `step` by default.
    fn linearize(
        &self,
        state: &VehicleState,
        action: &VehicleAction,
        dt: f64,
    ) -> Result<Linearization, ModelError>
    where
        Self: Sized,
    {
        numeric_linearize(self, state, action, dt)
    }
}

/// The higher-order kinematic model.
#[derive(Debug, Clone, Copy, Default)]
pub struct KinematicModel;

/// `(sin(phi)/phi, (1 - cos(phi))/phi)` evaluated without cancellation.
fn arc_kernels(phi: f64) -> (f64, f64) {
    if phi.abs() < ARC_SERIES_SWITCH {
        arc_kernels_series(phi)
    } else {
        arc_kernels_exact(phi)
    }
}

fn arc_kernels_exact(phi: f64) -> (f64, f64) {
    let half_sin = (0.5 * phi).sin();
    // 1 - cos(phi) = 2 sin^2(phi/2), stable for small phi.
    (phi.sin() / phi, 2.0 * half_sin * half_sin / phi)
}

/// Third-order expansions of both kernels around phi = 0.
fn arc_kernels_series(phi: f64) -> (f64, f64) {
    let phi2 = phi * phi;
    (1.0 - phi2 / 6.0, 0.5 * phi - phi * phi2 / 24.0)
}

impl Dynamics for KinematicModel {
    fn step(
        &self,
        state: &VehicleState,
        action: &VehicleAction,
        dt: f64,
    ) -> Result<VehicleState, ModelError> {
        if !state.is_finite() {
            return Err(ModelError::NonFinite { what: "state" });
        }
        if !action.is_finite() {
            return Err(ModelError::NonFinite { what: "action" });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ModelError::InvalidDt(dt));
        }

        let StepIntermediates { s_r, kappa_bar } = step_intermediates(state, action, dt);
        let phi = kappa_bar * s_r;
        let (sinc, vers) = arc_kernels(phi);
        let (sin_t, cos_t) = state.theta.sin_cos();

        Ok(VehicleState {
            x: state.x + s_r * (cos_t * sinc - sin_t * vers),
            y: state.y + s_r * (sin_t * sinc + cos_t * vers),
            v: state.v + state.a * dt + 0.5 * action.j * dt * dt,
            theta: state.theta + phi,
            a: state.a + action.j * dt,
            kappa: state.kappa + state.kappa_dot * dt + 0.5 * action.kappa_ddot * dt * dt,
            kappa_dot: state.kappa_dot + action.kappa_ddot * dt,
        })
    }
}

/// Central finite-difference Jacobians of `model.step`, with per-component
/// perturbation `h = max(1e-6, 1e-6 |value|)`.
pub fn numeric_linearize<M: Dynamics + ?Sized>(
    model: &M,
    state: &VehicleState,
    action: &VehicleAction,
    dt: f64,
) -> Result<Linearization, ModelError> {
    let x0 = state.to_vector();
    let u0 = action.to_vector();
    let mut f_x = StateMatrix::zeros();
    let mut f_u = InputMatrix::zeros();

    for j in 0..7 {
        let h = 1e-6_f64.max(1e-6 * x0[j].abs());
        let mut plus = x0;
        let mut minus = x0;
        plus[j] += h;
        minus[j] -= h;
        let fp = model
            .step(&VehicleState::from_vector(&plus), action, dt)?
            .to_vector();
        let fm = model
            .step(&VehicleState::from_vector(&minus), action, dt)?
            .to_vector();
        f_x.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    for j in 0..2 {
        let h = 1e-6_f64.max(1e-6 * u0[j].abs());
        let mut plus = u0;
        let mut minus = u0;
        plus[j] += h;
        minus[j] -= h;
        let fp = model
            .step(state, &VehicleAction::from_vector(&plus), dt)?
            .to_vector();
        let fm = model
            .step(state, &VehicleAction::from_vector(&minus), dt)?
            .to_vector();
        f_u.set_column(j, &((fp - fm) / (2.0 * h)));
    }

    Ok(Linearization { f_x, f_u })
}

/// Roll an action sequence through the model from `start`. The result is
/// dynamically consistent by construction.
pub fn rollout<M: Dynamics + ?Sized>(
    model: &M,
    start: VehicleState,
    actions: &[VehicleAction],
    dt: f64,
) -> Result<Trajectory, ModelError> {
    let mut states = Vec::with_capacity(actions.len() + 1);
    states.push(start);
    for action in actions {
        let next = model.step(states.last().unwrap(), action, dt)?;
        states.push(next);
    }
    Ok(Trajectory {
        states,
        actions: actions.to_vec(),
        dt,
    })
}

/// Lateral acceleration and lateral jerk implied by the current state.
pub fn lateral_quantities(state: &VehicleState) -> (f64, f64) {
    let a_y = state.kappa * state.v * state.v;
    let j_y = 2.0 * state.v * state.kappa * state.a + state.v * state.v * state.kappa_dot;
    (a_y, j_y)
}

/// Curvature-domain actuator limits at a given operating curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureLimits {
    pub kappa_max: f64,
    pub kappa_dot_max: f64,
    pub kappa_ddot_max: f64,
}

/// Translate steering-wheel limits into curvature-domain bounds evaluated at
/// the operating curvature `kappa`.
///
/// The curvature bound comes from the front-wheel angle limit through the
/// kinematic steer/curvature relation. Rate and acceleration bounds use the
/// derivative of that relation; the acceleration bound takes the worst-case
/// sign of the rate term so the envelope is conservative.
pub fn steer_domain_to_curvature_domain(
    spec: &VehicleSpec,
    kappa: f64,
) -> Result<CurvatureLimits, ModelError> {
    if !kappa.is_finite() {
        return Err(ModelError::NonFinite { what: "kappa" });
    }
    let delta_max = spec.max_steer_angle / spec.steer_ratio;
    if delta_max.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(ModelError::SteerRangeSingular { delta_max });
    }
    let delta_dot_max = spec.max_steer_rate / spec.steer_ratio;
    let delta_ddot_max = spec.max_steer_accel / spec.steer_ratio;
    let wheelbase = spec.wheelbase;

    let kl = kappa * wheelbase;
    let gain = (1.0 + kl * kl) / wheelbase;

    Ok(CurvatureLimits {
        kappa_max: delta_max.tan() / wheelbase,
        kappa_dot_max: gain * delta_dot_max,
        kappa_ddot_max: gain * delta_ddot_max
            + (2.0 * kappa).abs() * gain * delta_dot_max * delta_dot_max,
    })
}
