//! Constrained iterative-LQR trajectory optimization for on-road driving.
//!
//! The crate plans over a 7-state kinematic vehicle model that carries
//! curvature and its first derivative as states and is driven by longitudinal
//! jerk and the curvature second derivative. Inequality constraints
//! (actuation limits, lane boundaries, collision clearance) enter the
//! objective through relaxed logarithmic barriers, so optimization can start
//! from infeasible nominal trajectories. A receding-horizon harness and the
//! `plan` binary replay scripted driving scenarios and emit per-step metric
//! files.

pub mod barrier;
pub mod constraints;
pub mod cost;
pub mod geometry;
pub mod harness;
pub mod solver;
pub mod types;
pub mod vehicle_model;

pub use types::{
    is_dynamically_consistent, EpsilonByClass, LineSearchKind, SolverConfig, Trajectory,
    TrajectoryError, VehicleAction, VehicleSpec, VehicleState,
};

pub use barrier::{
    relaxed_log_barrier, relaxed_log_barrier_derivatives, standard_log_barrier, BarrierParams,
};
pub use cost::{CostDerivatives, CostModel, CostWeights, ReferenceProfile, StageObjective};
pub use solver::{backward_pass, forward_pass, line_search, solve, SolveDiagnostics, SolverError};
pub use vehicle_model::{Dynamics, KinematicModel, Linearization};
