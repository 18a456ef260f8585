//! Shared oracles for the integration suites: a deterministic RNG, random
//! controllable LQR instances, and an independent discrete Riccati recursion.
//!
//! The Riccati code here must stay independent of the solver's backward pass;
//! it is the reference the solver is checked against.

#![allow(dead_code)]

use cilqr::cost::{CostDerivatives, StageObjective, TerminalDerivatives};
use cilqr::types::{
    ActionMatrix, GainMatrix, InputMatrix, StateMatrix, StateVector, Trajectory, VehicleAction,
    VehicleState,
};
use cilqr::vehicle_model::{Dynamics, Linearization, ModelError};

/// SplitMix64: tiny, seedable, identical on every platform and release.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

/// Linear time-invariant dynamics on the 7-dimensional state.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub a: StateMatrix,
    pub b: InputMatrix,
}

impl Dynamics for LinearModel {
    fn step(
        &self,
        state: &VehicleState,
        action: &VehicleAction,
        _dt: f64,
    ) -> Result<VehicleState, ModelError> {
        Ok(VehicleState::from_vector(
            &(self.a * state.to_vector() + self.b * action.to_vector()),
        ))
    }

    fn linearize(
        &self,
        _state: &VehicleState,
        _action: &VehicleAction,
        _dt: f64,
    ) -> Result<Linearization, ModelError> {
        Ok(Linearization {
            f_x: self.a,
            f_u: self.b,
        })
    }
}

/// Quadratic objective `sum x'Qx + u'Ru` with terminal `x'Qf x`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub q: StateMatrix,
    pub r: ActionMatrix,
    pub qf: StateMatrix,
}

impl StageObjective for QuadraticObjective {
    fn stage_cost(&self, _k: usize, state: &VehicleState, action: &VehicleAction) -> f64 {
        let x = state.to_vector();
        let u = action.to_vector();
        (x.transpose() * self.q * x)[(0, 0)] + (u.transpose() * self.r * u)[(0, 0)]
    }

    fn terminal_cost(&self, state: &VehicleState) -> f64 {
        let x = state.to_vector();
        (x.transpose() * self.qf * x)[(0, 0)]
    }

    fn stage_derivatives(
        &self,
        _k: usize,
        state: &VehicleState,
        action: &VehicleAction,
    ) -> CostDerivatives {
        let x = state.to_vector();
        let u = action.to_vector();
        CostDerivatives {
            l_x: 2.0 * self.q * x,
            l_u: 2.0 * self.r * u,
            l_xx: 2.0 * self.q,
            l_uu: 2.0 * self.r,
            l_ux: GainMatrix::zeros(),
        }
    }

    fn terminal_derivatives(&self, state: &VehicleState) -> TerminalDerivatives {
        TerminalDerivatives {
            l_x: 2.0 * self.qf * state.to_vector(),
            l_xx: 2.0 * self.qf,
        }
    }
}

/// A finite-horizon LQR problem instance.
#[derive(Debug, Clone)]
pub struct LqrInstance {
    pub model: LinearModel,
    pub objective: QuadraticObjective,
    pub x0: StateVector,
    pub horizon: usize,
}

impl LqrInstance {
    /// Independent discrete-time Riccati recursion. Returns the feedback
    /// gains K_k of `u_k = -K_k x_k` and the value matrices P_k, with
    /// `V_k(x) = x' P_k x`.
    pub fn riccati(&self) -> (Vec<GainMatrix>, Vec<StateMatrix>) {
        let n = self.horizon;
        let a = &self.model.a;
        let b = &self.model.b;
        let q = &self.objective.q;
        let r = &self.objective.r;
        let mut p_mats = vec![StateMatrix::zeros(); n + 1];
        let mut gains = vec![GainMatrix::zeros(); n];
        p_mats[n] = self.objective.qf;
        for k in (0..n).rev() {
            let p_next = p_mats[k + 1];
            let h = r + b.transpose() * p_next * b;
            let h_inv = h.try_inverse().expect("R + B'PB invertible");
            let gain = h_inv * b.transpose() * p_next * a;
            let closed = a - b * gain;
            // Joseph-stabilized update.
            p_mats[k] = q + gain.transpose() * r * gain + closed.transpose() * p_next * closed;
            gains[k] = gain;
        }
        (gains, p_mats)
    }

    pub fn optimal_cost(&self) -> f64 {
        let (_, p_mats) = self.riccati();
        (self.x0.transpose() * p_mats[0] * self.x0)[(0, 0)]
    }

    /// Roll out the Riccati-optimal policy.
    pub fn optimal_trajectory(&self) -> Trajectory {
        let (gains, _) = self.riccati();
        let mut states = vec![VehicleState::from_vector(&self.x0)];
        let mut actions = Vec::with_capacity(self.horizon);
        for k in 0..self.horizon {
            let x = states[k].to_vector();
            let u = -gains[k] * x;
            let action = VehicleAction::from_vector(&u);
            let next = self.model.step(&states[k], &action, 1.0).unwrap();
            actions.push(action);
            states.push(next);
        }
        Trajectory {
            states,
            actions,
            dt: 1.0,
        }
    }

    /// Zero-action rollout used as the solver's nominal.
    pub fn zero_nominal(&self) -> Trajectory {
        let mut states = vec![VehicleState::from_vector(&self.x0)];
        let actions = vec![VehicleAction::zeros(); self.horizon];
        for k in 0..self.horizon {
            let next = self.model.step(&states[k], &actions[k], 1.0).unwrap();
            states.push(next);
        }
        Trajectory {
            states,
            actions,
            dt: 1.0,
        }
    }
}

fn random_matrix7(rng: &mut SplitMix64) -> StateMatrix {
    StateMatrix::from_fn(|_, _| rng.range(-1.0, 1.0))
}

fn controllable(a: &StateMatrix, b: &InputMatrix) -> bool {
    // Kalman controllability matrix [B, AB, ..., A^6 B].
    let mut ctrl = nalgebra::SMatrix::<f64, 7, 14>::zeros();
    let mut power = *b;
    for i in 0..7 {
        ctrl.view_mut((0, 2 * i), (7, 2)).copy_from(&power);
        power = a * power;
    }
    ctrl.svd(false, false).rank(1e-8) == 7
}

/// Deterministic random controllable LQR instance.
pub fn random_lqr_instance(seed: u64, horizon: usize) -> LqrInstance {
    let mut seed = seed;
    loop {
        let mut rng = SplitMix64(seed);
        let mut a = random_matrix7(&mut rng);
        // Scale so the infinity norm (and hence the spectral radius) is 0.9;
        // keeps zero-action rollouts bounded.
        let inf_norm = (0..7)
            .map(|i| (0..7).map(|j| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        a *= 0.9 / inf_norm;
        let b = InputMatrix::from_fn(|_, _| rng.range(-1.0, 1.0));

        let m = random_matrix7(&mut rng);
        let q = m.transpose() * m / 7.0 + StateMatrix::identity() * 0.1;
        let n2 = ActionMatrix::from_fn(|_, _| rng.range(-1.0, 1.0));
        let r = n2.transpose() * n2 / 2.0 + ActionMatrix::identity() * 0.5;
        let mf = random_matrix7(&mut rng);
        let qf = mf.transpose() * mf / 7.0 + StateMatrix::identity() * 0.1;

        let mut x0 = StateVector::from_fn(|_, _| rng.range(-2.0, 2.0));
        if x0.norm() < 0.5 {
            x0 *= 0.5 / x0.norm().max(1e-9);
        }

        if controllable(&a, &b) {
            return LqrInstance {
                model: LinearModel { a, b },
                objective: QuadraticObjective { q, r, qf },
                x0,
                horizon,
            };
        }
        seed = seed.wrapping_add(0x1234_5678_9abc_def1);
    }
}
