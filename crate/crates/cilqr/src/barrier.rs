//! Standard and relaxed logarithmic barrier functions.
//!
//! Constraints `g(x, u) < 0` enter the optimization as barrier costs. The
//! standard log barrier is only defined on the feasible side; the relaxed
//! form stitches a polynomial branch onto it at `g = -epsilon` so that it is
//! finite (and twice differentiable, for even relaxation order) everywhere,
//! which lets the solver start from infeasible trajectories.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum BarrierError {
    /// Standard barrier evaluated at g >= 0.
    DomainViolation {
        g: f64,
    },
    InvalidSharpness(f64),
    /// Relaxation order must be an even integer >= 2.
    InvalidOrder(u32),
    InvalidEpsilon(f64),
}

impl fmt::Display for BarrierError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DomainViolation { g } => {
                write!(f, "standard log barrier undefined for g = {g} >= 0")
            }
            Self::InvalidSharpness(t) => write!(f, "barrier sharpness must be > 0, got {t}"),
            Self::InvalidOrder(k) => {
                write!(f, "relaxation order must be an even integer >= 2, got {k}")
            }
            Self::InvalidEpsilon(e) => write!(f, "relaxation width must be > 0, got {e}"),
        }
    }
}

impl std::error::Error for BarrierError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    /// Sharpness t (> 0); larger tracks the indicator function more closely.
    pub t: f64,
    /// Relaxation order k (even integer >= 2, which keeps the stitched
    /// function C^2 and the polynomial branch convex).
    pub k: u32,
    /// Relaxation width epsilon (> 0), in the constraint's native unit.
    pub epsilon: f64,
}

impl BarrierParams {
    pub fn new(t: f64, k: u32, epsilon: f64) -> Result<Self, BarrierError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(BarrierError::InvalidSharpness(t));
        }
        if k < 2 || k % 2 != 0 {
            return Err(BarrierError::InvalidOrder(k));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(BarrierError::InvalidEpsilon(epsilon));
        }
        Ok(Self { t, k, epsilon })
    }
}

/// `-(1/t) ln(-g)`, defined only for g < 0.
pub fn standard_log_barrier(g: f64, t: f64) -> Result<f64, BarrierError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(BarrierError::InvalidSharpness(t));
    }
    if g >= 0.0 {
        return Err(BarrierError::DomainViolation { g });
    }
    Ok(-(-g).ln() / t)
}

/// Relaxed log barrier, finite for every finite g.
///
/// For `g < -epsilon` this is exactly the standard barrier; at and beyond
/// `-epsilon` a degree-k polynomial continues it with matching value and
/// first two derivatives.
pub fn relaxed_log_barrier(g: f64, params: &BarrierParams) -> f64 {
    let BarrierParams { t, k, epsilon } = *params;
    if g < -epsilon {
        -(-g).ln() / t
    } else {
        let kf = f64::from(k);
        let z = (-g - kf * epsilon) / ((kf - 1.0) * epsilon);
        (kf - 1.0) / (t * kf) * (z.powi(k as i32) - 1.0) - epsilon.ln() / t
    }
}

/// First and second derivatives of [`relaxed_log_barrier`] with respect to g.
///
/// The first derivative is strictly positive everywhere (the barrier is
/// monotone in g) and the second is nonnegative for even k (convex).
pub fn relaxed_log_barrier_derivatives(g: f64, params: &BarrierParams) -> (f64, f64) {
    let BarrierParams { t, k, epsilon } = *params;
    if g < -epsilon {
        (-1.0 / (t * g), 1.0 / (t * g * g))
    } else {
        let kf = f64::from(k);
        let z = (-g - kf * epsilon) / ((kf - 1.0) * epsilon);
        let d1 = -z.powi(k as i32 - 1) / (t * epsilon);
        let d2 = z.powi(k as i32 - 2) / (t * epsilon * epsilon);
        (d1, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: f64, epsilon: f64) -> BarrierParams {
        BarrierParams::new(t, 2, epsilon).unwrap()
    }

    #[test]
    fn standard_barrier_known_values() {
        assert_eq!(standard_log_barrier(-1.0, 5.0).unwrap(), 0.0);
        assert!((standard_log_barrier(-std::f64::consts::E, 1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            standard_log_barrier(0.0, 5.0),
            Err(BarrierError::DomainViolation { .. })
        ));
        assert!(standard_log_barrier(1.0, 5.0).is_err());
    }

    #[test]
    fn relaxed_barrier_known_values() {
        let p = params(5.0, 0.1);
        assert_eq!(relaxed_log_barrier(-1.0, &p), 0.0);
        // Both branches meet at g = -epsilon with value -(1/t) ln(epsilon).
        assert!((relaxed_log_barrier(-0.1, &p) - 0.4605170185988091).abs() < 1e-15);
        // Polynomial branch at g = 0.
        assert!((relaxed_log_barrier(0.0, &p) - 0.7605170185988092).abs() < 1e-15);
    }

    #[test]
    fn relaxed_matches_standard_well_inside_the_feasible_region() {
        let p = params(5.0, 0.1);
        for g in [-0.2, -0.5, -1.0, -3.0, -100.0] {
            assert_eq!(
                relaxed_log_barrier(g, &p),
                standard_log_barrier(g, p.t).unwrap(),
                "g={g}"
            );
        }
    }

    #[test]
    fn derivative_known_value() {
        let p = params(5.0, 0.1);
        let (d1, _) = relaxed_log_barrier_derivatives(-1.0, &p);
        assert!((d1 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn derivatives_continuous_at_stitch_point() {
        let p = params(5.0, 0.1);
        let (d1m, d2m) = relaxed_log_barrier_derivatives(-p.epsilon - 1e-10, &p);
        let (d1p, d2p) = relaxed_log_barrier_derivatives(-p.epsilon + 1e-10, &p);
        assert!((d1m - d1p).abs() < 1e-6);
        assert!((d2m - d2p).abs() < 1e-6);
    }

    #[test]
    fn finite_and_positive_derivatives_when_violated() {
        let p = params(5.0, 0.1);
        let (d1, d2) = relaxed_log_barrier_derivatives(1.0, &p);
        assert!(d1.is_finite() && d1 > 0.0);
        assert!(d2.is_finite() && d2 > 0.0);
        assert!(relaxed_log_barrier(1.0, &p).is_finite());
    }

    #[test]
    fn branch_values_and_derivatives_match_at_stitch() {
        // Evaluate both closed forms exactly at g = -epsilon over a (t, eps)
        // grid; value, first, and second derivatives must coincide.
        for &t in &[0.5, 1.0, 5.0, 20.0] {
            for &eps in &[0.01, 0.05, 0.1, 1.0] {
                let p = params(t, eps);
                let g = -eps;
                let log_val = -(-g).ln() / t;
                let kf = 2.0;
                let z = (-g - kf * eps) / ((kf - 1.0) * eps);
                let poly_val = (kf - 1.0) / (t * kf) * (z * z - 1.0) - eps.ln() / t;
                assert!((log_val - poly_val).abs() < 1e-8, "value t={t} eps={eps}");

                let log_d1 = -1.0 / (t * g);
                let poly_d1 = -z / (t * eps);
                assert!((log_d1 - poly_d1).abs() < 1e-8, "d1 t={t} eps={eps}");

                let log_d2 = 1.0 / (t * g * g);
                let poly_d2 = 1.0 / (t * eps * eps);
                assert!((log_d2 - poly_d2).abs() < 1e-8, "d2 t={t} eps={eps}");

                // The stitched function agrees with both forms.
                assert!((relaxed_log_barrier(g, &p) - poly_val).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn order_validation() {
        assert!(BarrierParams::new(5.0, 3, 0.1).is_err());
        assert!(BarrierParams::new(5.0, 0, 0.1).is_err());
        assert!(BarrierParams::new(5.0, 4, 0.1).is_ok());
        assert!(BarrierParams::new(-1.0, 2, 0.1).is_err());
        assert!(BarrierParams::new(5.0, 2, 0.0).is_err());
    }

    #[test]
    fn higher_even_order_still_stitches() {
        let p = BarrierParams::new(5.0, 4, 0.1).unwrap();
        let below = relaxed_log_barrier(-0.1 - 1e-9, &p);
        let above = relaxed_log_barrier(-0.1 + 1e-9, &p);
        assert!((below - above).abs() < 1e-7);
        let (d1, d2) = relaxed_log_barrier_derivatives(0.5, &p);
        assert!(d1 > 0.0 && d2 >= 0.0);
    }
}
