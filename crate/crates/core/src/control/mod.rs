//! Tracking controllers for the pendulum axis.
//!
//! Two controllers are provided. The classical one cancels the known
//! nonlinearity exactly ([`fl_control`]) and places two closed-loop poles
//! with an outer PD law ([`fl_outer_v`]). The adaptive one
//! ([`AdaptiveController`]) knows only the structure of the plant: it
//! estimates the drift and input gain with fuzzy approximators and adjusts
//! them online from the tracking error through a Lyapunov-shaped law.
//!
//! Sign conventions differ between the two laws and are easy to trip over:
//!
//! * [`fl_outer_v`] takes `e = y - ym` and subtracts the gain terms.
//! * The adaptive law takes `e = ym - y` (error vector `(e, e', ...)`) and
//!   adds its gain term.
//!
//! Both choices make the feedback oppose the error; each function documents
//! the convention it expects.
//!
//! All operations are pure given their inputs; controller state is owned by
//! one simulation loop at a time, and independent runs can proceed in
//! parallel.

mod adaptive;
mod lyapunov;

pub use adaptive::{
    adaptation_rates, adaptive_control, paper_fixed_p, paper_gains, stable_gains,
    AdaptiveController, AdaptiveControllerConfig, AdaptiveLawOutput, PMode, StepCommand,
};
pub use lyapunov::{
    companion_matrix, inf_norm, lyapunov_residual, require_hurwitz, solve_lyapunov, spd_warnings,
    worst_eigenvalue,
};

use crate::plant::{true_f, StateSpaceCoeffs, StateVector};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("matrix is not Hurwitz: eigenvalue {re}{im:+}i has non-negative real part, so no positive-definite Lyapunov solution exists")]
    NotHurwitz { re: f64, im: f64 },
    #[error("{name} is not symmetric (asymmetry {asym:.3e})")]
    NotSymmetric { name: &'static str, asym: f64 },
    #[error("{name} is not positive definite (smallest eigenvalue {min_eig:.4e})")]
    NotPositiveDefinite { name: &'static str, min_eig: f64 },
    #[error("Lyapunov system is singular")]
    SingularLyapunovSystem,
    #[error("Lyapunov residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("{what}")]
    DimensionMismatch { what: &'static str },
    #[error("invalid controller configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Fuzzy(#[from] crate::fuzzy::FuzzyError),
}

/// Outer PD loop of the classical controller. `s^2 + kd*s + kp` must be
/// Hurwitz, which for positive gains it always is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FLControllerConfig {
    pub kd: f64,
    pub kp: f64,
}

impl Default for FLControllerConfig {
    /// Gains 2 and 8 put the outer poles at -1 +- sqrt(7) i.
    fn default() -> Self {
        Self { kd: 2.0, kp: 8.0 }
    }
}

impl FLControllerConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.kd > 0.0) || !self.kd.is_finite() {
            return Err(ControlError::BadConfig(format!("kd = {} must be > 0", self.kd)));
        }
        if !(self.kp > 0.0) || !self.kp.is_finite() {
            return Err(ControlError::BadConfig(format!("kp = {} must be > 0", self.kp)));
        }
        Ok(())
    }
}

/// Virtual input for the linearized double integrator:
/// `v = ym'' - kd*edot - kp*e` with `e = y - ym`.
pub fn fl_outer_v(e: f64, edot: f64, ym_ddot: f64, cfg: &FLControllerConfig) -> f64 {
    ym_ddot - cfg.kd * edot - cfg.kp * e
}

/// Cancels the pendulum-axis drift and injects `v`:
/// `u = (-f(x) + v) / b2`, so the output obeys `y'' = v` exactly.
///
/// `c.b2` is nonzero for any coefficients produced by `derive_coefficients`;
/// hand-built coefficients with `b2 = 0` are a caller bug.
pub fn fl_control(c: &StateSpaceCoeffs, x: &StateVector, v: f64) -> f64 {
    assert!(c.b2 != 0.0, "input gain b2 must be nonzero");
    (-true_f(c, x) + v) / c.b2
}

/// Sinusoidal reference `ym(t) = amplitude * sin(frequency * t)` with exact
/// analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSignal {
    /// Peak angle (rad).
    pub amplitude: f64,
    /// Angular frequency (rad/s).
    pub frequency: f64,
}

impl Default for ReferenceSignal {
    fn default() -> Self {
        Self {
            amplitude: 0.2,
            frequency: 1.0,
        }
    }
}

impl ReferenceSignal {
    /// `[ym, ym', ym'', ym''', ym'''']` at time `t`.
    pub fn derivatives(&self, t: f64) -> [f64; 5] {
        let (a, w) = (self.amplitude, self.frequency);
        let (s, c) = (w * t).sin_cos();
        [
            a * s,
            a * w * c,
            -a * w * w * s,
            -a * w * w * w * c,
            a * w * w * w * w * s,
        ]
    }
}
