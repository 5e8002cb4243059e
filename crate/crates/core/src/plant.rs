//! Rotary inverted pendulum model.
//!
//! The plant is a pendulum mounted on a motor-driven rotating base. State
//! convention, used everywhere in this crate:
//!
//! * `x[0]` base angle (rad)
//! * `x[1]` base angular velocity (rad/s)
//! * `x[2]` pendulum angle from upright (rad), the controlled output
//! * `x[3]` pendulum angular velocity (rad/s)
//!
//! Dynamics:
//!
//! ```text
//! x0' = x1
//! x1' = a1*x1 + b1*u
//! x2' = x3
//! x3' = a2*x1 + a3*sin(x2) + a4*x3 + b2*u
//! ```
//!
//! The six coefficients come from eight physical parameters via
//! [`derive_coefficients`]. Angles are kept unwrapped; nothing here reduces
//! them mod 2*pi.

use thiserror::Error;

/// Plant state `[base angle, base rate, pendulum angle, pendulum rate]`.
pub type StateVector = [f64; 4];

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("physical parameter {name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("backward difference needs dt > 0, got {0}")]
    NonPositiveDt(f64),
    #[error("unknown physical parameter name {0:?}")]
    UnknownParameter(String),
}

/// Names of the eight physical parameters, for schedules and config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamName {
    M1,
    K1,
    Ap,
    J1,
    G,
    L1,
    C1,
    Kp,
}

impl ParamName {
    pub const ALL: [ParamName; 8] = [
        ParamName::M1,
        ParamName::K1,
        ParamName::Ap,
        ParamName::J1,
        ParamName::G,
        ParamName::L1,
        ParamName::C1,
        ParamName::Kp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ParamName::M1 => "m1",
            ParamName::K1 => "k1",
            ParamName::Ap => "a_p",
            ParamName::J1 => "j1",
            ParamName::G => "g",
            ParamName::L1 => "l1",
            ParamName::C1 => "c1",
            ParamName::Kp => "k_p",
        }
    }
}

impl std::str::FromStr for ParamName {
    type Err = PlantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| PlantError::UnknownParameter(s.to_string()))
    }
}

impl std::fmt::Display for ParamName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Physical constants of the rig.
///
/// Invariants, checked by [`PhysicalParams::validate`]: `j1`, `m1`, `l1`
/// strictly positive; `k_p`, `k1` nonzero (a zero coupling gain would
/// disconnect the pendulum axis from the input and make the model useless
/// for control).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Pendulum mass (kg).
    pub m1: f64,
    /// Base-to-pendulum coupling gain.
    pub k1: f64,
    /// Base velocity decay rate (1/s).
    pub a_p: f64,
    /// Pendulum moment of inertia (kg m^2).
    pub j1: f64,
    /// Gravitational acceleration (m/s^2).
    pub g: f64,
    /// Distance from pivot to pendulum centre of mass (m).
    pub l1: f64,
    /// Viscous friction coefficient at the pendulum pivot.
    pub c1: f64,
    /// Motor/amplifier input gain.
    pub k_p: f64,
}

impl PhysicalParams {
    /// Bench rig constants. All defaults and the CLI start from these.
    pub fn nominal() -> Self {
        Self {
            m1: 8.6184e-2,
            k1: 1.9e-3,
            a_p: 33.04,
            j1: 1.031e-3,
            g: 9.8066,
            l1: 0.113,
            c1: 2.979e-3,
            k_p: 74.89,
        }
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::M1 => self.m1,
            ParamName::K1 => self.k1,
            ParamName::Ap => self.a_p,
            ParamName::J1 => self.j1,
            ParamName::G => self.g,
            ParamName::L1 => self.l1,
            ParamName::C1 => self.c1,
            ParamName::Kp => self.k_p,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        match name {
            ParamName::M1 => self.m1 = value,
            ParamName::K1 => self.k1 = value,
            ParamName::Ap => self.a_p = value,
            ParamName::J1 => self.j1 = value,
            ParamName::G => self.g = value,
            ParamName::L1 => self.l1 = value,
            ParamName::C1 => self.c1 = value,
            ParamName::Kp => self.k_p = value,
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let positive = [
            ("j1", self.j1),
            ("m1", self.m1),
            ("l1", self.l1),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(PlantError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        let nonzero = [("k_p", self.k_p), ("k1", self.k1)];
        for (name, value) in nonzero {
            if value == 0.0 || !value.is_finite() {
                return Err(PlantError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and nonzero",
                });
            }
        }
        for (name, value) in [("a_p", self.a_p), ("g", self.g), ("c1", self.c1)] {
            if !value.is_finite() {
                return Err(PlantError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }
}

/// Coefficients of the four-state model. See the module docs for the
/// equations they enter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpaceCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Maps physical parameters to state-space coefficients:
///
/// ```text
/// a1 = -a_p          a2 = -k1*a_p/j1    a3 = m1*g*l1/j1
/// a4 = -c1/j1        b1 = k_p           b2 = k1*k_p/j1
/// ```
///
/// By construction `a1 - a2*b1/b2 = 0` exactly in real arithmetic: the base
/// dynamics are a scalar multiple of the base-driven part of the pendulum
/// axis. [`zero_dynamics_residual`] exposes the floating-point residual.
pub fn derive_coefficients(p: &PhysicalParams) -> Result<StateSpaceCoeffs, PlantError> {
    p.validate()?;
    Ok(StateSpaceCoeffs {
        a1: -p.a_p,
        a2: -p.k1 * p.a_p / p.j1,
        a3: p.m1 * p.g * p.l1 / p.j1,
        a4: -p.c1 / p.j1,
        b1: p.k_p,
        b2: p.k1 * p.k_p / p.j1,
    })
}

/// Right-hand side of the plant ODE at state `x` under input `u`.
pub fn plant_derivative(c: &StateSpaceCoeffs, x: &StateVector, u: f64) -> StateVector {
    [
        x[1],
        c.a1 * x[1] + c.b1 * u,
        x[3],
        c.a2 * x[1] + c.a3 * x[2].sin() + c.a4 * x[3] + c.b2 * u,
    ]
}

/// Drift term of the pendulum axis: `a2*x1 + a3*sin(x2) + a4*x3`.
///
/// This is the function the adaptive controller estimates online; the
/// simulator uses the exact value for its plant and for controller variants
/// that are granted full model knowledge.
pub fn true_f(c: &StateSpaceCoeffs, x: &StateVector) -> f64 {
    c.a2 * x[1] + c.a3 * x[2].sin() + c.a4 * x[3]
}

/// Input gain of the pendulum axis. Constant for this plant.
pub fn true_g(c: &StateSpaceCoeffs) -> f64 {
    c.b2
}

/// `a1 - a2*b1/b2`, which is identically zero for coefficients produced by
/// [`derive_coefficients`]. A large residual means the coefficients were
/// edited by hand into something the model family cannot represent.
pub fn zero_dynamics_residual(c: &StateSpaceCoeffs) -> f64 {
    c.a1 - c.a2 * c.b1 / c.b2
}

/// First-order backward difference `(curr - prev) / dt`.
pub fn backward_difference(prev: f64, curr: f64, dt: f64) -> Result<f64, PlantError> {
    if !(dt > 0.0) {
        return Err(PlantError::NonPositiveDt(dt));
    }
    Ok((curr - prev) / dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn nominal_coefficients() {
        let c = derive_coefficients(&PhysicalParams::nominal()).unwrap();
        // a1 and b1 are copies of physical parameters, exact.
        assert_eq!(c.a1, -33.04);
        assert_eq!(c.b1, 74.89);
        // The rest were computed independently from the nominal constants.
        assert_relative_eq!(c.a2, -60.88845780795344, max_relative = 1e-13);
        assert_relative_eq!(c.a3, 92.63282020096993, max_relative = 1e-13);
        assert_relative_eq!(c.a4, -2.889427740058196, max_relative = 1e-13);
        assert_relative_eq!(c.b2, 138.0126091173618, max_relative = 1e-13);
    }

    #[test]
    fn unit_parameters_map_plainly() {
        let p = PhysicalParams {
            m1: 1.0,
            k1: 1.0,
            a_p: 1.0,
            j1: 1.0,
            g: 1.0,
            l1: 1.0,
            c1: 1.0,
            k_p: 1.0,
        };
        let c = derive_coefficients(&p).unwrap();
        assert_eq!(
            (c.a1, c.a2, c.a3, c.a4, c.b1, c.b2),
            (-1.0, -1.0, 1.0, -1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut p = PhysicalParams::nominal();
        p.j1 = 0.0;
        assert!(matches!(
            derive_coefficients(&p),
            Err(PlantError::InvalidParameter { name: "j1", .. })
        ));
        let mut p = PhysicalParams::nominal();
        p.k1 = 0.0;
        assert!(derive_coefficients(&p).is_err());
        let mut p = PhysicalParams::nominal();
        p.m1 = -1.0;
        assert!(derive_coefficients(&p).is_err());
        let mut p = PhysicalParams::nominal();
        p.g = f64::NAN;
        assert!(derive_coefficients(&p).is_err());
    }

    #[test]
    fn derivative_at_rest_is_zero() {
        let c = derive_coefficients(&PhysicalParams::nominal()).unwrap();
        assert_eq!(plant_derivative(&c, &[0.0; 4], 0.0), [0.0; 4]);
    }

    #[test]
    fn derivative_matches_hand_expansion() {
        let c = derive_coefficients(&PhysicalParams::nominal()).unwrap();
        let x = [0.1, -0.2, 0.3, 0.4];
        let u = 0.5;
        let dx = plant_derivative(&c, &x, u);
        assert_eq!(dx[0], -0.2);
        assert_relative_eq!(dx[1], c.a1 * -0.2 + c.b1 * 0.5, max_relative = 1e-15);
        assert_eq!(dx[2], 0.4);
        assert_relative_eq!(
            dx[3],
            c.a2 * -0.2 + c.a3 * (0.3f64).sin() + c.a4 * 0.4 + c.b2 * 0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn gravity_term_at_thirty_degrees() {
        // a3*sin(pi/6) = a3/2, computed independently from nominal constants.
        let c = derive_coefficients(&PhysicalParams::nominal()).unwrap();
        let x = [0.0, 0.0, std::f64::consts::FRAC_PI_6, 0.0];
        assert_relative_eq!(true_f(&c, &x), 46.316410100484966, max_relative = 1e-12);
        assert_eq!(true_g(&c), c.b2);
    }

    #[test]
    fn zero_dynamics_residual_vanishes_nominally() {
        let c = derive_coefficients(&PhysicalParams::nominal()).unwrap();
        assert_abs_diff_eq!(zero_dynamics_residual(&c), 0.0, epsilon = 1e-12 * c.a1.abs());
        // Hand-edited coefficients that break the identity are detected.
        let broken = StateSpaceCoeffs { a2: -50.0, ..c };
        assert!(zero_dynamics_residual(&broken).abs() > 1.0);
    }

    #[test]
    fn param_names_round_trip() {
        let p = PhysicalParams::nominal();
        for name in ParamName::ALL {
            assert_eq!(name.as_str().parse::<ParamName>().unwrap(), name);
            let mut q = p;
            q.set(name, 0.5);
            assert_eq!(q.get(name), 0.5);
        }
        assert!("mass".parse::<ParamName>().is_err());
        assert_eq!(ParamName::Kp.to_string(), "k_p");
    }

    #[test]
    fn backward_difference_examples() {
        assert_eq!(backward_difference(1.0, 2.0, 0.5).unwrap(), 2.0);
        assert!(backward_difference(1.0, 2.0, 0.0).is_err());
        assert!(backward_difference(1.0, 2.0, -0.1).is_err());
        // Sampling sin(t) at t = 1 with dt = 1e-3 recovers cos(1) to O(dt).
        let dt = 1e-3f64;
        let d = backward_difference((1.0 - dt).sin(), 1.0f64.sin(), dt).unwrap();
        assert_abs_diff_eq!(d, 1.0f64.cos(), epsilon = 1e-3);
        // Halving dt roughly halves the error (first-order accuracy).
        let d2 = backward_difference((1.0 - dt / 2.0).sin(), 1.0f64.sin(), dt / 2.0).unwrap();
        let (e1, e2) = ((d - 1.0f64.cos()).abs(), (d2 - 1.0f64.cos()).abs());
        assert!(e2 < 0.6 * e1 && e2 > 0.4 * e1, "e1={e1} e2={e2}");
    }

    proptest! {
        // The base row is a scalar multiple of the base-driven part of the
        // pendulum row, so the residual stays at rounding level for any
        // valid parameter set.
        #[test]
        fn residual_stays_small_for_valid_params(
            m1 in 1e-4f64..1e3,
            k1 in prop_oneof![1e-6f64..1e3, -1e3f64..-1e-6],
            a_p in -1e3f64..1e3,
            j1 in 1e-6f64..1e3,
            g in -1e2f64..1e2,
            l1 in 1e-4f64..1e2,
            c1 in -1e2f64..1e2,
            k_p in prop_oneof![1e-6f64..1e3, -1e3f64..-1e-6],
        ) {
            let p = PhysicalParams { m1, k1, a_p, j1, g, l1, c1, k_p };
            let c = derive_coefficients(&p).unwrap();
            prop_assert!(zero_dynamics_residual(&c).abs() <= 1e-12 * c.a1.abs().max(1.0));
        }

        // f is linear in x1 and x3 and the derivative's pendulum row equals
        // f + g*u for every state.
        #[test]
        fn pendulum_row_is_f_plus_gu(
            x0 in -10.0f64..10.0, x1 in -10.0f64..10.0,
            x2 in -10.0f64..10.0, x3 in -10.0f64..10.0,
            u in -10.0f64..10.0,
        ) {
            let c = derive_coefficients(&PhysicalParams::nominal()).unwrap();
            let x = [x0, x1, x2, x3];
            let dx = plant_derivative(&c, &x, u);
            let expected = true_f(&c, &x) + true_g(&c) * u;
            prop_assert!((dx[3] - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
    }
}
