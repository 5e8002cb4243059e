//! Fixed-step classical Runge-Kutta integration.

use super::SimError;

/// Derivative callback: `field(t, state, out)` fills `out` with the state
/// derivative. It may fail (e.g. a schedule driving a parameter out of
/// range at that time).
pub trait Field: FnMut(f64, &[f64], &mut [f64]) -> Result<(), SimError> {}
impl<F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), SimError>> Field for F {}

/// Reusable stage buffers so the hot loop does not allocate.
#[derive(Debug, Clone)]
pub struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }
}

/// One classical 4-stage step of `s' = field(t, s)` from `t` over `dt > 0`.
///
/// Fails with the stage timestamp if any stage derivative is non-finite.
pub fn rk4_step(field: &mut impl Field, s: &[f64], t: f64, dt: f64) -> Result<Vec<f64>, SimError> {
    let mut ws = Rk4Workspace::new(s.len());
    let mut out = vec![0.0; s.len()];
    rk4_step_into(field, s, t, dt, &mut ws, &mut out)?;
    Ok(out)
}

/// Allocation-free variant of [`rk4_step`] writing into `out`.
pub fn rk4_step_into(
    field: &mut impl Field,
    s: &[f64],
    t: f64,
    dt: f64,
    ws: &mut Rk4Workspace,
    out: &mut [f64],
) -> Result<(), SimError> {
    assert!(dt > 0.0, "rk4 step needs dt > 0");
    let dim = s.len();
    debug_assert_eq!(out.len(), dim);

    let stage = |field: &mut dyn FnMut(f64, &[f64], &mut [f64]) -> Result<(), SimError>,
                 st: f64,
                 sv: &[f64],
                 k: &mut [f64]|
     -> Result<(), SimError> {
        field(st, sv, k)?;
        if k.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Diverged {
                t: st,
                reason: "non-finite state derivative".into(),
                trajectory: None,
            });
        }
        Ok(())
    };

    stage(field, t, s, &mut ws.k1)?;
    for i in 0..dim {
        ws.tmp[i] = s[i] + 0.5 * dt * ws.k1[i];
    }
    stage(field, t + 0.5 * dt, &ws.tmp, &mut ws.k2)?;
    for i in 0..dim {
        ws.tmp[i] = s[i] + 0.5 * dt * ws.k2[i];
    }
    stage(field, t + 0.5 * dt, &ws.tmp, &mut ws.k3)?;
    for i in 0..dim {
        ws.tmp[i] = s[i] + dt * ws.k3[i];
    }
    stage(field, t + dt, &ws.tmp, &mut ws.k4)?;
    for i in 0..dim {
        out[i] = s[i] + dt / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_field_preserves_state() {
        let mut f = |_t: f64, _s: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            Ok(())
        };
        let s = rk4_step(&mut f, &[1.0, -2.0, 3.0], 0.0, 0.1).unwrap();
        assert_eq!(s, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn exponential_decay_one_step() {
        // x' = -x from 1 over dt = 0.1: the four stages reduce to the
        // degree-4 Taylor factor 1 - h + h^2/2 - h^3/6 + h^4/24, i.e.
        // 0.9048375 exactly in real arithmetic.
        let mut f = |_t: f64, s: &[f64], out: &mut [f64]| {
            out[0] = -s[0];
            Ok(())
        };
        let s = rk4_step(&mut f, &[1.0], 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(s[0], 0.9048375, epsilon = 1e-15);
        // Close to the exact flow, far from the Euler value 0.9.
        assert_abs_diff_eq!(s[0], (-0.1f64).exp(), epsilon = 1e-7);
    }

    #[test]
    fn non_finite_stage_is_reported_with_time() {
        let mut f = |t: f64, _s: &[f64], out: &mut [f64]| {
            out[0] = if t > 1.0 { f64::NAN } else { 1.0 };
            Ok(())
        };
        let err = rk4_step(&mut f, &[0.0], 1.0, 0.5).unwrap_err();
        match err {
            SimError::Diverged { t, .. } => assert!(t > 1.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    proptest! {
        // The quadrature underlying RK4 is exact for cubic integrands, so
        // x' = 3t^2 and x' = 4t^3 integrate to t^3 and t^4 without
        // truncation error.
        #[test]
        fn exact_on_low_degree_polynomials(
            t0 in -2.0f64..2.0,
            dt in 0.01f64..1.0,
        ) {
            let mut f = |t: f64, _s: &[f64], out: &mut [f64]| {
                out[0] = 3.0 * t * t;
                out[1] = 4.0 * t * t * t;
                Ok(())
            };
            let t1 = t0 + dt;
            let s = rk4_step(&mut f, &[t0 * t0 * t0, t0 * t0 * t0 * t0], t0, dt).unwrap();
            prop_assert!((s[0] - t1 * t1 * t1).abs() < 1e-10);
            prop_assert!((s[1] - t1 * t1 * t1 * t1).abs() < 1e-10);
        }
    }
}
