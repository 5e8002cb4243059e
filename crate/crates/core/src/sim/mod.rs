//! Closed-loop simulation: fixed-step integration of the plant (and, for
//! the adaptive controller, the parameter estimates) under a zero-order
//! hold control loop.
//!
//! Timing model: the input is computed once per sample from the state at
//! `t_k = k*dt` and held constant while the continuous dynamics integrate
//! to `t_{k+1}`. The adaptation laws are part of the integrated ODE (one
//! augmented state `plant ⊕ theta_f ⊕ theta_g`), not side updates, so the
//! integrator's order is preserved.
//!
//! Every run owns all of its mutable state; independent runs can execute
//! concurrently without coordination.

mod rk4;
mod schedule;

pub use rk4::{rk4_step, rk4_step_into, Rk4Workspace};
pub use schedule::{
    apply_schedule, default_uncertainty_schedule, ParameterSchedule, ScheduleEvent, ScheduleKind,
};

use crate::control::{
    fl_control, fl_outer_v, AdaptiveController, AdaptiveControllerConfig, ControlError,
    FLControllerConfig, ReferenceSignal,
};
use crate::plant::{
    backward_difference, derive_coefficients, plant_derivative, PhysicalParams, StateVector,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario invalid: {0}")]
    ScenarioInvalid(String),
    #[error("simulation diverged at t = {t:.4} s ({reason})")]
    Diverged {
        t: f64,
        reason: String,
        /// Partial trajectory up to the last healthy sample, for diagnosis.
        trajectory: Option<Box<Trajectory>>,
    },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("trajectory is empty")]
    EmptyTrajectory,
}

/// Magnitude beyond which a state is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Default settle threshold on |e| (rad).
pub const SETTLE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerChoice {
    Classical(FLControllerConfig),
    Adaptive(AdaptiveControllerConfig),
}

/// What the controllers are allowed to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementMode {
    /// Controllers read the integrator state directly.
    TrueState,
    /// Controllers see x1 and x3 directly but must reconstruct the rates by
    /// backward differences of consecutive samples (first sample uses the
    /// true rates).
    BackwardDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: PhysicalParams,
    pub controller: ControllerChoice,
    pub reference: ReferenceSignal,
    pub initial_state: StateVector,
    /// Sample/integration step (s).
    pub dt: f64,
    pub t_end: f64,
    pub schedule: ParameterSchedule,
    pub measurement: MeasurementMode,
    /// Only consumed by randomized tooling (selftest); the simulation
    /// itself is deterministic.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// Starts on the reference trajectory: x3 = ym(0) = 0 and x4 = ẏm(0)
    /// for the default 0.2 rad, 1 rad/s sinusoid. A rest start (all zeros)
    /// works too but begins with an avoidable rate-mismatch transient; the
    /// plant has a transmission zero at s = 0 from input to output, so
    /// transient-induced error offsets cost sustained input drift.
    fn default() -> Self {
        Self {
            params: PhysicalParams::nominal(),
            controller: ControllerChoice::Classical(FLControllerConfig::default()),
            reference: ReferenceSignal::default(),
            initial_state: [0.0, 0.0, 0.0, 0.2],
            dt: 1e-3,
            t_end: 20.0,
            schedule: ParameterSchedule::default(),
            measurement: MeasurementMode::TrueState,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.params
            .validate()
            .map_err(|e| SimError::ScenarioInvalid(e.to_string()))?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimError::ScenarioInvalid(format!(
                "dt = {} must be > 0",
                self.dt
            )));
        }
        if !(self.t_end > self.dt) || !self.t_end.is_finite() {
            return Err(SimError::ScenarioInvalid(format!(
                "t_end = {} must exceed dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.initial_state.iter().any(|v| !v.is_finite()) {
            return Err(SimError::ScenarioInvalid(
                "initial state must be finite".into(),
            ));
        }
        self.schedule.validate(&self.params)?;
        match &self.controller {
            ControllerChoice::Classical(c) => c.validate()?,
            ControllerChoice::Adaptive(c) => c.validate()?,
        }
        if !(self.reference.amplitude.is_finite() && self.reference.frequency.is_finite()) {
            return Err(SimError::ScenarioInvalid(
                "reference amplitude and frequency must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Number of integration steps; the trajectory has one more record.
    /// Robust to `t_end/dt` landing just under an integer.
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }
}

/// One trajectory sample. `e = ym - x3`; the theta norms are infinity
/// norms (zero for the classical controller); `multipliers` holds each
/// schedule event's multiplier at this time, in event order.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub x: StateVector,
    pub u: f64,
    pub ym: f64,
    pub e: f64,
    pub theta_f_norm: f64,
    pub theta_g_norm: f64,
    pub clamped: bool,
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub records: Vec<Record>,
    /// Construction-time diagnostics (e.g. fixed-matrix mode violations).
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Tracking-error summary. The "final window" is the last quarter of the
/// records (steady state for the default 20 s horizon).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// (min, max) of `e` over the final window.
    pub band: (f64, f64),
    pub rms_full: f64,
    pub rms_final: f64,
    /// Over the whole run.
    pub max_abs_e: f64,
    /// First time after which |e| stays below `settle_threshold`; `None`
    /// if the run never settles.
    pub settle_time: Option<f64>,
    pub settle_threshold: f64,
}

pub fn compute_metrics(traj: &Trajectory) -> Result<Metrics, SimError> {
    compute_metrics_with_threshold(traj, SETTLE_THRESHOLD)
}

pub fn compute_metrics_with_threshold(
    traj: &Trajectory,
    settle_threshold: f64,
) -> Result<Metrics, SimError> {
    if traj.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    let n = traj.len();
    let window_start = 3 * (n - 1) / 4;
    let rms = |records: &[Record]| -> f64 {
        (records.iter().map(|r| r.e * r.e).sum::<f64>() / records.len() as f64).sqrt()
    };
    let final_window = &traj.records[window_start..];
    let band = final_window.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), r| (lo.min(r.e), hi.max(r.e)),
    );
    let max_abs_e = traj
        .records
        .iter()
        .fold(0.0f64, |m, r| m.max(r.e.abs()));
    let settle_time = {
        let last_violation = traj
            .records
            .iter()
            .rposition(|r| r.e.abs() >= settle_threshold);
        match last_violation {
            None => Some(0.0),
            Some(i) if i + 1 == n => None,
            Some(i) => Some(traj.records[i + 1].t),
        }
    };
    Ok(Metrics {
        band,
        rms_full: rms(&traj.records),
        rms_final: rms(final_window),
        max_abs_e,
        settle_time,
        settle_threshold,
    })
}

/// Runs the configured closed loop. The result is deterministic: the same
/// config always produces the identical trajectory. On divergence the
/// partial trajectory rides along in the error.
pub fn run_simulation(cfg: &ScenarioConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let nominal =
        derive_coefficients(&cfg.params).map_err(|e| SimError::ScenarioInvalid(e.to_string()))?;
    match &cfg.controller {
        ControllerChoice::Classical(fl) => run_classical(cfg, *fl, &nominal),
        ControllerChoice::Adaptive(a) => {
            let ctl = AdaptiveController::new(a.clone(), &nominal)?;
            run_adaptive(cfg, ctl)
        }
    }
}

/// The controller-visible state under the configured measurement mode.
fn measured_state(
    x: &StateVector,
    prev: Option<(f64, f64)>,
    dt: f64,
    mode: MeasurementMode,
) -> StateVector {
    match (mode, prev) {
        (MeasurementMode::TrueState, _) | (MeasurementMode::BackwardDifference, None) => *x,
        (MeasurementMode::BackwardDifference, Some((p1, p3))) => [
            x[0],
            backward_difference(p1, x[0], dt).expect("dt > 0"),
            x[2],
            backward_difference(p3, x[2], dt).expect("dt > 0"),
        ],
    }
}

fn guard_state(x: &[f64], t: f64) -> Result<(), SimError> {
    for v in x {
        if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
            return Err(SimError::Diverged {
                t,
                reason: format!("state magnitude {v:.3e} beyond limit"),
                trajectory: None,
            });
        }
    }
    Ok(())
}

fn attach(err: SimError, records: Vec<Record>, warnings: Vec<String>) -> SimError {
    match err {
        SimError::Diverged { t, reason, .. } => SimError::Diverged {
            t,
            reason,
            trajectory: Some(Box::new(Trajectory { records, warnings })),
        },
        other => other,
    }
}

fn run_classical(
    cfg: &ScenarioConfig,
    fl: FLControllerConfig,
    nominal: &crate::plant::StateSpaceCoeffs,
) -> Result<Trajectory, SimError> {
    let steps = cfg.step_count();
    let mut x = cfg.initial_state;
    let mut prev: Option<(f64, f64)> = None;
    let mut records = Vec::with_capacity(steps + 1);
    let mut ws = Rk4Workspace::new(4);
    let mut next = [0.0; 4];

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let d = cfg.reference.derivatives(t);
        let xm = measured_state(&x, prev, cfg.dt, cfg.measurement);
        // Outer loop sees e = y - ym; the model inverse always uses the
        // nominal coefficients, which is exactly what degrades it when the
        // schedule drifts the true plant away.
        let v = fl_outer_v(xm[2] - d[0], xm[3] - d[1], d[2], &fl);
        let u = fl_control(nominal, &xm, v);
        records.push(Record {
            t,
            x,
            u,
            ym: d[0],
            e: d[0] - x[2],
            theta_f_norm: 0.0,
            theta_g_norm: 0.0,
            clamped: false,
            multipliers: cfg.schedule.multipliers(t),
        });
        if k == steps {
            break;
        }
        prev = Some((x[0], x[2]));
        let mut field = |st: f64, s: &[f64], out: &mut [f64]| -> Result<(), SimError> {
            let p = apply_schedule(&cfg.params, &cfg.schedule, st)?;
            let c = derive_coefficients(&p).map_err(|e| SimError::ScenarioInvalid(e.to_string()))?;
            out.copy_from_slice(&plant_derivative(&c, &[s[0], s[1], s[2], s[3]], u));
            Ok(())
        };
        let stepped = rk4_step_into(&mut field, &x, t, cfg.dt, &mut ws, &mut next)
            .and_then(|()| guard_state(&next, t + cfg.dt));
        if let Err(e) = stepped {
            return Err(attach(e, records, Vec::new()));
        }
        x = next;
    }
    Ok(Trajectory {
        records,
        warnings: Vec::new(),
    })
}

fn run_adaptive(cfg: &ScenarioConfig, mut ctl: AdaptiveController) -> Result<Trajectory, SimError> {
    let steps = cfg.step_count();
    let m = ctl.f_hat.rule_count();
    let dim = 4 + 2 * m;
    let warnings = ctl.warnings.clone();

    let mut aug = vec![0.0; dim];
    aug[..4].copy_from_slice(&cfg.initial_state);
    aug[4..4 + m].copy_from_slice(ctl.f_hat.theta());
    aug[4 + m..].copy_from_slice(ctl.g_hat.theta());

    let mut prev: Option<(f64, f64)> = None;
    let mut records = Vec::with_capacity(steps + 1);
    let mut ws = Rk4Workspace::new(dim);
    let mut next = vec![0.0; dim];

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let x = [aug[0], aug[1], aug[2], aug[3]];
        let xm = measured_state(&x, prev, cfg.dt, cfg.measurement);
        let cmd = match ctl.compute_step(t, &xm, &cfg.reference, cfg.dt) {
            Ok(c) => c,
            Err(e) => return Err(attach(SimError::Control(e), records, warnings)),
        };
        let (nf, ng) = ctl.theta_inf_norms();
        records.push(Record {
            t,
            x,
            u: cmd.u,
            ym: cfg.reference.derivatives(t)[0],
            e: cmd.e_vec[0],
            theta_f_norm: nf,
            theta_g_norm: ng,
            clamped: cmd.clamped,
            multipliers: cfg.schedule.multipliers(t),
        });
        if k == steps {
            break;
        }
        prev = Some((x[0], x[2]));
        // Under backward-difference measurement there is nothing to
        // re-measure inside a step, so the error context stays frozen at
        // the sample; with true-state measurement e and e' follow the
        // integration stages.
        let live = cfg.measurement == MeasurementMode::TrueState;
        let ctl_ref = &ctl;
        let mut field = |st: f64, s: &[f64], out: &mut [f64]| -> Result<(), SimError> {
            let xs = [s[0], s[1], s[2], s[3]];
            let p = apply_schedule(&cfg.params, &cfg.schedule, st)?;
            let c = derive_coefficients(&p).map_err(|e| SimError::ScenarioInvalid(e.to_string()))?;
            out[..4].copy_from_slice(&plant_derivative(&c, &xs, cmd.u));
            let (tf, tg) = s[4..].split_at(m);
            let (rf, rg) = out[4..].split_at_mut(m);
            let (et, ex) = if live { (st, xs) } else { (t, xm) };
            ctl_ref
                .theta_rates(et, &ex, tf, tg, &cmd, &cfg.reference, rf, rg)
                .map_err(SimError::Control)?;
            Ok(())
        };
        let stepped = rk4_step_into(&mut field, &aug, t, cfg.dt, &mut ws, &mut next)
            .and_then(|()| guard_state(&next[..4], t + cfg.dt))
            .and_then(|()| {
                if next[4..].iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(SimError::Diverged {
                        t: t + cfg.dt,
                        reason: "non-finite parameter estimate".into(),
                        trajectory: None,
                    })
                }
            });
        if let Err(e) = stepped {
            return Err(attach(e, records, warnings));
        }
        std::mem::swap(&mut aug, &mut next);
        // Projection keeps rates inward at the cap; the clamp only cleans
        // up substep overshoot, then the clamped values re-enter the ODE
        // state.
        let (tf, tg) = aug[4..].split_at(m);
        ctl.commit_theta(tf, tg);
        aug[4..4 + m].copy_from_slice(ctl.f_hat.theta());
        aug[4 + m..].copy_from_slice(ctl.g_hat.theta());
    }
    Ok(Trajectory { records, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn short(cfg: &mut ScenarioConfig, t_end: f64) {
        cfg.t_end = t_end;
    }

    #[test]
    fn step_count_is_fp_robust() {
        let mut cfg = ScenarioConfig::default();
        assert_eq!(cfg.step_count(), 20000);
        cfg.dt = 0.1;
        cfg.t_end = 0.3; // 0.3/0.1 is 2.999... in floating point
        assert_eq!(cfg.step_count(), 3);
    }

    #[test]
    fn default_scenario_validates() {
        assert!(ScenarioConfig::default().validate().is_ok());
        let mut cfg = ScenarioConfig::default();
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.t_end = 0.0005;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::default();
        cfg.initial_state[2] = f64::NAN;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn record_count_and_time_grid() {
        let mut cfg = ScenarioConfig::default();
        short(&mut cfg, 0.5);
        let traj = run_simulation(&cfg).unwrap();
        assert_eq!(traj.len(), 501);
        assert_eq!(traj.records[0].t, 0.0);
        assert_relative_eq!(traj.records[500].t, 0.5, max_relative = 1e-12);
        for w in traj.records.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn zero_reference_is_equilibrium_for_both_controllers() {
        let mut cfg = ScenarioConfig::default();
        cfg.reference.amplitude = 0.0;
        cfg.initial_state = [0.0; 4];
        short(&mut cfg, 1.0);
        let classical = run_simulation(&cfg).unwrap();
        for r in &classical.records {
            assert_eq!(r.e, 0.0);
            assert_eq!(r.u, 0.0);
        }

        cfg.controller =
            ControllerChoice::Adaptive(AdaptiveControllerConfig::preset("stable").unwrap());
        let adaptive = run_simulation(&cfg).unwrap();
        let first = &adaptive.records[0];
        for r in &adaptive.records {
            assert_eq!(r.e, 0.0);
            assert_eq!(r.u, 0.0);
            // Adaptation is quiescent with zero error.
            assert_eq!(r.theta_f_norm, first.theta_f_norm);
            assert_eq!(r.theta_g_norm, first.theta_g_norm);
        }
    }

    #[test]
    fn identical_configs_give_identical_trajectories() {
        let mut cfg = ScenarioConfig::default();
        cfg.controller =
            ControllerChoice::Adaptive(AdaptiveControllerConfig::preset("stable").unwrap());
        cfg.schedule = default_uncertainty_schedule();
        short(&mut cfg, 1.5);
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ramp_schedule_keeps_coefficients_continuous() {
        let mut cfg = ScenarioConfig::default();
        cfg.schedule = ParameterSchedule {
            events: vec![ScheduleEvent {
                param: crate::plant::ParamName::M1,
                kind: ScheduleKind::Ramp { end: 0.4 },
                start: 0.1,
                magnitude: 1.5,
            }],
        };
        short(&mut cfg, 0.6);
        let traj = run_simulation(&cfg).unwrap();
        let per_step = 0.5 * cfg.dt / 0.3 + 1e-12;
        for w in traj.records.windows(2) {
            let dm = (w[1].multipliers[0] - w[0].multipliers[0]).abs();
            assert!(dm <= per_step, "jump {dm} exceeds ramp increment");
        }
        assert_eq!(traj.records[0].multipliers[0], 1.0);
        assert_relative_eq!(
            traj.records.last().unwrap().multipliers[0],
            1.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn metrics_examples() {
        let mk = |es: Vec<f64>, dt: f64| Trajectory {
            records: es
                .iter()
                .enumerate()
                .map(|(i, &e)| Record {
                    t: i as f64 * dt,
                    x: [0.0; 4],
                    u: 0.0,
                    ym: 0.0,
                    e,
                    theta_f_norm: 0.0,
                    theta_g_norm: 0.0,
                    clamped: false,
                    multipliers: vec![],
                })
                .collect(),
            warnings: vec![],
        };
        assert!(matches!(
            compute_metrics(&mk(vec![], 1.0)),
            Err(SimError::EmptyTrajectory)
        ));

        let zero = compute_metrics(&mk(vec![0.0; 100], 0.1)).unwrap();
        assert_eq!(zero.band, (0.0, 0.0));
        assert_eq!(zero.rms_full, 0.0);
        assert_eq!(zero.settle_time, Some(0.0));

        let constant = compute_metrics(&mk(vec![0.27; 50], 0.1)).unwrap();
        assert_eq!(constant.band, (0.27, 0.27));
        assert_eq!(constant.settle_time, None);
        assert_abs_diff_eq!(constant.rms_final, 0.27, epsilon = 1e-15);

        // 0.1 sin t sampled at dt = pi/400 for 8*pi: the final quarter is
        // exactly one period, so the band is +-0.1 and the RMS is
        // 0.1/sqrt(2).
        let dt = std::f64::consts::PI / 400.0;
        let es: Vec<f64> = (0..=3200).map(|i| 0.1 * (i as f64 * dt).sin()).collect();
        let m = compute_metrics(&mk(es, dt)).unwrap();
        assert_abs_diff_eq!(m.band.0, -0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(m.band.1, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(m.rms_final, 0.1 / 2.0f64.sqrt(), epsilon = 1e-3);
        // |e| last reaches 0.05 where sin t = -1/2 falling, at 8 pi - pi/6;
        // the settle time is the following sample.
        let expected = 8.0 * std::f64::consts::PI - std::f64::consts::PI / 6.0;
        assert_abs_diff_eq!(m.settle_time.unwrap(), expected, epsilon = 2.0 * dt);
    }

    #[test]
    fn divergence_returns_partial_trajectory() {
        // A rest start mismatches the reference rate; the resulting error
        // offset drives the base rate out of the approximator domain and
        // the run escapes. The partial trajectory must ride along.
        let mut cfg = ScenarioConfig::default();
        cfg.initial_state = [0.0; 4];
        cfg.controller =
            ControllerChoice::Adaptive(AdaptiveControllerConfig::preset("stable").unwrap());
        match run_simulation(&cfg) {
            Err(SimError::Diverged { t, trajectory, .. }) => {
                let traj = trajectory.expect("partial trajectory attached");
                assert!(!traj.is_empty());
                assert!(t > 0.0 && t <= cfg.t_end);
                let last = traj.records.last().unwrap();
                assert!(last.t < t);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn fixed_matrix_preset_runs_with_warnings() {
        // The quoted-tuning preset is structurally unstable but must still
        // execute; parameter projection keeps it inside the guard.
        let mut cfg = ScenarioConfig::default();
        cfg.controller =
            ControllerChoice::Adaptive(AdaptiveControllerConfig::preset("paper").unwrap());
        let traj = run_simulation(&cfg).unwrap();
        assert!(traj
            .warnings
            .iter()
            .any(|w| w.contains("positive definite")));
        assert_eq!(traj.len(), cfg.step_count() + 1);
        let cap = match &cfg.controller {
            ControllerChoice::Adaptive(a) => a.theta_cap,
            _ => unreachable!(),
        };
        for r in &traj.records {
            assert!(r.theta_f_norm <= cap && r.theta_g_norm <= cap);
        }
    }

    #[test]
    fn backward_difference_mode_runs() {
        let mut cfg = ScenarioConfig::default();
        cfg.measurement = MeasurementMode::BackwardDifference;
        short(&mut cfg, 2.0);
        let traj = run_simulation(&cfg).unwrap();
        let m = compute_metrics(&traj).unwrap();
        assert!(m.max_abs_e < 0.5, "max |e| = {}", m.max_abs_e);
    }

    #[test]
    fn open_loop_order_check() {
        // Free pendulum from a small angle, u = 0: halving dt shrinks the
        // endpoint error ~16x.
        let c = derive_coefficients(&PhysicalParams::nominal()).unwrap();
        let integrate = |dt: f64| -> Vec<f64> {
            let mut field = |_t: f64, s: &[f64], out: &mut [f64]| -> Result<(), SimError> {
                out.copy_from_slice(&plant_derivative(&c, &[s[0], s[1], s[2], s[3]], 0.0));
                Ok(())
            };
            let mut s = vec![0.0, 0.0, 0.1, 0.0];
            let steps = (1.0 / dt).round() as usize;
            let mut ws = Rk4Workspace::new(4);
            let mut out = vec![0.0; 4];
            for k in 0..steps {
                rk4_step_into(&mut field, &s, k as f64 * dt, dt, &mut ws, &mut out).unwrap();
                std::mem::swap(&mut s, &mut out);
            }
            s
        };
        let reference = integrate(1e-6);
        let coarse = integrate(1e-3);
        let fine = integrate(5e-4);
        let err = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let ratio = err(&coarse, &reference) / err(&fine, &reference);
        assert!(
            (12.8..=19.2).contains(&ratio),
            "order ratio {ratio} outside 16 +- 20%"
        );
    }
}
