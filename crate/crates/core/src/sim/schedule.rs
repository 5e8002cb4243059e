//! Time-varying multiplicative perturbations of the physical parameters.

use super::SimError;
use crate::plant::{ParamName, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// Multiplier jumps from 1 to `magnitude` at `start`.
    Step,
    /// Multiplier moves linearly from 1 at `start` to `magnitude` at `end`,
    /// constant after.
    Ramp { end: f64 },
    /// Multiplier is `1 + magnitude * sin(2*pi*(t - start)/period)` from
    /// `start` on.
    Sinusoidal { period: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEvent {
    pub param: ParamName,
    pub kind: ScheduleKind,
    pub start: f64,
    pub magnitude: f64,
}

impl ScheduleEvent {
    /// Multiplier this event applies at time `t`.
    pub fn multiplier(&self, t: f64) -> f64 {
        match self.kind {
            ScheduleKind::Step => {
                if t >= self.start {
                    self.magnitude
                } else {
                    1.0
                }
            }
            ScheduleKind::Ramp { end } => {
                let frac = ((t - self.start) / (end - self.start)).clamp(0.0, 1.0);
                1.0 + (self.magnitude - 1.0) * frac
            }
            ScheduleKind::Sinusoidal { period } => {
                if t >= self.start {
                    1.0 + self.magnitude
                        * (2.0 * std::f64::consts::PI * (t - self.start) / period).sin()
                } else {
                    1.0
                }
            }
        }
    }

    /// Conservative envelope of the multiplier over all t >= 0.
    fn multiplier_range(&self) -> (f64, f64) {
        match self.kind {
            ScheduleKind::Step | ScheduleKind::Ramp { .. } => {
                (self.magnitude.min(1.0), self.magnitude.max(1.0))
            }
            ScheduleKind::Sinusoidal { .. } => {
                (1.0 - self.magnitude.abs(), 1.0 + self.magnitude.abs())
            }
        }
    }

    fn validate(&self, index: usize) -> Result<(), SimError> {
        let bad = |why: String| Err(SimError::ScenarioInvalid(format!("schedule event {index}: {why}")));
        if !self.start.is_finite() || self.start < 0.0 {
            return bad(format!("start time {} must be >= 0", self.start));
        }
        if !self.magnitude.is_finite() {
            return bad("magnitude must be finite".into());
        }
        match self.kind {
            ScheduleKind::Step => {}
            ScheduleKind::Ramp { end } => {
                if !(end > self.start) {
                    return bad(format!("ramp end {end} must exceed start {}", self.start));
                }
            }
            ScheduleKind::Sinusoidal { period } => {
                if !(period > 0.0) || !period.is_finite() {
                    return bad(format!("period {period} must be > 0"));
                }
            }
        }
        Ok(())
    }
}

/// A list of multiplicative events; events targeting the same parameter
/// compose by multiplication.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterSchedule {
    pub events: Vec<ScheduleEvent>,
}

impl ParameterSchedule {
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Per-event multipliers at `t`, in event order (trajectory telemetry).
    pub fn multipliers(&self, t: f64) -> Vec<f64> {
        self.events.iter().map(|e| e.multiplier(t)).collect()
    }

    /// Checks event well-formedness and that no reachable multiplier
    /// combination can violate the plant invariants: positive parameters
    /// must stay positive, nonzero parameters must keep their sign. The
    /// envelope is conservative (interval arithmetic over events).
    pub fn validate(&self, base: &PhysicalParams) -> Result<(), SimError> {
        for (i, ev) in self.events.iter().enumerate() {
            ev.validate(i)?;
        }
        for name in ParamName::ALL {
            let (mut lo, mut hi) = (1.0f64, 1.0f64);
            for ev in self.events.iter().filter(|e| e.param == name) {
                let (a, b) = ev.multiplier_range();
                let products = [lo * a, lo * b, hi * a, hi * b];
                lo = products.iter().cloned().fold(f64::INFINITY, f64::min);
                hi = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            }
            if (lo, hi) == (1.0, 1.0) {
                continue;
            }
            let must_stay_positive = matches!(name, ParamName::M1 | ParamName::J1 | ParamName::L1);
            let must_stay_nonzero = matches!(name, ParamName::K1 | ParamName::Kp);
            if must_stay_positive && lo <= 0.0 {
                return Err(SimError::ScenarioInvalid(format!(
                    "schedule can scale {name} by {lo:.4}, but {name} must stay positive"
                )));
            }
            if must_stay_nonzero && lo <= 0.0 && hi >= 0.0 {
                return Err(SimError::ScenarioInvalid(format!(
                    "schedule multiplier range [{lo:.4}, {hi:.4}] on {name} crosses zero"
                )));
            }
            let value = base.get(name);
            for extreme in [lo, hi] {
                if !(value * extreme).is_finite() {
                    return Err(SimError::ScenarioInvalid(format!(
                        "schedule drives {name} to a non-finite value"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `base` with every event's multiplier at time `t` applied to its target.
pub fn apply_schedule(
    base: &PhysicalParams,
    sched: &ParameterSchedule,
    t: f64,
) -> Result<PhysicalParams, SimError> {
    let mut p = *base;
    for ev in &sched.events {
        p.set(ev.param, p.get(ev.param) * ev.multiplier(t));
    }
    p.validate()
        .map_err(|e| SimError::ScenarioInvalid(format!("schedule at t = {t}: {e}")))?;
    Ok(p)
}

/// Default robustness scenario: the pendulum mass steps up 30% and the
/// pivot friction 50% at t = 10 s.
pub fn default_uncertainty_schedule() -> ParameterSchedule {
    ParameterSchedule {
        events: vec![
            ScheduleEvent {
                param: ParamName::M1,
                kind: ScheduleKind::Step,
                start: 10.0,
                magnitude: 1.3,
            },
            ScheduleEvent {
                param: ParamName::C1,
                kind: ScheduleKind::Step,
                start: 10.0,
                magnitude: 1.5,
            },
        ],
    }
}
