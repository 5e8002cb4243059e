//! Indirect adaptive fuzzy tracking controller.
//!
//! The plant's output axis obeys `y'' = f(x) + b2*u` with `f` and `b2`
//! treated as unknown. Two fuzzy approximators over `(x2, x3, x4)` estimate
//! them; the control law inverts the estimate and adds stabilizing error
//! feedback, and the estimates are adapted online at a rate proportional to
//! `e_vec' P b`, where `P` solves the Lyapunov equation for the target
//! error dynamics.
//!
//! Error convention in this module: `e = ym - y` (and likewise for all
//! derivatives), so the `+K` feedback term opposes the error.
//!
//! The gain vector `k` lists the coefficients of the target error
//! polynomial `s^n + k[0]*s^(n-1) + ... + k[n-1]`. The feedback term pairs
//! `k[n-1]` with `e` and `k[0]` with the highest error derivative, which
//! makes the closed-loop error realize exactly that polynomial when the
//! estimates are exact; its companion form is the `A` used for `P`.

use super::lyapunov::{
    check_spd, companion_matrix, inf_norm, lyapunov_residual, require_hurwitz, solve_lyapunov,
    spd_warnings, worst_eigenvalue,
};
use super::{ControlError, ReferenceSignal};
use crate::fuzzy::{dot, FuzzyApproximator, Partition};
use crate::plant::{true_f, StateSpaceCoeffs, StateVector};
use nalgebra::{DMatrix, DVector};

/// Where the Lyapunov matrix comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMode {
    /// Solve `A'P + PA = -Q` from the configured gains; rejects gain sets
    /// whose companion matrix is not Hurwitz.
    Solved,
    /// Use the fixed matrix shipped with the `paper` preset, with validity
    /// checks downgraded to warnings. Diagnostic use only.
    PaperMatrix,
}

/// Gain set of the `paper` preset. Its companion matrix is not Hurwitz
/// (eigenvalues 1.30 +- 2.04i in the right half plane), so it only runs
/// with [`PMode::PaperMatrix`] and otherwise serves to exercise the
/// diagnostics.
pub fn paper_gains() -> [f64; 4] {
    [-0.7, 1.0, 10.8, 0.7]
}

/// Fixed Lyapunov matrix of the `paper` preset. Symmetric but indefinite;
/// [`AdaptiveController::new`] reports that as a warning when it is used.
pub fn paper_fixed_p() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            7.7709, 0.3740, -0.5139, 0.7143, //
            0.3740, -4.6545, -0.9861, 0.0809, //
            -0.5139, -0.9861, 0.2394, -0.4861, //
            0.7143, 0.0809, -0.4861, -0.0199,
        ],
    ) * 1e3
}

/// Gain set of the `stable` preset: `(s+2)^2 (s+3)^2`, error poles at
/// -2, -2, -3, -3.
pub fn stable_gains() -> [f64; 4] {
    [10.0, 37.0, 60.0, 36.0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveControllerConfig {
    /// Target error polynomial coefficients; length sets the loop order
    /// (2 to 4 supported).
    pub k: Vec<f64>,
    /// Adaptation gain for the drift estimate.
    pub gamma1: f64,
    /// Adaptation gain for the input-gain estimate.
    pub gamma2: f64,
    /// Right-hand side of the Lyapunov equation; symmetric positive
    /// definite, same size as the loop order.
    pub q: DMatrix<f64>,
    /// Lower clamp on the input-gain estimate before division.
    pub g_floor: f64,
    /// Infinity-norm cap on both parameter vectors (projection bound).
    pub theta_cap: f64,
    pub p_mode: PMode,
    /// Approximator input boxes for (x2, x3, x4).
    pub domains: Vec<(f64, f64)>,
    /// Membership centers per axis.
    pub centers: Vec<usize>,
    /// Time constant (s) of the first-order filters that clean up the
    /// differenced higher error derivatives in the order-4 loop.
    pub deriv_tau: f64,
}

impl Default for AdaptiveControllerConfig {
    fn default() -> Self {
        Self {
            k: paper_gains().to_vec(),
            gamma1: 35.0,
            gamma2: 6.0,
            q: DMatrix::identity(4, 4) * 1000.0,
            g_floor: 1.0,
            theta_cap: 1e4,
            p_mode: PMode::Solved,
            domains: vec![
                (-40.0, 40.0),
                (-std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_3),
                (-6.0, 6.0),
            ],
            centers: vec![5, 5, 5],
            deriv_tau: 0.5,
        }
    }
}

impl AdaptiveControllerConfig {
    /// Compiled-in preset by CLI name: `paper` or `stable`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "paper" => Some(Self {
                k: paper_gains().to_vec(),
                p_mode: PMode::PaperMatrix,
                ..Self::default()
            }),
            "stable" => Some(Self {
                k: stable_gains().to_vec(),
                p_mode: PMode::Solved,
                ..Self::default()
            }),
            _ => None,
        }
    }

    pub fn order(&self) -> usize {
        self.k.len()
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let n = self.k.len();
        if !(2..=4).contains(&n) {
            return Err(ControlError::BadConfig(format!(
                "gain vector length {n} unsupported (2 to 4)"
            )));
        }
        if self.k.iter().any(|v| !v.is_finite()) {
            return Err(ControlError::BadConfig("gain vector must be finite".into()));
        }
        for (name, v) in [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("g_floor", self.g_floor),
            ("theta_cap", self.theta_cap),
            ("deriv_tau", self.deriv_tau),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ControlError::BadConfig(format!("{name} = {v} must be > 0")));
            }
        }
        if self.q.nrows() != n || self.q.ncols() != n {
            return Err(ControlError::BadConfig(format!(
                "Q is {}x{}, expected {n}x{n}",
                self.q.nrows(),
                self.q.ncols()
            )));
        }
        check_spd(&self.q, "Q")?;
        if self.p_mode == PMode::PaperMatrix && n != 4 {
            return Err(ControlError::BadConfig(
                "p_mode = paper-matrix requires an order-4 gain vector".into(),
            ));
        }
        if self.domains.len() != 3 || self.centers.len() != 3 {
            return Err(ControlError::BadConfig(
                "approximators take exactly the three inputs (x2, x3, x4)".into(),
            ));
        }
        for (i, &(lo, hi)) in self.domains.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ControlError::BadConfig(format!(
                    "domain {} = [{lo}, {hi}] must be a finite nonempty interval",
                    i + 1
                )));
            }
            if self.centers[i] < 2 {
                return Err(ControlError::BadConfig(format!(
                    "axis {} needs at least 2 centers",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Result of the pure control law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveLawOutput {
    pub u: f64,
    pub f_hat: f64,
    pub g_hat: f64,
    /// True when the raw input-gain estimate fell below the floor and the
    /// floor was used as divisor instead.
    pub clamped: bool,
}

/// `u = (-f_hat + ym_dn + k[n-1]*e_vec[0] + ... + k[0]*e_vec[n-1]) / max(g_hat, g_floor)`.
///
/// `e_vec = (e, e', ..., e^(n-1))` in the `e = ym - y` convention;
/// `ym_dn` is the n-th reference derivative. Division is clamped at
/// `g_floor`, flagged in the output.
pub fn adaptive_control(
    theta_f: &[f64],
    xi_f: &[f64],
    theta_g: &[f64],
    xi_g: &[f64],
    e_vec: &[f64],
    k: &[f64],
    ym_dn: f64,
    g_floor: f64,
) -> AdaptiveLawOutput {
    let n = k.len();
    debug_assert_eq!(e_vec.len(), n);
    let f_hat = dot(theta_f, xi_f);
    let g_hat = dot(theta_g, xi_g);
    let feedback: f64 = (0..n).map(|i| k[i] * e_vec[n - 1 - i]).sum();
    let clamped = !(g_hat >= g_floor);
    let divisor = if clamped { g_floor } else { g_hat };
    AdaptiveLawOutput {
        u: (-f_hat + ym_dn + feedback) / divisor,
        f_hat,
        g_hat,
        clamped,
    }
}

/// Adaptation rates `theta_f' = -gamma1 * (e_vec' P b) * xi_f` and
/// `theta_g' = -gamma2 * (e_vec' P b) * xi_g * u`, with parameter
/// projection: any component whose parameter already sits at `+-theta_cap`
/// and whose rate points further out is zeroed.
#[allow(clippy::too_many_arguments)]
pub fn adaptation_rates(
    e_vec: &[f64],
    p: &DMatrix<f64>,
    b: &DVector<f64>,
    xi_f: &[f64],
    xi_g: &[f64],
    u: f64,
    gamma1: f64,
    gamma2: f64,
    theta_cap: f64,
    theta_f: &[f64],
    theta_g: &[f64],
    rate_f: &mut [f64],
    rate_g: &mut [f64],
) {
    let n = e_vec.len();
    debug_assert_eq!(p.nrows(), n);
    debug_assert_eq!(b.len(), n);
    let mut s = 0.0;
    for i in 0..n {
        let mut pb_i = 0.0;
        for j in 0..n {
            pb_i += p[(i, j)] * b[j];
        }
        s += e_vec[i] * pb_i;
    }
    let cf = -gamma1 * s;
    let cg = -gamma2 * s * u;
    for j in 0..xi_f.len() {
        rate_f[j] = project(cf * xi_f[j], theta_f[j], theta_cap);
        rate_g[j] = project(cg * xi_g[j], theta_g[j], theta_cap);
    }
}

fn project(rate: f64, theta: f64, cap: f64) -> f64 {
    if (theta >= cap && rate > 0.0) || (theta <= -cap && rate < 0.0) {
        0.0
    } else {
        rate
    }
}

/// First-order-filtered backward differencing for the higher error
/// derivatives the order-4 loop needs.
///
/// Raw differences of `e'` amplify sample-to-sample noise by `1/dt` per
/// level, enough to destabilize the sampled loop on their own; each level
/// is therefore passed through a low-pass with time constant `tau`.
#[derive(Debug, Clone, PartialEq)]
struct DerivFilter {
    tau: f64,
    prev: Vec<f64>,
    est: Vec<f64>,
    primed: bool,
}

impl DerivFilter {
    fn new(levels: usize, tau: f64) -> Self {
        Self {
            tau,
            prev: vec![0.0; levels],
            est: vec![0.0; levels],
            primed: false,
        }
    }

    /// Feeds the current first derivative sample; returns the filtered
    /// estimates of derivatives 2, 3, ... The first call only primes the
    /// history and returns zeros.
    fn update(&mut self, edot: f64, dt: f64) -> &[f64] {
        if !self.primed {
            if !self.prev.is_empty() {
                self.prev[0] = edot;
            }
            self.primed = true;
            return &self.est;
        }
        let alpha = (dt / self.tau).min(1.0);
        let mut input = edot;
        for i in 0..self.est.len() {
            let raw = (input - self.prev[i]) / dt;
            self.est[i] += alpha * (raw - self.est[i]);
            self.prev[i] = input;
            input = self.est[i];
        }
        &self.est
    }
}

/// Frozen per-sample output of [`AdaptiveController::compute_step`]: the
/// zero-order-hold input for the step plus the context the adaptation
/// integrator needs.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCommand {
    pub u: f64,
    pub clamped: bool,
    /// `(e, e', ...)` at the sample; components above `e'` are filtered
    /// estimates and stay frozen across the integration stages.
    pub e_vec: Vec<f64>,
    pub f_hat: f64,
    pub g_hat: f64,
}

/// Runtime state of the adaptive loop: the two approximators, the Lyapunov
/// pair `(A, P)`, and the derivative-filter memory.
///
/// Invariant: `P` is symmetric, and in [`PMode::Solved`] also positive
/// definite with `|A'P + PA + Q| <= 1e-8 |Q|` (enforced by the solver). In
/// [`PMode::PaperMatrix`] violations are recorded in [`warnings`] instead.
///
/// [`warnings`]: AdaptiveController::warnings
#[derive(Debug, Clone)]
pub struct AdaptiveController {
    pub cfg: AdaptiveControllerConfig,
    pub f_hat: FuzzyApproximator,
    pub g_hat: FuzzyApproximator,
    /// Companion matrix of the configured gain vector.
    pub a: DMatrix<f64>,
    pub p: DMatrix<f64>,
    /// Input direction of the error dynamics: last basis vector.
    pub b: DVector<f64>,
    pub warnings: Vec<String>,
    filter: DerivFilter,
}

impl AdaptiveController {
    /// Builds the controller, warm-starting both approximators from the
    /// nominal plant: the drift estimate samples `true_f` on the rule grid
    /// and the gain estimate starts at the constant `b2`.
    pub fn new(
        cfg: AdaptiveControllerConfig,
        nominal: &StateSpaceCoeffs,
    ) -> Result<Self, ControlError> {
        cfg.validate()?;
        let mut partitions = Vec::with_capacity(3);
        for (&(lo, hi), &count) in cfg.domains.iter().zip(&cfg.centers) {
            partitions.push(Partition::uniform(lo, hi, count)?);
        }
        let nom = *nominal;
        let f_hat = FuzzyApproximator::from_function(partitions.clone(), move |x| {
            true_f(&nom, &[0.0, x[0], x[1], x[2]])
        })?;
        let g_hat = FuzzyApproximator::from_function(partitions, |_| nom.b2)?;

        let n = cfg.order();
        let a = companion_matrix(&cfg.k);
        let mut warnings = Vec::new();
        let p = match cfg.p_mode {
            PMode::Solved => solve_lyapunov(&a, &cfg.q)?,
            PMode::PaperMatrix => {
                let p = paper_fixed_p();
                warnings.extend(spd_warnings(&p, "fixed P matrix"));
                if require_hurwitz(&a).is_err() {
                    let l = worst_eigenvalue(&a);
                    warnings.push(format!(
                        "gain matrix is not Hurwitz (eigenvalue {}{:+}i); the loop has no stability guarantee",
                        l.re, l.im
                    ));
                }
                let residual = inf_norm(&lyapunov_residual(&a, &cfg.q, &p));
                let bound = 1e-8 * inf_norm(&cfg.q);
                if residual > bound {
                    warnings.push(format!(
                        "fixed P matrix does not solve the Lyapunov equation (residual {residual:.3e}, bound {bound:.3e})"
                    ));
                }
                p
            }
        };
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        Ok(Self {
            filter: DerivFilter::new(n - 2, cfg.deriv_tau),
            cfg,
            f_hat,
            g_hat,
            a,
            p,
            b,
            warnings,
        })
    }

    pub fn order(&self) -> usize {
        self.cfg.order()
    }

    /// Computes the zero-order-hold input for the step starting at `t`.
    /// Mutates the derivative-filter memory, so call exactly once per
    /// sample, in time order.
    pub fn compute_step(
        &mut self,
        t: f64,
        x: &StateVector,
        r: &ReferenceSignal,
        dt: f64,
    ) -> Result<StepCommand, ControlError> {
        let n = self.order();
        let d = r.derivatives(t);
        let mut e_vec = Vec::with_capacity(n);
        e_vec.push(d[0] - x[2]);
        e_vec.push(d[1] - x[3]);
        if n > 2 {
            e_vec.extend_from_slice(self.filter.update(e_vec[1], dt));
        }
        let xi = self.f_hat.basis(&[x[1], x[2], x[3]])?;
        let out = adaptive_control(
            self.f_hat.theta(),
            &xi,
            self.g_hat.theta(),
            &xi,
            &e_vec,
            &self.cfg.k,
            d[n],
            self.cfg.g_floor,
        );
        Ok(StepCommand {
            u: out.u,
            clamped: out.clamped,
            e_vec,
            f_hat: out.f_hat,
            g_hat: out.g_hat,
        })
    }

    /// Parameter rates at an integration stage. `e` and `e'` are recomputed
    /// live from the stage state and time; the filtered higher derivatives
    /// and the input stay frozen in `cmd`.
    pub fn theta_rates(
        &self,
        stage_t: f64,
        stage_x: &StateVector,
        theta_f: &[f64],
        theta_g: &[f64],
        cmd: &StepCommand,
        r: &ReferenceSignal,
        rate_f: &mut [f64],
        rate_g: &mut [f64],
    ) -> Result<(), ControlError> {
        let d = r.derivatives(stage_t);
        let mut e_vec = cmd.e_vec.clone();
        e_vec[0] = d[0] - stage_x[2];
        e_vec[1] = d[1] - stage_x[3];
        let xi = self.f_hat.basis(&[stage_x[1], stage_x[2], stage_x[3]])?;
        adaptation_rates(
            &e_vec,
            &self.p,
            &self.b,
            &xi,
            &xi,
            cmd.u,
            self.cfg.gamma1,
            self.cfg.gamma2,
            self.cfg.theta_cap,
            theta_f,
            theta_g,
            rate_f,
            rate_g,
        );
        Ok(())
    }

    /// Stores integrated parameters back into the approximators, clamping
    /// at the cap (integration substeps can overshoot the projection by a
    /// rounding-level amount).
    pub fn commit_theta(&mut self, theta_f: &[f64], theta_g: &[f64]) {
        let cap = self.cfg.theta_cap;
        for (dst, &src) in self.f_hat.theta_mut().iter_mut().zip(theta_f) {
            *dst = src.clamp(-cap, cap);
        }
        for (dst, &src) in self.g_hat.theta_mut().iter_mut().zip(theta_g) {
            *dst = src.clamp(-cap, cap);
        }
        debug_assert!(self.theta_inf_norms().0 <= cap && self.theta_inf_norms().1 <= cap);
    }

    /// `(|theta_f|_inf, |theta_g|_inf)`.
    pub fn theta_inf_norms(&self) -> (f64, f64) {
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (inf(self.f_hat.theta()), inf(self.g_hat.theta()))
    }
}
