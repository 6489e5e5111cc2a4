//! Time evolution of the Dirichlet problem in the variable `u`, `h = 2 arctan(r u)`.
//!
//! Method of lines on the uniform grid: second-order differences in space,
//! the Dormand-Prince pair in time. At `r = 0` the ghost value `u_{-1} = u_1`
//! enforces `u_r = 0`; the node at `r = 1` keeps its initial value.

mod datum;
pub mod diagnostics;

pub use datum::{validate_initial, Check, Collar, CompatReport, DatumShape, InitialDatum};
pub use diagnostics::{
    detect_blowup, distance_to_stationary, initial_bound, k_bar_one, k_one, monitor_bounds, trend_slope,
    BlowupEstimate, BoundMonitor, DiagRecord,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow_core::uform::{density_power_raw, diffusion_raw, drift_raw, rate_raw};
use crate::flow_core::{from_u, FlowParams, RadialGrid, RadialProfile, TransformedProfile};
use crate::ode::{step_factor, Dp5};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    /// Number of grid nodes on `[0, 1]`.
    pub n: usize,
    pub t_max: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Multiplier of `dr^2 / kappa_max` in the explicit stability cap.
    pub safety: f64,
    /// Level of `h_r(t, 0)` above which blow-up is tested.
    pub blowup_threshold: f64,
    /// Declare convergence once `max |u_t|` falls below this.
    pub converge_tol: f64,
    /// Record diagnostics every this many accepted steps.
    pub record_every: usize,
    /// Inner radius of the distance to the stationary state.
    pub dist_eps: f64,
    /// Abort when `sup |r h_r|` exceeds this value.
    pub bound_guard: Option<f64>,
    pub max_steps: u64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            n: 257,
            t_max: 10.0,
            dt_init: 1e-7,
            dt_min: 1e-14,
            dt_max: 1e-2,
            rtol: 1e-6,
            atol: 1e-6,
            safety: 1.5,
            blowup_threshold: 1e3,
            converge_tol: 1e-6,
            record_every: 200,
            dist_eps: 0.1,
            bound_guard: None,
            max_steps: 50_000_000,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(Error::ConfigRange { key: key.into(), reason });
        if self.n < 5 {
            return bad("n", format!("{} nodes, need at least 5", self.n));
        }
        if !(self.t_max > 0.0) {
            return bad("t_max", "must be positive".into());
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_init && self.dt_init <= self.dt_max) {
            return bad("dt_init", "need 0 < dt_min < dt_init <= dt_max".into());
        }
        if !(self.blowup_threshold > 10.0) {
            return bad("blowup_threshold", "must exceed 10".into());
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol", "tolerances must be positive".into());
        }
        if !(self.safety > 0.0) {
            return bad("safety", "must be positive".into());
        }
        if !(self.converge_tol > 0.0) {
            return bad("converge_tol", "must be positive".into());
        }
        if self.record_every == 0 {
            return bad("record_every", "must be at least 1".into());
        }
        if !(self.dist_eps > 0.0 && self.dist_eps < 1.0) {
            return bad("dist_eps", "must lie in (0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Converged,
    BlewUp,
    ReachedTmax,
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub t_final: f64,
    pub steps: u64,
    pub rejected: u64,
    pub blowup: Option<BlowupEstimate>,
    pub series: Vec<DiagRecord>,
    pub final_profile: RadialProfile,
    pub final_u: Vec<f64>,
    pub failure: Option<String>,
}

impl RunReport {
    pub fn hr0_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|d| (d.t, d.hr0)).collect()
    }

    /// Least-squares slope of the distance over the records with `t >= from`.
    pub fn distance_trend(&self, from: f64) -> f64 {
        let rows: Vec<&DiagRecord> = self.series.iter().filter(|d| d.t >= from && d.dist.is_finite()).collect();
        let t: Vec<f64> = rows.iter().map(|d| d.t).collect();
        let y: Vec<f64> = rows.iter().map(|d| d.dist).collect();
        trend_slope(&t, &y)
    }

    pub fn max_sup_rhr(&self) -> f64 {
        self.series.iter().fold(0.0, |m, d| m.max(d.sup_rhr))
    }
}

/// Spatial right-hand side of the method-of-lines system.
fn rate(p: f64, dr: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len();
    let inv2 = 1.0 / (dr * dr);
    let urr0 = 2.0 * (u[1] - u[0]) * inv2;
    let jp = density_power_raw(p, 0.0, u[0], 0.0);
    out[0] = rate_raw(p, jp, 0.0, u[0], 0.0, urr0, urr0);
    for i in 1..n - 1 {
        let r = i as f64 * dr;
        let w = (u[i + 1] - u[i - 1]) * (0.5 / dr);
        let urr = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv2;
        let jp = density_power_raw(p, r, u[i], w);
        out[i] = rate_raw(p, jp, r, u[i], w, urr, w / r);
    }
    out[n - 1] = 0.0;
    if u.iter().any(|&v| !(v > 0.0)) {
        out.iter_mut().for_each(|v| *v = f64::NAN);
    }
}

/// Largest Gershgorin bound `kappa_i` of the linearized operator, times `dr^2`:
/// `4 (a_0 + b_0)` at the origin and `4 a_i + b_i dr / r_i` inside.
fn stiffness(p: f64, dr: f64, u: &[f64]) -> f64 {
    let n = u.len();
    let jp = density_power_raw(p, 0.0, u[0], 0.0);
    let mut k = 4.0 * (diffusion_raw(p, jp, 0.0, u[0], 0.0) + drift_raw(p, jp, 0.0, u[0]));
    for i in 1..n - 1 {
        let r = i as f64 * dr;
        let w = (u[i + 1] - u[i - 1]) * (0.5 / dr);
        let jp = density_power_raw(p, r, u[i], w);
        k = k.max(4.0 * diffusion_raw(p, jp, r, u[i], w) + drift_raw(p, jp, r, u[i]) * dr / r);
    }
    k
}

/// `u_r` and `u_rr` by second-order differences with the even reflection at `r = 0`.
fn u_derivatives(u: &[f64], dr: f64) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let mut ur = vec![0.0; n];
    let mut urr = vec![0.0; n];
    urr[0] = 2.0 * (u[1] - u[0]) / (dr * dr);
    for i in 1..n - 1 {
        ur[i] = (u[i + 1] - u[i - 1]) / (2.0 * dr);
        urr[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dr * dr);
    }
    let m = n - 1;
    ur[m] = (3.0 * u[m] - 4.0 * u[m - 1] + u[m - 2]) / (2.0 * dr);
    urr[m] = (2.0 * u[m] - 5.0 * u[m - 1] + 4.0 * u[m - 2] - u[m - 3]) / (dr * dr);
    (ur, urr)
}

/// Outcome of one call to [`Solver::advance`].
#[derive(Debug, Clone, PartialEq)]
pub enum StepStatus {
    Accepted { dt: f64 },
    /// The step size fell below `dt_min`; `at_origin` tells whether the
    /// largest error sat in the first few nodes.
    Collapsed { at_origin: bool },
    Degenerate(String),
}

/// Method-of-lines state with its integrator scratch.
#[derive(Debug, Clone)]
pub struct Solver {
    pub params: FlowParams,
    pub config: EvolveConfig,
    pub grid: RadialGrid,
    u: Vec<f64>,
    f: Vec<f64>,
    t: f64,
    dt: f64,
    dp: Dp5,
    pub steps: u64,
    pub rejected: u64,
}

impl Solver {
    pub fn new(params: FlowParams, u0: &TransformedProfile, config: EvolveConfig) -> Result<Self> {
        config.validate()?;
        if u0.grid.len() != config.n {
            return Err(Error::GridMismatch(format!("datum on {} nodes, config asks for {}", u0.grid.len(), config.n)));
        }
        if let Some((i, v)) = u0.u.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Validation(format!("u0 = {v} at node {i} must be positive")));
        }
        let n = config.n;
        let mut f = vec![0.0; n];
        rate(params.p(), u0.grid.spacing(), &u0.u, &mut f);
        Ok(Self {
            params,
            grid: u0.grid,
            u: u0.u.clone(),
            f,
            t: 0.0,
            dt: config.dt_init,
            dp: Dp5::new(n),
            steps: 0,
            rejected: 0,
            config,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Current `u_t`.
    pub fn rate(&self) -> &[f64] {
        &self.f
    }

    pub fn hr0(&self) -> f64 {
        2.0 * self.u[0]
    }

    /// The explicit stability cap `safety dr^2 / kappa_max`.
    pub fn stability_cap(&self) -> f64 {
        let dr = self.grid.spacing();
        self.config.safety * dr * dr / stiffness(self.params.p(), dr, &self.u)
    }

    /// Current state as an h-profile with slopes and curvatures.
    pub fn profile(&self) -> RadialProfile {
        let (ur, urr) = u_derivatives(&self.u, self.grid.spacing());
        from_u(&TransformedProfile { grid: self.grid, u: self.u.clone(), u_r: Some(ur), u_rr: Some(urr) })
    }

    /// Takes one accepted step, or reports why none could be taken.
    /// Steps never cross `t_stop`.
    pub fn advance(&mut self, t_stop: f64) -> StepStatus {
        let p = self.params.p();
        let dr = self.grid.spacing();
        let cap = self.stability_cap();
        let mut rhs = |_t: f64, y: &[f64], out: &mut [f64]| rate(p, dr, y, out);
        loop {
            let dt = self.dt.min(self.config.dt_max).min(cap).min(t_stop - self.t);
            if dt < self.config.dt_min && dt < t_stop - self.t {
                let scale = |i: usize| self.config.atol + self.config.rtol * self.u[i].abs();
                let err = self.dp.error_estimate();
                let worst = (0..err.len())
                    .max_by(|&a, &b| (err[a] / scale(a)).abs().total_cmp(&(err[b] / scale(b)).abs()))
                    .unwrap_or(0);
                return StepStatus::Collapsed { at_origin: worst < (self.grid.len() / 20).max(3) };
            }
            let err = self.dp.step(&mut rhs, self.t, &self.u, &self.f, dt, self.config.rtol, self.config.atol);
            let positive = self.dp.y_new.iter().all(|&v| v > 0.0);
            if err <= 1.0 && positive {
                self.t = if dt == t_stop - self.t { t_stop } else { self.t + dt };
                self.u.copy_from_slice(&self.dp.y_new);
                self.f.copy_from_slice(&self.dp.f_new);
                self.steps += 1;
                if dt < cap && dt < self.config.dt_max {
                    self.dt = dt * step_factor(err);
                } else {
                    self.dt = self.dt.max(dt);
                }
                return StepStatus::Accepted { dt };
            }
            self.rejected += 1;
            if !err.is_finite() && self.u.iter().any(|v| !(*v > 0.0)) {
                return StepStatus::Degenerate("u left the positive range".into());
            }
            self.dt = dt * step_factor(err).min(0.9);
        }
    }
}

/// Extra inputs of a run besides the datum.
#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    /// Stationary state for the distance column.
    pub target: Option<&'a RadialProfile>,
}

fn record(solver: &Solver, target: Option<&RadialProfile>, eps: f64, dt: f64) -> Result<DiagRecord> {
    let prof = solver.profile();
    let m = monitor_bounds(&prof)?;
    let dist = match target {
        Some(tg) => distance_to_stationary(&prof, tg, eps)?,
        None => f64::NAN,
    };
    Ok(DiagRecord { t: solver.time(), hr0: solver.hr0(), sup_rhr: m.sup_rhr, d1: m.sup_d1, d2: m.sup_d2, dist, dt })
}

/// Runs the flow from `u0`, calling `observer(t, u)` after every accepted step.
pub fn run_with_observer(
    params: &FlowParams,
    u0: &TransformedProfile,
    config: &EvolveConfig,
    options: RunOptions<'_>,
    mut observer: impl FnMut(f64, &[f64]),
) -> Result<RunReport> {
    let mut solver = Solver::new(*params, u0, config.clone())?;
    let eps = config.dist_eps;
    let mut series = vec![record(&solver, options.target, eps, 0.0)?];
    let mut outcome = Outcome::ReachedTmax;
    let mut failure = None;
    let mut blowup = None;
    let mut last_dt = 0.0;
    let mut since_record = 0usize;
    observer(0.0, solver.u());

    loop {
        if solver.time() >= config.t_max {
            break;
        }
        if solver.steps >= config.max_steps {
            outcome = Outcome::SolverFailure;
            failure = Some(format!("step budget of {} exhausted", config.max_steps));
            break;
        }
        match solver.advance(config.t_max) {
            StepStatus::Accepted { dt } => {
                last_dt = dt;
                since_record += 1;
                observer(solver.time(), solver.u());
                if !solver.u().iter().all(|v| v.is_finite()) {
                    outcome = Outcome::SolverFailure;
                    failure = Some("non-finite state".into());
                    break;
                }
                let hr0 = solver.hr0();
                let last = series.last().map(|d| d.hr0).unwrap_or(hr0);
                if since_record >= config.record_every || hr0 > 1.02 * last {
                    let rec = record(&solver, options.target, eps, dt)?;
                    series.push(rec);
                    since_record = 0;
                    if let Some(g) = config.bound_guard {
                        if rec.sup_rhr > g {
                            outcome = Outcome::SolverFailure;
                            failure = Some(format!(
                                "weighted gradient bound violated: sup|r h_r| = {} > {g} at t = {}",
                                rec.sup_rhr, rec.t
                            ));
                            break;
                        }
                    }
                }
                if hr0 >= config.blowup_threshold {
                    let hist: Vec<(f64, f64)> = series.iter().map(|d| (d.t, d.hr0)).collect();
                    if let Some(est) = detect_blowup(&hist, config.blowup_threshold) {
                        outcome = Outcome::BlewUp;
                        blowup = Some(est);
                        break;
                    }
                }
                let speed = solver.rate().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if speed < config.converge_tol {
                    outcome = Outcome::Converged;
                    break;
                }
            }
            StepStatus::Collapsed { at_origin } => {
                let hist: Vec<(f64, f64)> = series.iter().map(|d| (d.t, d.hr0)).collect();
                let growing = hist.first().map(|f| solver.hr0() > 4.0 * f.1).unwrap_or(false);
                if at_origin && growing {
                    outcome = Outcome::BlewUp;
                    blowup = Some(detect_blowup(&hist, hist.last().map(|h| h.1).unwrap_or(0.0)).unwrap_or(
                        BlowupEstimate { time: solver.time(), window: (solver.time(), solver.time()), doubling_ratio: f64::NAN },
                    ));
                } else {
                    outcome = Outcome::SolverFailure;
                    failure = Some(format!("step size fell below dt_min at t = {}", solver.time()));
                }
                break;
            }
            StepStatus::Degenerate(msg) => {
                outcome = Outcome::SolverFailure;
                failure = Some(msg);
                break;
            }
        }
    }
    if series.last().map(|d| d.t) != Some(solver.time()) {
        series.push(record(&solver, options.target, eps, last_dt)?);
    }
    Ok(RunReport {
        outcome,
        t_final: solver.time(),
        steps: solver.steps,
        rejected: solver.rejected,
        blowup,
        series,
        final_profile: solver.profile(),
        final_u: solver.u().to_vec(),
        failure,
    })
}

pub fn run(params: &FlowParams, u0: &TransformedProfile, config: &EvolveConfig, options: RunOptions<'_>) -> Result<RunReport> {
    run_with_observer(params, u0, config, options, |_, _| {})
}

/// One-sided second difference of `h` at the origin.
pub fn origin_curvature(profile: &RadialProfile) -> f64 {
    let h = &profile.h;
    let dr = profile.grid.spacing();
    (2.0 * h[0] - 5.0 * h[1] + 4.0 * h[2] - h[3]) / (dr * dr)
}
