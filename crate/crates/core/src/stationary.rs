//! The global stationary profile `h*` and the stationary states built from it.
//!
//! Stationary profiles solve `B(h) = 0`. Written in the log radius
//! `x = ln r` the equation is autonomous,
//!
//! ```text
//! h_xx = -(R - 1) h_x + S sin h cos h,
//! ```
//!
//! with `R`, `S` depending on `(h, h_x)` only, so the long oscillation about
//! `pi/2` (roughly periodic in `ln r`) is integrated with steps of bounded
//! size instead of steps growing like `r`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::flow_core::{radial_ratios, stationary_residual, FlowParams, Jet, RadialGrid, RadialProfile};
use crate::ode::{step_factor, Dp5};

/// Radius where the regular series `h = c r` hands over to the integrator.
pub const R_START: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryConfig {
    /// Outer end of the integration.
    pub r_max: f64,
    /// Relative tolerance of the integrator.
    pub tol: f64,
    /// Stop after this many critical points.
    pub max_critical: usize,
    /// Stop once a critical value is this close to `pi/2`.
    pub amplitude_floor: Option<f64>,
    /// Initial slope `h'(0)`.
    pub slope: f64,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self { r_max: 1e30, tol: 1e-10, max_critical: 20, amplitude_floor: None, slope: 1.0 }
    }
}

impl StationaryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max >= 50.0) || !self.r_max.is_finite() {
            return Err(Error::Domain(format!("r_max = {} must be at least 50", self.r_max)));
        }
        if !(1e-13..=1e-6).contains(&self.tol) {
            return Err(Error::Domain(format!("tol = {} must lie in [1e-13, 1e-6]", self.tol)));
        }
        if !(self.slope > 0.0) || !self.slope.is_finite() {
            return Err(Error::Domain(format!("slope = {} must be positive", self.slope)));
        }
        Ok(())
    }

    fn floor(&self) -> f64 {
        self.amplitude_floor.unwrap_or(1e4 * self.tol)
    }
}

/// A critical point `r_n` of `h*` with its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub r: f64,
    pub value: f64,
}

/// The shooting solution on `[R_START, r_end]`, stored in log radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryProfile {
    pub params: FlowParams,
    pub config: StationaryConfig,
    x: Vec<f64>,
    h: Vec<f64>,
    hx: Vec<f64>,
    hxx: Vec<f64>,
    pub critical_points: Vec<CriticalPoint>,
}

fn log_rhs(p: &FlowParams, h: f64, hx: f64) -> f64 {
    // R and S only see r h_r, so r = 1 is a valid stand-in.
    match radial_ratios(p, h, hx, 1.0) {
        Ok(rr) => -(rr.drift - 1.0) * hx + rr.restoring * h.sin() * h.cos(),
        Err(_) => f64::NAN,
    }
}

/// Quintic Hermite interpolation on `[0, 1]` from scaled end jets.
/// Returns value, first and second derivative in the unit variable.
fn quintic(t: f64, y0: [f64; 3], y1: [f64; 3]) -> [f64; 3] {
    let c0 = y0[0];
    let c1 = y0[1];
    let c2 = 0.5 * y0[2];
    let a = y1[0] - (c0 + c1 + c2);
    let b = y1[1] - (c1 + 2.0 * c2);
    let c = y1[2] - 2.0 * c2;
    let c3 = 10.0 * a - 4.0 * b + 0.5 * c;
    let c4 = -15.0 * a + 7.0 * b - c;
    let c5 = 6.0 * a - 3.0 * b + 0.5 * c;
    let v = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
    let d = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
    let dd = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
    [v, d, dd]
}

/// Integrates `B(h) = 0` outward from the regular series at [`R_START`].
pub fn integrate_hstar(params: &FlowParams, config: &StationaryConfig) -> Result<StationaryProfile> {
    config.validate()?;
    let tol = config.tol;
    let x_end = config.r_max.ln();
    let x0 = R_START.ln();
    let h0 = config.slope * R_START;
    let mut y = vec![h0, h0];
    let mut f0 = vec![h0, log_rhs(params, h0, h0)];

    let mut prof = StationaryProfile {
        params: *params,
        config: *config,
        x: vec![x0],
        h: vec![y[0]],
        hx: vec![y[1]],
        hxx: vec![f0[1]],
        critical_points: Vec::new(),
    };

    let mut rhs = |_t: f64, y: &[f64], d: &mut [f64]| {
        d[0] = y[1];
        d[1] = log_rhs(params, y[0], y[1]);
    };
    let mut dp = Dp5::new(2);
    let mut x = x0;
    let mut dx: f64 = 1e-3;
    while x < x_end {
        let step = dx.min(x_end - x);
        if step < 1e-12 {
            return Err(Error::Integration { r: x.exp(), reason: format!("step size underflow ({step:.3e})") });
        }
        // Pure relative control: the start value is tiny and the solution is
        // only defined up to the scaling h(r) -> h(alpha r).
        let atol = tol * y[0].abs().max(y[1].abs()).max(1e-300);
        let err = dp.step(&mut rhs, x, &y, &f0, step, tol, atol);
        if err > 1.0 {
            dx = step * step_factor(err);
            continue;
        }
        let (hn, hxn) = (dp.y_new[0], dp.y_new[1]);
        if !(hn > 0.0 && hn < PI) || !hxn.is_finite() {
            return Err(Error::Integration {
                r: (x + step).exp(),
                reason: format!("profile left (0, pi): h = {hn}"),
            });
        }
        let crossed = y[1] > 0.0 && hxn <= 0.0 || y[1] < 0.0 && hxn >= 0.0;
        if crossed {
            let cp = refine_critical(&mut rhs, &mut dp, x, &y, &f0, step, tol, atol);
            prof.critical_points.push(cp);
        }
        x += step;
        y.copy_from_slice(&dp.y_new);
        f0.copy_from_slice(&dp.f_new);
        prof.x.push(x);
        prof.h.push(y[0]);
        prof.hx.push(y[1]);
        prof.hxx.push(f0[1]);
        dx = step * step_factor(err);
        if crossed {
            let n = prof.critical_points.len();
            let amp = (prof.critical_points[n - 1].value - FRAC_PI_2).abs();
            if n >= config.max_critical || n >= 2 && amp < config.floor() {
                break;
            }
        }
    }
    Ok(prof)
}

#[allow(clippy::too_many_arguments)]
fn refine_critical<F: FnMut(f64, &[f64], &mut [f64])>(
    rhs: &mut F,
    dp: &mut Dp5,
    x: f64,
    y: &[f64],
    f0: &[f64],
    step: f64,
    tol: f64,
    atol: f64,
) -> CriticalPoint {
    let mut scratch = Dp5::new(2);
    let sign0 = y[1].signum();
    let (mut lo, mut hi) = (0.0, step);
    let mut value = dp.y_new[0];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-15 * (1.0 + x.abs()) {
            break;
        }
        scratch.step(rhs, x, y, f0, mid, tol, atol);
        value = scratch.y_new[0];
        if scratch.y_new[1].signum() == sign0 && scratch.y_new[1] != 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    CriticalPoint { r: (x + 0.5 * (lo + hi)).exp(), value }
}

impl StationaryProfile {
    pub fn slope_at_origin(&self) -> f64 {
        self.config.slope
    }

    /// The threshold `H = h*(r_0) = max h*`.
    pub fn threshold(&self) -> Result<f64> {
        self.critical_points
            .first()
            .map(|c| c.value)
            .ok_or_else(|| Error::Integration { r: self.r_end(), reason: "no critical point reached".into() })
    }

    pub fn r_nodes(&self) -> Vec<f64> {
        self.x.iter().map(|x| x.exp()).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    /// `r h*'(r)` at the nodes.
    pub fn log_slopes(&self) -> &[f64] {
        &self.hx
    }

    pub fn r_end(&self) -> f64 {
        self.x.last().copied().unwrap_or(R_START).exp()
    }

    /// Largest `r h*'` over the computed range.
    pub fn max_log_slope(&self) -> f64 {
        self.hx.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Jet `(h*, h*', h*'')` at radius `r`. Below [`R_START`] the regular series is used.
    pub fn eval(&self, r: f64) -> Result<Jet> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("radius {r} must be nonnegative")));
        }
        let c = self.config.slope;
        if r < R_START {
            return Ok(Jet::new(c * r, c, 0.0));
        }
        let x = r.ln();
        let last = self.x.len() - 1;
        if x > self.x[last] + 1e-12 {
            return Err(Error::Domain(format!("radius {r} beyond the computed range {}", self.r_end())));
        }
        let i = match self.x.partition_point(|&v| v <= x) {
            0 => 0,
            k => (k - 1).min(last - 1),
        };
        let d = self.x[i + 1] - self.x[i];
        let t = ((x - self.x[i]) / d).clamp(0.0, 1.0);
        let [v, dv, ddv] = quintic(
            t,
            [self.h[i], self.hx[i] * d, self.hxx[i] * d * d],
            [self.h[i + 1], self.hx[i + 1] * d, self.hxx[i + 1] * d * d],
        );
        let hx = dv / d;
        let hxx = ddv / (d * d);
        Ok(Jet::new(v, hx / r, (hxx - hx) / (r * r)))
    }

    /// Largest `|r^2 B(h*)|` at the interval midpoints of the interpolant.
    ///
    /// At the nodes the integrator enforces `B = 0` by construction, so the
    /// midpoints are where the residual carries information. The factor `r^2`
    /// makes it the scale-free residual of the log-radius equation.
    pub fn residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.x.len() - 1 {
            let r = (0.5 * (self.x[i] + self.x[i + 1])).exp();
            let jet = self.eval(r)?;
            let b = stationary_residual(&self.params, jet, r)?;
            worst = worst.max((r * r * b).abs());
        }
        Ok(worst)
    }

    /// First index `n0` from which `|h*(r_n) - pi/2|` decreases strictly.
    pub fn envelope_onset(&self) -> Option<usize> {
        let amps: Vec<f64> = self.critical_points.iter().map(|c| (c.value - FRAC_PI_2).abs()).collect();
        if amps.len() < 2 {
            return None;
        }
        let mut n0 = amps.len() - 1;
        while n0 > 0 && amps[n0 - 1] > amps[n0] {
            n0 -= 1;
        }
        if n0 + 1 < amps.len() {
            Some(n0)
        } else {
            None
        }
    }

    /// Solves `h*(alpha) = target` on the initial rise `[0, r_0]`.
    pub fn rise_preimage(&self, target: f64) -> Result<f64> {
        let h_max = self.threshold()?;
        if !(target > 0.0 && target < h_max) {
            return Err(Error::Domain(format!("value {target} is not attained on the initial rise (0, {h_max})")));
        }
        let c = self.config.slope;
        if target < c * R_START {
            return Ok(target / c);
        }
        let (mut lo, mut hi) = (R_START, self.critical_points[0].r);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid)?.h < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// The stationary state `H_l(r) = pi - h*(alpha r)` with `H_l(1) = l`, for `l` in `(H, pi)`.
pub fn build_hl(params: &FlowParams, l: f64, profile: &StationaryProfile, grid: RadialGrid) -> Result<RadialProfile> {
    let _ = params;
    let h_max = profile.threshold()?;
    if !(l > h_max && l < PI) {
        return Err(Error::Domain(format!("l = {l} must lie in (H, pi) = ({h_max}, pi)")));
    }
    let alpha = profile.rise_preimage(PI - l)?;
    rescaled(profile, alpha, grid, true)
}

/// The stationary state `h*(alpha r)` with boundary value `l` in `(0, H)`.
pub fn build_lower(profile: &StationaryProfile, l: f64, grid: RadialGrid) -> Result<RadialProfile> {
    let alpha = profile.rise_preimage(l)?;
    rescaled(profile, alpha, grid, false)
}

fn rescaled(profile: &StationaryProfile, alpha: f64, grid: RadialGrid, reflect: bool) -> Result<RadialProfile> {
    let mut jets = Vec::with_capacity(grid.len());
    for r in grid.nodes() {
        let j = profile.eval(alpha * r)?;
        let j = Jet::new(j.h, alpha * j.h_r, alpha * alpha * j.h_rr);
        jets.push(if reflect { j.reflected() } else { j });
    }
    RadialProfile::with_derivatives(
        grid,
        jets.iter().map(|j| j.h).collect(),
        jets.iter().map(|j| j.h_r).collect(),
        jets.iter().map(|j| j.h_rr).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hstar(p: f64) -> StationaryProfile {
        integrate_hstar(&FlowParams::new(p).unwrap(), &StationaryConfig::default()).unwrap()
    }

    #[test]
    fn quintic_reproduces_quintics() {
        let f = |t: f64| [1.0 + t - 2.0 * t.powi(3) + 0.5 * t.powi(5), 1.0 - 6.0 * t * t + 2.5 * t.powi(4), -12.0 * t + 10.0 * t.powi(3)];
        let v = quintic(0.37, f(0.0), f(1.0));
        let e = f(0.37);
        for k in 0..3 {
            assert!((v[k] - e[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = StationaryConfig::default();
        c.r_max = 10.0;
        assert!(c.validate().is_err());
        c = StationaryConfig { tol: 1e-5, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn threshold_and_alternation() {
        let prof = hstar(1.5);
        let h_max = prof.threshold().unwrap();
        assert!(h_max > FRAC_PI_2 && h_max < PI);
        assert!((h_max - 2.036427772397).abs() < 1e-8, "{h_max}");
        for (n, c) in prof.critical_points.iter().enumerate() {
            if n % 2 == 0 {
                assert!(c.value > FRAC_PI_2 && c.value < PI);
            } else {
                assert!(c.value > 0.0 && c.value < FRAC_PI_2);
            }
            assert!((c.value - FRAC_PI_2).abs() <= (h_max - FRAC_PI_2).abs());
        }
        assert!(prof.critical_points.len() >= 4);
        assert!(prof.envelope_onset().is_some());
        assert!(prof.residual().unwrap() < 1e-6);
    }

    #[test]
    fn first_critical_point_is_a_maximum() {
        let prof = hstar(1.3);
        let r0 = prof.critical_points[0].r;
        assert!(prof.eval(r0 * 0.99).unwrap().h_r > 0.0);
        assert!(prof.eval(r0 * 1.01).unwrap().h_r < 0.0);
    }

    #[test]
    fn hl_matches_boundary_value_and_residual() {
        let pr = FlowParams::new(1.5).unwrap();
        let prof = hstar(1.5);
        let h_max = prof.threshold().unwrap();
        let l = 0.5 * (h_max + PI);
        let grid = RadialGrid::new(201).unwrap();
        let hl = build_hl(&pr, l, &prof, grid).unwrap();
        assert!((hl.h[200] - l).abs() < 1e-12);
        assert!((hl.h[0] - PI).abs() < 1e-15);
        for i in 2..=200 {
            let r = grid.node(i);
            let b = stationary_residual(&pr, hl.jet(i).unwrap(), r).unwrap();
            assert!(b.abs() < 1e-6, "r = {r}: {b}");
        }
        assert!(build_hl(&pr, h_max - 0.01, &prof, grid).is_err());
        assert!(build_hl(&pr, PI, &prof, grid).is_err());
    }

    #[test]
    fn scaled_shooting_matches_unit_slope() {
        let pr = FlowParams::new(1.5).unwrap();
        let c = 3.0;
        let base = hstar(1.5);
        let cfg = StationaryConfig { slope: c, ..Default::default() };
        let scaled = integrate_hstar(&pr, &cfg).unwrap();
        for r in [0.01, 0.3, 1.0, 3.0, 20.0] {
            let a = scaled.eval(r / c).unwrap().h;
            let b = base.eval(r).unwrap().h;
            assert!((a - b).abs() < 1e-8, "r = {r}: {a} vs {b}");
        }
    }
}
