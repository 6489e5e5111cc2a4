//! The flow in the variable `u` defined by `h = 2 arctan(r u)`.
//!
//! With `w = u_r` the evolution becomes a quasilinear parabolic equation
//!
//! ```text
//! u_t = a(r, u, w) u_rr + b(r, u, w) w / r + f(r, u, w)
//! ```
//!
//! whose coefficients stay smooth at `r = 0` for smooth even `u`. There the
//! quotient `w / r` is replaced by its limit `u_rr`.

use serde::{Deserialize, Serialize};

use super::{FlowParams, DEGENERACY_FLOOR};
use crate::error::{Error, Result};

/// Value and first two radial derivatives of `u` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UJet {
    pub u: f64,
    pub u_r: f64,
    pub u_rr: f64,
}

impl UJet {
    pub fn new(u: f64, u_r: f64, u_rr: f64) -> Self {
        Self { u, u_r, u_rr }
    }
}

fn nonnegative_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius r = {r} must be nonnegative")))
    }
}

/// Gradient density in u-variables, `(4 (u + r w)^2 + 4 u^2) / (1 + r^2 u^2)^2`.
///
/// Equals `h_r^2 + sin^2 h / r^2` for `r > 0` and `2 h_r(0)^2` at the origin.
pub fn u_grad_density(r: f64, u: f64, w: f64) -> f64 {
    let m = 1.0 + r * r * u * u;
    let v = u + r * w;
    4.0 * (v * v + u * u) / (m * m)
}

fn density_power(params: &FlowParams, r: f64, u: f64, w: f64) -> Result<f64> {
    nonnegative_radius(r)?;
    let j = u_grad_density(r, u, w);
    if j < DEGENERACY_FLOOR {
        return Err(Error::Degenerate(format!("u-form gradient density {j:.3e} at r = {r}")));
    }
    Ok(j.powf(params.density_exponent()))
}

/// Diffusion coefficient `a`, the multiplier of `u_rr`.
pub fn u_diffusion(params: &FlowParams, r: f64, u: f64, w: f64) -> Result<f64> {
    let jp = density_power(params, r, u, w)?;
    Ok(diffusion_raw(params.p(), jp, r, u, w))
}

/// Drift coefficient `b`, the multiplier of `w / r`.
pub fn u_drift(params: &FlowParams, r: f64, u: f64, w: f64) -> Result<f64> {
    let jp = density_power(params, r, u, w)?;
    Ok(drift_raw(params.p(), jp, r, u))
}

/// Zeroth-order part `f` of the right-hand side.
pub fn u_source(params: &FlowParams, r: f64, u: f64, w: f64) -> Result<f64> {
    let jp = density_power(params, r, u, w)?;
    let m = 1.0 + r * r * u * u;
    Ok(4.0 * jp * lower_order(params.p(), r, u, w) / (m * m * m))
}

/// The full right-hand side `u_t` for the jet `(u, u_r, u_rr)` at radius `r`.
pub fn u_rate(params: &FlowParams, r: f64, jet: UJet) -> Result<f64> {
    let jp = density_power(params, r, jet.u, jet.u_r)?;
    let q = if r > 0.0 { jet.u_r / r } else { jet.u_rr };
    Ok(rate_raw(params.p(), jp, r, jet.u, jet.u_r, jet.u_rr, q))
}

pub(crate) fn diffusion_raw(p: f64, jp: f64, r: f64, u: f64, w: f64) -> f64 {
    let m = 1.0 + r * r * u * u;
    let v = u + r * w;
    jp * 4.0 * ((p - 1.0) * v * v + u * u) / (m * m)
}

pub(crate) fn drift_raw(p: f64, jp: f64, r: f64, u: f64) -> f64 {
    let m = 1.0 + r * r * u * u;
    jp * 12.0 * p * u * u / (m * m * m)
}

/// The part of the bracket that does not involve `u_rr` or `w / r`.
fn lower_order(p: f64, r: f64, u: f64, w: f64) -> f64 {
    let (r2, u2, w2) = (r * r, u * u, w * w);
    2.0 * r2 * r2 * (1.0 - p) * u * w2 * w2
        - r * w2 * w * (r2 * (6.0 * p - 7.0) * u2 - 2.0 * p + 1.0)
        - u * w2 * (3.0 * r2 * (3.0 * p - 4.0) * u2 - 5.0 * p + 4.0)
        - r * (9.0 * p - 16.0) * u2 * u2 * w
        + 4.0 * (2.0 - p) * u2 * u2 * u
}

/// Right-hand side with a precomputed density power `jp = j^{(p-4)/2}` and
/// the quotient `q` standing for `w / r` (or `u_rr` at the origin).
pub(crate) fn rate_raw(p: f64, jp: f64, r: f64, u: f64, w: f64, u_rr: f64, q: f64) -> f64 {
    let (r2, u2) = (r * r, u * u);
    let m = 1.0 + r2 * u2;
    let principal =
        u_rr * (r2 * (p - 1.0) * w * w + 2.0 * r * (p - 1.0) * u * w + p * u2) * m;
    4.0 * jp * (principal + 3.0 * p * u2 * q + lower_order(p, r, u, w)) / (m * m * m)
}

pub(crate) fn density_power_raw(p: f64, r: f64, u: f64, w: f64) -> f64 {
    u_grad_density(r, u, w).powf(0.5 * (p - 4.0))
}
