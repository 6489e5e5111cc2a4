//! Pointwise evaluators for the rotationally symmetric p-harmonic flow.
//!
//! A rotationally symmetric map from the unit disk to the unit sphere is
//! written as `u(t, x) = (x/r sin h, cos h)` with `r = |x|`, so the whole flow
//! reduces to the scalar co-latitude profile `h(t, r)`. The evolution reads
//! `h_t = J^{(p-4)/2} A` where
//!
//! * `J = h_r^2 + sin^2 h / r^2` is the gradient density `|grad u|^2`,
//! * `A` is the five-term tension numerator (see [`tension`]).
//!
//! Every h-form evaluator rejects `r = 0`; the solver works in the
//! `h = 2 arctan(r u)` variables of [`uform`] where the origin is regular.

mod grid;
pub mod uform;

pub use grid::{from_u, to_u, RadialGrid, RadialProfile, TransformedProfile};
pub use uform::UJet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gradient densities below this value are treated as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-14;

/// The flow exponent. The single global knob of every formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    p: f64,
}

impl FlowParams {
    /// Fast-diffusion exponent, strictly inside `(1, 2)`.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 && p < 2.0 {
            Ok(Self { p })
        } else {
            Err(Error::Domain(format!("p = {p} must lie in the open interval (1, 2)")))
        }
    }

    /// Accepts the closed interval `[1, 2]`.
    ///
    /// Only meant for endpoint identities of the coefficient formulas; the
    /// flow itself is posed for `1 < p < 2`.
    pub fn closed(p: f64) -> Result<Self> {
        if p.is_finite() && (1.0..=2.0).contains(&p) {
            Ok(Self { p })
        } else {
            Err(Error::Domain(format!("p = {p} must lie in [1, 2]")))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Exponent `(p - 4) / 2` of the gradient density in the flow rate.
    pub fn density_exponent(&self) -> f64 {
        0.5 * (self.p - 4.0)
    }

    /// Upper bound `(3 - p) / (p - 1)` of the radial ratios.
    pub fn ratio_bound(&self) -> f64 {
        (3.0 - self.p) / (self.p - 1.0)
    }
}

/// Value and first two radial derivatives of a profile at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub h: f64,
    pub h_r: f64,
    pub h_rr: f64,
}

impl Jet {
    pub fn new(h: f64, h_r: f64, h_rr: f64) -> Self {
        Self { h, h_r, h_rr }
    }

    /// The reflected jet of `pi - h`.
    pub fn reflected(&self) -> Self {
        Self {
            h: std::f64::consts::PI - self.h,
            h_r: -self.h_r,
            h_rr: -self.h_rr,
        }
    }
}

fn positive_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "radius r = {r} must be positive; use the r -> 0 limit (J = 2 h_r^2) at the origin"
        )))
    }
}

/// Gradient density `h_r^2 + sin^2(h) / r^2`.
pub fn grad_density(h: f64, h_r: f64, r: f64) -> Result<f64> {
    positive_radius(r)?;
    let q = h.sin() / r;
    Ok(h_r * h_r + q * q)
}

/// Limit of [`grad_density`] at the origin for a profile with `h(0) = 0`.
pub fn grad_density_at_origin(h_r0: f64) -> f64 {
    2.0 * h_r0 * h_r0
}

/// The tension numerator `A(h)`:
///
/// ```text
/// (p-1) h_r^2 h_rr + (p-3) (h_r^2 sin h cos h / r^2 - h_r sin^2 h / r^3)
///     + h_r^3 / r + h_rr sin^2 h / r^2 - sin^3 h cos h / r^4
/// ```
pub fn tension(params: &FlowParams, jet: Jet, r: f64) -> Result<f64> {
    positive_radius(r)?;
    let p = params.p();
    let Jet { h, h_r, h_rr } = jet;
    let (s, c) = h.sin_cos();
    let r2 = r * r;
    let hr2 = h_r * h_r;
    let s2 = s * s;
    Ok((p - 1.0) * hr2 * h_rr
        + (p - 3.0) * (hr2 * s * c / r2 - h_r * s2 / (r2 * r))
        + hr2 * h_r / r
        + h_rr * s2 / r2
        - s2 * s * c / (r2 * r2))
}

/// The flow rate `F = J^{(p-4)/2} A`, i.e. `h_t` for a classical solution.
pub fn flow_rate(params: &FlowParams, jet: Jet, r: f64) -> Result<f64> {
    let j = grad_density(jet.h, jet.h_r, r)?;
    if j < DEGENERACY_FLOOR {
        return Err(Error::Degenerate(format!(
            "gradient density {j:.3e} at r = {r} (h = {})",
            jet.h
        )));
    }
    Ok(j.powf(params.density_exponent()) * tension(params, jet, r)?)
}

/// The two coefficient ratios of the stationary operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialRatios {
    /// Multiplies `h_r / r`.
    pub drift: f64,
    /// Multiplies `sin h cos h / r^2`.
    pub restoring: f64,
}

/// Ratios `R`, `S` of the rescaled tension `B = h_rr + R h_r/r - S sin h cos h/r^2`.
///
/// Both depend on `h` and the scale-free slope `r h_r` only.
pub fn radial_ratios(params: &FlowParams, h: f64, h_r: f64, r: f64) -> Result<RadialRatios> {
    positive_radius(r)?;
    let p = params.p();
    let x2 = (r * h_r).powi(2);
    let s2 = h.sin().powi(2);
    let den = (p - 1.0) * x2 + s2;
    if den <= 0.0 || !den.is_finite() {
        return Err(Error::Degenerate(format!(
            "ratio denominator vanishes at r = {r} (h = {h}, h_r = {h_r})"
        )));
    }
    Ok(RadialRatios {
        drift: (x2 + (3.0 - p) * s2) / den,
        restoring: ((3.0 - p) * x2 + s2) / den,
    })
}

/// The rescaled tension `B(h) = ((p-1) h_r^2 + sin^2 h / r^2)^{-1} A(h)`.
///
/// Stationary profiles are exactly the zeros of `B`.
pub fn stationary_residual(params: &FlowParams, jet: Jet, r: f64) -> Result<f64> {
    let ratios = radial_ratios(params, jet.h, jet.h_r, r)?;
    let (s, c) = jet.h.sin_cos();
    Ok(jet.h_rr + ratios.drift * jet.h_r / r - ratios.restoring * s * c / (r * r))
}

/// The curvature `h_rr` that makes the tension vanish at `(h, h_r, r)`.
///
/// At `r = 1` this is the value a Dirichlet datum needs so that the flow rate
/// vanishes on the boundary.
pub fn compatible_curvature(params: &FlowParams, h: f64, h_r: f64, r: f64) -> Result<f64> {
    positive_radius(r)?;
    let p = params.p();
    let (s, c) = h.sin_cos();
    let q2 = (s / r).powi(2);
    let hr2 = h_r * h_r;
    let den = (p - 1.0) * hr2 + q2;
    if den <= 0.0 {
        return Err(Error::Degenerate(format!("no curvature solves A = 0 at r = {r}")));
    }
    let num = s * c / (r * r) * ((3.0 - p) * hr2 + q2) - h_r / r * (hr2 + (3.0 - p) * q2);
    Ok(num / den)
}
