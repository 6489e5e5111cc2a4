//! Closed-form barrier families and the residuals of their defining inequalities.
//!
//! A subsolution satisfies `h_t <= F(h)`, a supersolution `h_t >= F(h)`. The
//! residual is reported with the orientation that makes it nonnegative for a
//! valid barrier.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow_core::{flow_rate, FlowParams, Jet, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// `2 arctan(lambda r)`, static subsolution.
    Phi { lambda: f64 },
    /// `pi - 2 arctan(lambda r)`, static supersolution.
    Psi { lambda: f64 },
    /// `(p+4)/3 arctan(r / b(t))` with `b(t) = b0 - delta t`.
    BlowupArctan { b0: f64, delta: f64 },
}

impl Family {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Family::Phi { lambda } | Family::Psi { lambda } => lambda > 0.0 && lambda.is_finite(),
            Family::BlowupArctan { b0, delta } => b0 > 0.0 && delta > 0.0 && b0.is_finite() && delta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("family parameters must be positive: {self:?}")))
        }
    }

    /// Supersolutions flip the sign of the residual.
    fn is_super(&self) -> bool {
        matches!(self, Family::Psi { .. })
    }

    /// Collapse time `b0 / delta`, infinite for the static families.
    pub fn collapse_time(&self) -> f64 {
        match *self {
            Family::BlowupArctan { b0, delta } => b0 / delta,
            _ => f64::INFINITY,
        }
    }
}

/// Value, radial derivatives and time derivative of a family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyJet {
    pub h: f64,
    pub h_r: f64,
    pub h_rr: f64,
    pub h_t: f64,
}

impl FamilyJet {
    pub fn jet(&self) -> Jet {
        Jet::new(self.h, self.h_r, self.h_rr)
    }
}

fn arctan_jet(lambda: f64, r: f64) -> (f64, f64, f64) {
    let q = 1.0 + lambda * lambda * r * r;
    (2.0 * (lambda * r).atan(), 2.0 * lambda / q, -4.0 * lambda.powi(3) * r / (q * q))
}

pub fn eval_family(family: &Family, params: &FlowParams, t: f64, r: f64) -> Result<FamilyJet> {
    family.validate()?;
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, 1]")));
    }
    Ok(match *family {
        Family::Phi { lambda } => {
            let (h, h_r, h_rr) = arctan_jet(lambda, r);
            FamilyJet { h, h_r, h_rr, h_t: 0.0 }
        }
        Family::Psi { lambda } => {
            let (h, h_r, h_rr) = arctan_jet(lambda, r);
            FamilyJet { h: PI - h, h_r: -h_r, h_rr: -h_rr, h_t: 0.0 }
        }
        Family::BlowupArctan { b0, delta } => {
            let b = b0 - delta * t;
            if !(b > 0.0) || t < 0.0 {
                return Err(Error::Domain(format!("t = {t} is past the collapse time {}", b0 / delta)));
            }
            let c = (params.p() + 4.0) / 3.0;
            let q = b * b + r * r;
            FamilyJet {
                h: c * (r / b).atan(),
                h_r: c * b / q,
                h_rr: -2.0 * c * b * r / (q * q),
                h_t: c * r * delta / q,
            }
        }
    })
}

/// Residual grid with its minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualMap {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    /// `values[i][j]` at `(times[i], radii[j])`.
    pub values: Vec<Vec<f64>>,
    pub min: f64,
    pub argmin: (f64, f64),
}

impl ResidualMap {
    /// Rows `(t, r, residual)` for plotting.
    pub fn rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.times.iter().enumerate().flat_map(move |(i, &t)| {
            self.radii.iter().enumerate().map(move |(j, &r)| vec![t, r, self.values[i][j]])
        })
    }
}

/// `F(h) - h_t` over the grid (`h_t - F(h)` for supersolutions).
pub fn subsolution_residual(family: &Family, params: &FlowParams, times: &[f64], radii: &[f64]) -> Result<ResidualMap> {
    let sign = if family.is_super() { -1.0 } else { 1.0 };
    let mut values = Vec::with_capacity(times.len());
    let mut min = f64::INFINITY;
    let mut argmin = (f64::NAN, f64::NAN);
    for &t in times {
        let mut row = Vec::with_capacity(radii.len());
        for &r in radii {
            let fj = eval_family(family, params, t, r)?;
            let res = sign * (flow_rate(params, fj.jet(), r)? - fj.h_t);
            if res < min {
                min = res;
                argmin = (t, r);
            }
            row.push(res);
        }
        values.push(row);
    }
    Ok(ResidualMap { times: times.to_vec(), radii: radii.to_vec(), values, min, argmin })
}

/// `nt` times on `[0, b0 / (2 delta)]` for the blow-up family, `{0}` for the static ones.
pub fn time_grid(family: &Family, nt: usize) -> Vec<f64> {
    match family {
        Family::BlowupArctan { .. } => {
            let end = 0.5 * family.collapse_time();
            (0..nt).map(|i| end * i as f64 / (nt - 1).max(1) as f64).collect()
        }
        _ => vec![0.0],
    }
}

/// `nr` radii `j / nr`, `j = 1..=nr`, covering `(0, 1]`.
pub fn radius_grid(nr: usize) -> Vec<f64> {
    (1..=nr).map(|j| j as f64 / nr as f64).collect()
}

/// Estimated admissible speed of the blow-up family with its grid signature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta0 {
    pub delta0: f64,
    pub b0: f64,
    pub nt: usize,
    pub nr: usize,
}

fn blowup_min(params: &FlowParams, b0: f64, delta: f64, nt: usize, nr: usize) -> Result<f64> {
    let fam = Family::BlowupArctan { b0, delta };
    Ok(subsolution_residual(&fam, params, &time_grid(&fam, nt), &radius_grid(nr))?.min)
}

/// Largest `delta` (to relative accuracy `1e-6`) for which the blow-up family
/// has a nonnegative residual on the `nt x nr` grid.
pub fn delta0_search(params: &FlowParams, b0: f64, nt: usize, nr: usize) -> Result<Delta0> {
    if !(b0 > 0.0) {
        return Err(Error::Domain(format!("b0 = {b0} must be positive")));
    }
    let passes = |d: f64| blowup_min(params, b0, d, nt, nr).map(|m| m >= 0.0);
    let mut delta = 1.0;
    let (mut lo, mut hi);
    if passes(delta)? {
        lo = delta;
        loop {
            delta *= 2.0;
            if delta > 1e12 {
                return Ok(Delta0 { delta0: lo, b0, nt, nr });
            }
            if !passes(delta)? {
                hi = delta;
                break;
            }
            lo = delta;
        }
    } else {
        hi = delta;
        loop {
            delta *= 0.5;
            if delta < 1e-12 {
                return Err(Error::Inconsistent(format!(
                    "blow-up family residual negative at delta = {delta:.1e} (p = {}, b0 = {b0})",
                    params.p()
                )));
            }
            if passes(delta)? {
                lo = delta;
                break;
            }
            hi = delta;
        }
    }
    while hi / lo > 1.0 + 1e-6 {
        let mid = (lo * hi).sqrt();
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Delta0 { delta0: lo, b0, nt, nr })
}

/// Profiles `h` at a list of time stamps on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub grid: RadialGrid,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(grid: RadialGrid) -> Self {
        Self { grid, times: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, t: f64, h: Vec<f64>) -> Result<()> {
        if h.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!("{} values on a {}-node grid", h.len(), self.grid.len())));
        }
        self.times.push(t);
        self.values.push(h);
        Ok(())
    }

    /// A time-independent profile repeated at the given stamps.
    pub fn constant(grid: RadialGrid, times: &[f64], f: impl Fn(f64) -> f64) -> Self {
        let h: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        Self { grid, times: times.to_vec(), values: vec![h; times.len()] }
    }
}

/// Largest `lower - upper` over all stamps and nodes.
pub fn order_check(lower: &Trace, upper: &Trace) -> Result<f64> {
    if lower.grid != upper.grid || lower.times != upper.times {
        return Err(Error::GridMismatch("traces differ in grid or time stamps".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    for (a, b) in lower.values.iter().zip(&upper.values) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max(x - y);
        }
    }
    Ok(worst.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64) -> FlowParams {
        FlowParams::new(p).unwrap()
    }

    #[test]
    fn phi_unit_values() {
        let j = eval_family(&Family::Phi { lambda: 1.0 }, &params(1.5), 0.0, 1.0).unwrap();
        assert!((j.h - PI / 2.0).abs() < 1e-15);
        assert!((j.h_r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn blowup_family_stays_below_level() {
        let pr = params(1.5);
        let fam = Family::BlowupArctan { b0: 1.0, delta: 0.5 };
        for t in [0.0, 1.0, 1.9] {
            let j = eval_family(&fam, &pr, t, 1.0).unwrap();
            assert!(j.h < 5.5 * PI / 6.0);
        }
        assert!(eval_family(&fam, &pr, 2.0, 0.5).is_err());
    }

    #[test]
    fn blowup_time_derivative_matches_differences() {
        let pr = params(1.3);
        let fam = Family::BlowupArctan { b0: 0.7, delta: 0.2 };
        let (t, r, e) = (0.4, 0.3, 1e-6);
        let j = eval_family(&fam, &pr, t, r).unwrap();
        let fd = (eval_family(&fam, &pr, t + e, r).unwrap().h - eval_family(&fam, &pr, t - e, r).unwrap().h) / (2.0 * e);
        assert!(j.h_t > 0.0);
        assert!((j.h_t - fd).abs() < 1e-8);
    }

    #[test]
    fn static_barriers_have_positive_residual() {
        let pr = params(1.5);
        let rs = radius_grid(100);
        for lambda in [0.5, 1.0, 2.0] {
            let phi = subsolution_residual(&Family::Phi { lambda }, &pr, &[0.0], &rs).unwrap();
            let psi = subsolution_residual(&Family::Psi { lambda }, &pr, &[0.0], &rs).unwrap();
            assert!(phi.min > 0.0 && psi.min > 0.0);
        }
    }

    #[test]
    fn blowup_family_is_subsolution_for_small_delta() {
        let pr = params(1.5);
        let fam = Family::BlowupArctan { b0: 1.0, delta: 1e-4 };
        let map = subsolution_residual(&fam, &pr, &time_grid(&fam, 200), &radius_grid(200)).unwrap();
        assert!(map.min >= 0.0, "{}", map.min);
        assert_eq!(map.rows().count(), 200 * 200);
    }

    /// The residual is `F - c r delta / (b^2 + r^2)` with `b` ranging over the
    /// same values for every `delta`, so the threshold is a plain minimum.
    fn delta0_direct(pr: &FlowParams, b0: f64, nt: usize, nr: usize) -> f64 {
        let c = (pr.p() + 4.0) / 3.0;
        let mut best = f64::INFINITY;
        for i in 0..nt {
            let b = b0 * (1.0 - 0.5 * i as f64 / (nt - 1) as f64);
            for r in radius_grid(nr) {
                let jet = Jet::new(c * (r / b).atan(), c * b / (b * b + r * r), -2.0 * c * b * r / (b * b + r * r).powi(2));
                let f = flow_rate(pr, jet, r).unwrap();
                best = best.min(f * (b * b + r * r) / (c * r));
            }
        }
        best
    }

    #[test]
    fn delta0_matches_direct_formula() {
        for p in [1.1, 1.5, 1.9] {
            for b0 in [0.5, 1.0, 2.0] {
                let pr = params(p);
                let est = delta0_search(&pr, b0, 40, 40).unwrap();
                let direct = delta0_direct(&pr, b0, 40, 40);
                assert!(est.delta0 > 0.0);
                assert!((est.delta0 / direct - 1.0).abs() < 1e-5, "p={p} b0={b0}: {} vs {direct}", est.delta0);
            }
        }
    }

    #[test]
    fn margin_grows_as_delta_shrinks() {
        let pr = params(1.5);
        let d0 = delta0_search(&pr, 1.0, 40, 40).unwrap().delta0;
        let half = blowup_min(&pr, 1.0, d0 / 2.0, 40, 40).unwrap();
        let tenth = blowup_min(&pr, 1.0, d0 / 10.0, 40, 40).unwrap();
        assert!(tenth > half && half >= 0.0);
    }

    #[test]
    fn order_check_examples() {
        let grid = RadialGrid::new(17).unwrap();
        let times = [0.0, 0.5];
        let a = Trace::constant(grid, &times, |r| r);
        assert_eq!(order_check(&a, &a).unwrap(), 0.0);
        let b = Trace::constant(grid, &times, |r| r - 0.25);
        assert!((order_check(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let c = Trace::constant(RadialGrid::new(9).unwrap(), &times, |r| r);
        assert!(order_check(&a, &c).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn arctan_barriers_have_strict_signs(
                p in 1.01f64..1.99, log_lambda in -6.9f64..6.9, r in 1e-3f64..1.0,
            ) {
                let pr = FlowParams::new(p).unwrap();
                let lambda = log_lambda.exp();
                let phi = subsolution_residual(&Family::Phi { lambda }, &pr, &[0.0], &[r]).unwrap();
                let psi = subsolution_residual(&Family::Psi { lambda }, &pr, &[0.0], &[r]).unwrap();
                prop_assert!(phi.min > 0.0);
                prop_assert!(psi.min > 0.0);
            }

            #[test]
            fn blowup_residual_decreases_in_delta(
                p in 1.01f64..1.99, b in 0.1f64..2.0, r in 0.01f64..1.0, d1 in 1e-4f64..10.0, d2 in 1e-4f64..10.0,
            ) {
                // Same b(t) for both speeds: t chosen so that b0 - delta t = b.
                let pr = FlowParams::new(p).unwrap();
                let b0 = 2.5;
                let res = |d: f64| {
                    let fam = Family::BlowupArctan { b0, delta: d };
                    subsolution_residual(&fam, &pr, &[(b0 - b) / d], &[r]).unwrap().min
                };
                let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
                prop_assert!(res(lo) >= res(hi) - 1e-12 * res(lo).abs().max(1.0));
            }
        }
    }
}
