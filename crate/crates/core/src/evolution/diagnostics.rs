use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow_core::{FlowParams, RadialProfile};

/// One row of the diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    /// `h_r(t, 0) = 2 u(t, 0)`.
    pub hr0: f64,
    pub sup_rhr: f64,
    pub d1: f64,
    pub d2: f64,
    /// Distance to the reference stationary state, NaN without one.
    pub dist: f64,
    pub dt: f64,
}

/// Suprema of the weighted-gradient quantities over the nodes with `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundMonitor {
    /// `sup |r h_r|`.
    pub sup_rhr: f64,
    /// `sup (r h_r)^3 / h^2`.
    pub sup_d1: f64,
    /// `sup r h_r (pi + h)`.
    pub sup_d2: f64,
}

pub fn monitor_bounds(profile: &RadialProfile) -> Result<BoundMonitor> {
    let h_r = profile
        .h_r
        .as_ref()
        .ok_or_else(|| Error::Domain("bound monitor needs h_r samples".into()))?;
    let mut m = BoundMonitor { sup_rhr: 0.0, sup_d1: f64::NEG_INFINITY, sup_d2: f64::NEG_INFINITY };
    for i in 1..profile.grid.len() {
        let r = profile.grid.node(i);
        let h = profile.h[i];
        if h == 0.0 {
            return Err(Error::Degenerate(format!("h = 0 at interior node {i}; d1 undefined")));
        }
        let x = r * h_r[i];
        m.sup_rhr = m.sup_rhr.max(x.abs());
        m.sup_d1 = m.sup_d1.max(x.powi(3) / (h * h));
        m.sup_d2 = m.sup_d2.max(x * (PI + h));
    }
    Ok(m)
}

/// Threshold `K_1 = (3 (3-p) / (4 (p-1) l^{1/3}))^{3/2}` of the lower bound argument.
pub fn k_one(params: &FlowParams, l: f64) -> f64 {
    let p = params.p();
    (3.0 * (3.0 - p) / (4.0 * (p - 1.0) * l.cbrt())).powf(1.5)
}

/// Threshold `2 pi^2 / (p-1) [sqrt((4 (p-2)^2 pi + (p-1)^2) / pi) - 2 (2-p)]` of the upper bound argument.
pub fn k_bar_one(params: &FlowParams) -> f64 {
    let p = params.p();
    2.0 * PI * PI / (p - 1.0)
        * (((4.0 * (p - 2.0).powi(2) * PI + (p - 1.0).powi(2)) / PI).sqrt() - 2.0 * (2.0 - p))
}

/// `sup_{r>0} (pi / h0)^{2/3} |r h0_r|`, the data term of the weighted-gradient bound.
pub fn initial_bound(profile: &RadialProfile) -> Result<f64> {
    let h_r = profile
        .h_r
        .as_ref()
        .ok_or_else(|| Error::Domain("initial bound needs h_r samples".into()))?;
    let mut sup: f64 = 0.0;
    for i in 1..profile.grid.len() {
        let h = profile.h[i];
        if !(h > 0.0) {
            return Err(Error::Degenerate(format!("h0 = {h} at node {i}")));
        }
        sup = sup.max((PI / h).powf(2.0 / 3.0) * (profile.grid.node(i) * h_r[i]).abs());
    }
    Ok(sup)
}

/// `max_{r_i >= eps} |h(r_i) - target(r_i)|`, the target interpolated at the state's nodes.
pub fn distance_to_stationary(state: &RadialProfile, target: &RadialProfile, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    let mut d: f64 = 0.0;
    for i in 0..state.grid.len() {
        let r = state.grid.node(i);
        if r >= eps {
            d = d.max((state.h[i] - target.sample(r)).abs());
        }
    }
    Ok(d)
}

/// Least-squares slope of `y` against `t`.
pub fn trend_slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len().min(y.len()) as f64;
    if n < 2.0 {
        return 0.0;
    }
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        sxy += (a - tm) * (b - ym);
        sxx += (a - tm) * (a - tm);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Extrapolated blow-up time from the `1/(T - t)` model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupEstimate {
    pub time: f64,
    /// Time window of the records used by the fit.
    pub window: (f64, f64),
    /// Ratio of the last two doubling times of `h_r(t, 0)`.
    pub doubling_ratio: f64,
}

/// First time `hr0` reaches `level`, interpolated between records.
fn crossing(series: &[(f64, f64)], level: f64) -> Option<f64> {
    let k = series.iter().position(|&(_, v)| v >= level)?;
    if k == 0 {
        return Some(series[0].0);
    }
    let (t0, v0) = series[k - 1];
    let (t1, v1) = series[k];
    Some(t0 + (level - v0) / (v1 - v0) * (t1 - t0))
}

/// Declares blow-up when `h_r(t, 0)` passes `threshold` and accelerates.
///
/// Acceleration means the doubling time from `threshold/2` to `threshold` is
/// under 0.9 of the one from `threshold/4` to `threshold/2` (a `1/(T - t)`
/// law gives 0.5, linear growth gives 2). The blow-up time comes from a
/// least-squares line through `1 / h_r(t, 0)` over the records above
/// `threshold / 4`, continued to zero.
pub fn detect_blowup(series: &[(f64, f64)], threshold: f64) -> Option<BlowupEstimate> {
    let last = series.last()?;
    if last.1 < threshold {
        return None;
    }
    let t4 = crossing(series, 0.25 * threshold)?;
    let t2 = crossing(series, 0.5 * threshold)?;
    let t1 = crossing(series, threshold)?;
    if t2 <= t4 {
        return None;
    }
    let ratio = (t1 - t2) / (t2 - t4);
    if !(ratio < 0.9) {
        return None;
    }
    let window: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= t4).collect();
    let ts: Vec<f64> = window.iter().map(|w| w.0).collect();
    let inv: Vec<f64> = window.iter().map(|w| 1.0 / w.1).collect();
    let slope = trend_slope(&ts, &inv);
    if !(slope < 0.0) {
        return None;
    }
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let im = inv.iter().sum::<f64>() / n;
    let time = tm - im / slope;
    Some(BlowupEstimate { time: time.max(last.0), window: (ts[0], last.0), doubling_ratio: ratio })
}
