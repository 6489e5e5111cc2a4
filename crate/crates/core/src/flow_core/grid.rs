use serde::{Deserialize, Serialize};

use super::Jet;
use crate::error::{Error, Result};

/// Uniform grid `r_i = i / (n - 1)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadialGrid {
    n: usize,
}

impl RadialGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("grid needs at least 3 nodes, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Node `i`; the endpoints are exactly 0 and 1.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index `i` of the cell `[r_i, r_{i+1}]` containing `r` (clamped to the grid).
    pub fn cell(&self, r: f64) -> usize {
        let x = (r / self.spacing()).floor();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.n - 2)
        }
    }
}

fn check_len(grid: &RadialGrid, v: &[f64], what: &str) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{what} has {} entries, grid has {}",
            v.len(),
            grid.len()
        )));
    }
    Ok(())
}

/// Samples of `h` on a grid, optionally with `h_r` and `h_rr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub h: Vec<f64>,
    pub h_r: Option<Vec<f64>>,
    pub h_rr: Option<Vec<f64>>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, h: Vec<f64>) -> Result<Self> {
        check_len(&grid, &h, "h")?;
        Ok(Self { grid, h, h_r: None, h_rr: None })
    }

    pub fn with_derivatives(
        grid: RadialGrid,
        h: Vec<f64>,
        h_r: Vec<f64>,
        h_rr: Vec<f64>,
    ) -> Result<Self> {
        check_len(&grid, &h, "h")?;
        check_len(&grid, &h_r, "h_r")?;
        check_len(&grid, &h_rr, "h_rr")?;
        Ok(Self { grid, h, h_r: Some(h_r), h_rr: Some(h_rr) })
    }

    /// Samples an analytic jet at every node.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> Jet) -> Self {
        let jets: Vec<Jet> = grid.nodes().into_iter().map(f).collect();
        Self {
            grid,
            h: jets.iter().map(|j| j.h).collect(),
            h_r: Some(jets.iter().map(|j| j.h_r).collect()),
            h_rr: Some(jets.iter().map(|j| j.h_rr).collect()),
        }
    }

    pub fn jet(&self, i: usize) -> Option<Jet> {
        Some(Jet::new(self.h[i], self.h_r.as_ref()?[i], self.h_rr.as_ref()?[i]))
    }

    /// Fills `h_r` and `h_rr` from `h` with second-order differences.
    ///
    /// Central stencils in the interior, one-sided second-order stencils at
    /// both ends. Needs at least five nodes.
    pub fn differentiate(&self) -> Result<RadialProfile> {
        let n = self.grid.len();
        if n < 5 {
            return Err(Error::Domain(format!("differentiation needs n >= 5, got {n}")));
        }
        let dr = self.grid.spacing();
        let h = &self.h;
        let mut h_r = vec![0.0; n];
        let mut h_rr = vec![0.0; n];
        for i in 1..n - 1 {
            h_r[i] = (h[i + 1] - h[i - 1]) / (2.0 * dr);
            h_rr[i] = (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (dr * dr);
        }
        h_r[0] = (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * dr);
        h_rr[0] = (2.0 * h[0] - 5.0 * h[1] + 4.0 * h[2] - h[3]) / (dr * dr);
        let m = n - 1;
        h_r[m] = (3.0 * h[m] - 4.0 * h[m - 1] + h[m - 2]) / (2.0 * dr);
        h_rr[m] = (2.0 * h[m] - 5.0 * h[m - 1] + 4.0 * h[m - 2] - h[m - 3]) / (dr * dr);
        RadialProfile::with_derivatives(self.grid, h.clone(), h_r, h_rr)
    }

    /// Value at an arbitrary `r` in `[0, 1]`: cubic Hermite when slopes are
    /// stored, linear otherwise.
    pub fn sample(&self, r: f64) -> f64 {
        let i = self.grid.cell(r);
        let dr = self.grid.spacing();
        let t = ((r - self.grid.node(i)) / dr).clamp(0.0, 1.0);
        let (y0, y1) = (self.h[i], self.h[i + 1]);
        match &self.h_r {
            Some(d) => {
                let (m0, m1) = (d[i] * dr, d[i + 1] * dr);
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * y1
                    + (t3 - t2) * m1
            }
            None => y0 + t * (y1 - y0),
        }
    }
}

/// Samples of `u` with `h = 2 arctan(r u)`, optionally with `u_r` and `u_rr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedProfile {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub u_r: Option<Vec<f64>>,
    pub u_rr: Option<Vec<f64>>,
}

impl TransformedProfile {
    pub fn new(grid: RadialGrid, u: Vec<f64>) -> Result<Self> {
        check_len(&grid, &u, "u")?;
        Ok(Self { grid, u, u_r: None, u_rr: None })
    }
}

/// Maps `h` to `u = tan(h / 2) / r`.
///
/// At the origin `u(0) = h_r(0) / 2` when slopes are stored and the even
/// extrapolation `(4 u_1 - u_2) / 3` otherwise. Derivatives are carried over
/// by the chain rule when both `h_r` and `h_rr` are present.
pub fn to_u(profile: &RadialProfile) -> Result<TransformedProfile> {
    let grid = profile.grid;
    let n = grid.len();
    if profile.h[0].abs() > 1e-10 {
        return Err(Error::Transform {
            node: 0,
            reason: format!("h(0) = {} but the map must fix the north pole", profile.h[0]),
        });
    }
    let mut u = vec![0.0; n];
    let mut u_r = vec![0.0; n];
    let mut u_rr = vec![0.0; n];
    let derivs = profile.h_r.as_ref().zip(profile.h_rr.as_ref());
    for i in 1..n {
        let half = 0.5 * profile.h[i];
        if !half.is_finite() || half.cos() <= 1e-12 {
            return Err(Error::Transform {
                node: i,
                reason: format!("h = {} is not below pi", profile.h[i]),
            });
        }
        let r = grid.node(i);
        let z = half.tan();
        u[i] = z / r;
        if let Some((hr, hrr)) = derivs {
            let m = 1.0 + z * z;
            let z1 = 0.5 * m * hr[i];
            let z2 = 0.5 * m * hrr[i] + 0.5 * z * m * hr[i] * hr[i];
            u_r[i] = z1 / r - z / (r * r);
            u_rr[i] = z2 / r - 2.0 * z1 / (r * r) + 2.0 * z / (r * r * r);
        }
    }
    match derivs {
        Some((hr, _)) => {
            u[0] = 0.5 * hr[0];
            u_r[0] = 0.0;
            u_rr[0] = if n > 2 { 2.0 * u_rr[1] - u_rr[2] } else { u_rr[1] };
            Ok(TransformedProfile { grid, u, u_r: Some(u_r), u_rr: Some(u_rr) })
        }
        None => {
            u[0] = (4.0 * u[1] - u[2]) / 3.0;
            TransformedProfile::new(grid, u)
        }
    }
}

/// Maps `u` back to `h = 2 arctan(r u)`, with slopes when `u_r`, `u_rr` are stored.
pub fn from_u(profile: &TransformedProfile) -> RadialProfile {
    let grid = profile.grid;
    let r = grid.nodes();
    let h: Vec<f64> = r.iter().zip(&profile.u).map(|(r, u)| 2.0 * (r * u).atan()).collect();
    match (&profile.u_r, &profile.u_rr) {
        (Some(ur), Some(urr)) => {
            let mut h_r = Vec::with_capacity(r.len());
            let mut h_rr = Vec::with_capacity(r.len());
            for i in 0..r.len() {
                let z = r[i] * profile.u[i];
                let z1 = profile.u[i] + r[i] * ur[i];
                let z2 = 2.0 * ur[i] + r[i] * urr[i];
                let m = 1.0 + z * z;
                h_r.push(2.0 * z1 / m);
                h_rr.push(2.0 * z2 / m - 4.0 * z * z1 * z1 / (m * m));
            }
            RadialProfile { grid, h, h_r: Some(h_r), h_rr: Some(h_rr) }
        }
        _ => RadialProfile { grid, h, h_r: None, h_rr: None },
    }
}
