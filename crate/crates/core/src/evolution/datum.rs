use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow_core::{compatible_curvature, flow_rate, FlowParams, Jet, RadialGrid, RadialProfile, TransformedProfile};

/// Analytic recipe for an initial profile `h0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatumShape {
    /// `h0 = 2 arctan(r u0(r))` with the even polynomial `u0 = sum c_k r^{2k}`.
    EvenPoly { coeffs: Vec<f64> },
    /// `h0 = l sin(pi r / 2)`.
    Sine { l: f64 },
}

impl DatumShape {
    /// The arctan profile `2 arctan(lambda r)`.
    pub fn arctan(lambda: f64) -> Self {
        DatumShape::EvenPoly { coeffs: vec![lambda] }
    }

    fn u_jet(coeffs: &[f64], r: f64) -> (f64, f64, f64) {
        let r2 = r * r;
        let (mut u, mut ur, mut urr) = (0.0, 0.0, 0.0);
        let mut pow = 1.0; // r^{2k}
        for (k, c) in coeffs.iter().enumerate() {
            let k2 = 2.0 * k as f64;
            u += c * pow;
            if k > 0 {
                // d/dr r^{2k} = 2k r^{2k-1}, d2/dr2 = 2k (2k-1) r^{2k-2}
                let lower = pow / r2;
                ur += c * k2 * lower * r;
                urr += c * k2 * (k2 - 1.0) * lower;
            }
            pow *= r2;
        }
        if r == 0.0 && coeffs.len() > 1 {
            urr = 2.0 * coeffs[1];
            ur = 0.0;
        }
        (u, ur, urr)
    }

    pub fn jet(&self, r: f64) -> Jet {
        match self {
            DatumShape::EvenPoly { coeffs } => {
                let (u, ur, urr) = Self::u_jet(coeffs, r);
                let z = r * u;
                let z1 = u + r * ur;
                let z2 = 2.0 * ur + r * urr;
                let m = 1.0 + z * z;
                Jet::new(2.0 * z.atan(), 2.0 * z1 / m, 2.0 * z2 / m - 4.0 * z * z1 * z1 / (m * m))
            }
            DatumShape::Sine { l } => {
                let k = 0.5 * PI;
                let (s, c) = (k * r).sin_cos();
                Jet::new(l * s, l * k * c, -l * k * k * s)
            }
        }
    }

    /// `u0 = tan(h0 / 2) / r`, exact for the polynomial shape.
    fn u_value(&self, r: f64) -> f64 {
        match self {
            DatumShape::EvenPoly { coeffs } => Self::u_jet(coeffs, r).0,
            DatumShape::Sine { l } => {
                if r == 0.0 {
                    0.25 * PI * l
                } else {
                    (0.5 * self.jet(r).h).tan() / r
                }
            }
        }
    }
}

/// Quintic patch on `[seam, 1]` in the unit variable `t = (r - seam) / width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collar {
    pub seam: f64,
    coeffs: [f64; 6],
    end: Jet,
}

impl Collar {
    fn new(seam: f64, left: Jet, right: Jet) -> Self {
        let w = 1.0 - seam;
        let y0 = [left.h, left.h_r * w, left.h_rr * w * w];
        let y1 = [right.h, right.h_r * w, right.h_rr * w * w];
        let c0 = y0[0];
        let c1 = y0[1];
        let c2 = 0.5 * y0[2];
        let a = y1[0] - (c0 + c1 + c2);
        let b = y1[1] - (c1 + 2.0 * c2);
        let c = y1[2] - 2.0 * c2;
        let coeffs = [
            c0,
            c1,
            c2,
            10.0 * a - 4.0 * b + 0.5 * c,
            -15.0 * a + 7.0 * b - c,
            6.0 * a - 3.0 * b + 0.5 * c,
        ];
        Self { seam, coeffs, end: right }
    }

    fn jet(&self, r: f64) -> Jet {
        if r >= 1.0 {
            return self.end;
        }
        let w = 1.0 - self.seam;
        let t = (r - self.seam) / w;
        let c = &self.coeffs;
        let v = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let d = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let dd = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        Jet::new(v, d / w, dd / (w * w))
    }
}

/// An initial profile with its boundary value `l = h0(1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    pub shape: DatumShape,
    pub collar: Option<Collar>,
}

impl InitialDatum {
    pub fn new(shape: DatumShape) -> Self {
        Self { shape, collar: None }
    }

    pub fn jet(&self, r: f64) -> Jet {
        match &self.collar {
            Some(c) if r > c.seam => c.jet(r),
            _ => self.shape.jet(r),
        }
    }

    pub fn boundary_value(&self) -> f64 {
        self.jet(1.0).h
    }

    pub fn profile(&self, grid: RadialGrid) -> RadialProfile {
        RadialProfile::from_fn(grid, |r| self.jet(r))
    }

    /// Samples `u0` on the grid; the boundary node is the exact `tan(l/2)`.
    pub fn u_profile(&self, grid: RadialGrid) -> Result<TransformedProfile> {
        let n = grid.len();
        let mut u = Vec::with_capacity(n);
        for i in 0..n {
            let r = grid.node(i);
            let in_collar = matches!(&self.collar, Some(c) if r > c.seam);
            let v = if i == 0 {
                0.5 * self.jet(0.0).h_r
            } else if in_collar || i == n - 1 {
                let h = self.jet(r).h;
                if !(h > 0.0 && h < PI) {
                    return Err(Error::Validation(format!("h0({r}) = {h} outside (0, pi)")));
                }
                (0.5 * h).tan() / r
            } else {
                self.shape.u_value(r)
            };
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("u0({r}) = {v} is not positive")));
            }
            u.push(v);
        }
        TransformedProfile::new(grid, u)
    }

    /// Replaces `h0` on `[1 - width, 1]` by a quintic matching the jet at the
    /// seam and, at `r = 1`, the value `l`, the old slope and the curvature
    /// that makes `F(h0)(1) = 0`. The collar is widened (up to half the
    /// interval) if the patch leaves `(0, pi)`.
    pub fn make_compatible(&self, params: &FlowParams, width: f64) -> Result<InitialDatum> {
        if !(width > 0.0 && width < 1.0) {
            return Err(Error::Domain(format!("collar width {width} must lie in (0, 1)")));
        }
        let base = self.shape.clone();
        let end = base.jet(1.0);
        let curv = compatible_curvature(params, end.h, end.h_r, 1.0)?;
        let right = Jet::new(end.h, end.h_r, curv);
        let mut w = width;
        loop {
            let seam = 1.0 - w;
            let collar = Collar::new(seam, base.jet(seam), right);
            let inside = (0..=400).all(|k| {
                let h = collar.jet(seam + w * k as f64 / 400.0).h;
                h > 0.0 && h < PI
            });
            if inside {
                return Ok(InitialDatum { shape: base, collar: Some(collar) });
            }
            if w >= 0.5 {
                return Err(Error::Validation(format!(
                    "compatibility patch leaves (0, pi) for every collar up to width {w}"
                )));
            }
            w = (2.0 * w).min(0.5);
        }
    }
}

/// One numerical check on an initial datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub checks: Vec<Check>,
    /// `|F(h0)(1)|`.
    pub boundary_rate: f64,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    /// True when only the boundary compatibility fails.
    pub fn only_boundary_fails(&self) -> bool {
        self.failures() == ["boundary_rate"]
    }
}

/// Largest jump between neighbouring second differences of `g` on `n` nodes.
fn second_difference_jump(g: impl Fn(f64) -> f64, n: usize) -> f64 {
    let dr = 1.0 / (n - 1) as f64;
    let g: Vec<f64> = (0..n).map(|i| g(i as f64 * dr)).collect();
    let d2: Vec<f64> = (1..n - 1).map(|i| (g[i + 1] - 2.0 * g[i] + g[i - 1]) / (dr * dr)).collect();
    d2.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// Checks the hypotheses on `h0`: `h0(0) = 0`, range `(0, pi)`, `h0'(0) > 0`,
/// `h0''(0) = 0`, `F(h0)(1) = 0` to `boundary_tol`, and `h0 / r` twice
/// continuously differentiable.
///
/// The last check compares the jumps between neighbouring second
/// differences of `h0 / r` on `n` and `2n - 1` nodes; for a `C^2` quotient
/// they shrink with the spacing, at a kink of `g''` they do not.
pub fn validate_initial(params: &FlowParams, datum: &InitialDatum, n: usize, boundary_tol: f64) -> Result<CompatReport> {
    if n < 33 {
        return Err(Error::Domain(format!("validation needs n >= 33 samples, got {n}")));
    }
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, value: f64| checks.push(Check { name: name.into(), passed, value });

    let origin = datum.jet(0.0);
    push("origin_value", origin.h.abs() <= 1e-14, origin.h);
    let fine = 8 * (n - 1) + 1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 1..fine {
        let h = datum.jet(i as f64 / (fine - 1) as f64).h;
        lo = lo.min(h);
        hi = hi.max(h);
    }
    let end = datum.jet(1.0).h;
    lo = lo.min(end);
    hi = hi.max(end);
    let in_range = lo > 0.0 && hi < PI;
    push("range", in_range, if lo <= 0.0 { lo } else { hi });
    push("origin_slope", origin.h_r > 0.0, origin.h_r);
    push("origin_curvature", origin.h_rr.abs() <= 1e-10, origin.h_rr);

    let rate = if in_range { flow_rate(params, datum.jet(1.0), 1.0)?.abs() } else { f64::INFINITY };
    push("boundary_rate", rate <= boundary_tol, rate);

    let quotient = |r: f64| if r == 0.0 { datum.jet(0.0).h_r } else { datum.jet(r).h / r };
    let coarse = second_difference_jump(quotient, n);
    let refined = second_difference_jump(quotient, 2 * n - 1);
    let scale = 1.0 + datum.jet(0.0).h_r.abs();
    let smooth = refined <= 0.75 * coarse || refined <= 1e-6 * scale;
    push("quotient_c2", smooth, refined);

    Ok(CompatReport { checks, boundary_rate: rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FlowParams {
        FlowParams::new(1.5).unwrap()
    }

    #[test]
    fn arctan_datum_fails_only_boundary_rate() {
        let d = InitialDatum::new(DatumShape::arctan(1.0));
        let rep = validate_initial(&params(), &d, 65, 1e-8).unwrap();
        assert!(rep.only_boundary_fails(), "{:?}", rep.failures());
        assert!(rep.boundary_rate > 0.0);
    }

    #[test]
    fn sine_datum_has_flat_origin_curvature() {
        let d = InitialDatum::new(DatumShape::Sine { l: 2.0 });
        let rep = validate_initial(&params(), &d, 65, 1e-8).unwrap();
        let c = rep.checks.iter().find(|c| c.name == "origin_curvature").unwrap();
        assert!(c.passed);
    }

    #[test]
    fn compatible_patch_passes_everything() {
        let pr = params();
        for shape in [DatumShape::arctan(1.0), DatumShape::Sine { l: 2.9 }, DatumShape::EvenPoly { coeffs: vec![1.8, -0.8] }] {
            let d = InitialDatum::new(shape).make_compatible(&pr, 0.1).unwrap();
            let rep = validate_initial(&pr, &d, 129, 1e-8).unwrap();
            assert!(rep.passed(), "{:?}", rep.checks);
            assert!(rep.boundary_rate <= 1e-10);
            let end = d.jet(1.0);
            let want = compatible_curvature(&pr, end.h, end.h_r, 1.0).unwrap();
            assert!((end.h_rr - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn patch_is_local() {
        let pr = params();
        let raw = InitialDatum::new(DatumShape::arctan(2.0));
        let d = raw.make_compatible(&pr, 0.1).unwrap();
        let grid = RadialGrid::new(101).unwrap();
        let (a, b) = (raw.profile(grid), d.profile(grid));
        for i in 0..=90 {
            assert_eq!(a.h[i].to_bits(), b.h[i].to_bits());
        }
        assert_eq!(d.boundary_value(), raw.boundary_value());
    }

    #[test]
    fn kinked_quotient_is_detected() {
        let kinked = |r: f64| 1.0 + (r - 0.5).max(0.0).powi(2);
        let ratio = second_difference_jump(kinked, 129) / second_difference_jump(kinked, 65);
        assert!(ratio > 0.75, "{ratio}");
        let smooth = |r: f64| if r == 0.0 { 0.5 * PI } else { (0.5 * PI * r).sin() / r };
        let ratio = second_difference_jump(smooth, 129) / second_difference_jump(smooth, 65);
        assert!(ratio < 0.75, "{ratio}");
    }

    #[test]
    fn even_poly_jet_matches_differences() {
        let s = DatumShape::EvenPoly { coeffs: vec![1.2, -0.5, 0.3] };
        let r = 0.4;
        let e = 1e-5;
        let j = s.jet(r);
        let d = (s.jet(r + e).h - s.jet(r - e).h) / (2.0 * e);
        let dd = (s.jet(r + e).h - 2.0 * j.h + s.jet(r - e).h) / (e * e);
        assert!((j.h_r - d).abs() < 1e-8);
        assert!((j.h_rr - dd).abs() < 1e-4);
        assert_eq!(s.jet(0.0).h_rr, 0.0);
    }

    #[test]
    fn u_profile_is_positive_and_exact_at_boundary() {
        let pr = params();
        let d = InitialDatum::new(DatumShape::EvenPoly { coeffs: vec![1.8, -0.8] }).make_compatible(&pr, 0.1).unwrap();
        let u = d.u_profile(RadialGrid::new(65).unwrap()).unwrap();
        assert!(u.u.iter().all(|&v| v > 0.0));
        assert!((u.u[64] - 1.0).abs() < 1e-15);
        assert_eq!(u.u[0], 1.8);
    }
}
