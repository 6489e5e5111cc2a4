//! Dense-grid sign sweeps for the inequalities behind the blow-up subsolution
//! and the comparison constant `G(a, p)`.
//!
//! All `I`-terms are evaluated in double-double: for large `s` the individual
//! terms grow like `s^8` while their sum is of order `s^3`.

pub mod dd;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow_core::FlowParams;
pub use dd::Dd;

/// Sweep variables and densities. Endpoints are clamped inside the open
/// intervals, so `p = 2`, `a = 1` and `s = 0` are never visited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub ns: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
    /// Lower end of the `a`-range for the sign of `G`; the range is `[a_min, 1)`.
    pub a_min: f64,
    pub na: usize,
    pub k_min: f64,
    pub k_max: f64,
    pub nk: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    /// Number of `s` values for the `p = 2` collapse checks.
    pub n_collapse: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            s_min: 1e-3,
            s_max: 1e6,
            ns: 2000,
            p_min: 1.01,
            p_max: 1.99,
            np: 99,
            a_min: 0.965,
            na: 99,
            k_min: 2.01,
            k_max: 3.99,
            nk: 500,
            x_min: 1e-3,
            x_max: 1e3,
            nx: 500,
            n_collapse: 500,
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| Err(Error::ConfigRange { key: key.into(), reason: reason.into() });
        if !(self.s_min > 0.0 && self.s_max > self.s_min) {
            return bad("s_range", "need 0 < s_min < s_max");
        }
        if !(self.p_min > 1.0 && self.p_max < 2.0 && self.p_max >= self.p_min) {
            return bad("p_range", "need 1 < p_min <= p_max < 2");
        }
        if !(self.a_min > 0.0 && self.a_min < 1.0) {
            return bad("a_min", "need 0 < a_min < 1");
        }
        if !(self.k_min > 2.0 && self.k_max < 4.0 && self.k_max >= self.k_min) {
            return bad("k_range", "need 2 < k_min <= k_max < 4");
        }
        if !(self.x_min > 0.0 && self.x_max > self.x_min) {
            return bad("x_range", "need 0 < x_min < x_max");
        }
        if [self.ns, self.np, self.na, self.nk, self.nx, self.n_collapse].iter().any(|&n| n < 2) {
            return bad("density", "every axis needs at least 2 points");
        }
        Ok(())
    }

    pub fn s_values(&self) -> Vec<f64> {
        logspace(self.s_min, self.s_max, self.ns)
    }

    pub fn p_values(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }

    /// `na` points on `[a_min, 1)`.
    pub fn a_values(&self) -> Vec<f64> {
        (0..self.na).map(|i| self.a_min + (1.0 - self.a_min) * i as f64 / self.na as f64).collect()
    }

    pub fn k_values(&self) -> Vec<f64> {
        linspace(self.k_min, self.k_max, self.nk)
    }

    pub fn x_values(&self) -> Vec<f64> {
        logspace(self.x_min, self.x_max, self.nx)
    }

    fn sp_signature(&self) -> String {
        format!("s log [{:e}, {:e}] x{}; p [{}, {}] x{}", self.s_min, self.s_max, self.ns, self.p_min, self.p_max, self.np)
    }
}

/// The `I`-decomposition of `A*(s, p) = r^4 (1 + s^2)^{5/2} A(h)` along
/// `h = (p+4)/3 arctan(r / b)`, `s = b / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ITerms {
    pub theta: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    pub i6_bar: f64,
    pub i7: f64,
    pub a_star: f64,
}

#[derive(Debug, Clone, Copy)]
struct ITermsDd {
    theta: Dd,
    sin2: Dd,
    i1: Dd,
    i2: Dd,
    i3: Dd,
    i4: Dd,
    i5: Dd,
    i6_bar: Dd,
    i7: Dd,
    a_star: Dd,
}

fn i_terms_dd(p: f64, s: f64) -> ITermsDd {
    let p = Dd::new(p);
    let s = Dd::new(s);
    let c = (p + 4.0) / 3.0;
    let theta = c * (Dd::ONE / s).atan();
    let (sn, cs) = theta.sin_cos();
    let sin2t = (sn * cs) * 2.0;
    let sin2 = sn.sqr();
    let s2 = s.sqr();
    let q = Dd::ONE + s2;
    let q2 = q.sqr();
    let p4 = p + 4.0;
    let lin = (p - 3.0) * s2 + p - 1.0;
    let tail = p * 2.0 - 3.0 - s2;

    let i1 = q2.sqr() * sin2t * sin2 * 27.0;
    let i2 = (3.0 - p) * p4.sqr() * s2 * q2 * sin2t * 3.0;
    let i3 = p4 * s * q2 * lin * sin2 * 18.0;
    let i4 = p4.powi(3) * s2 * s * tail * 2.0;
    let i5 = q2 * sin2t * 3.0 + p4 * s * lin * 2.0;
    let i6_bar = q2 * q * sin2 * 9.0 + s2 * p4.sqr() * tail;
    let i7 = (3.0 - p) * q2 * sin2t * 3.0 + p4 * s * tail * 2.0;
    let total = i1 + i2 + i3 + i4;
    let a_star = -total / (q * q.sqrt() * 54.0);
    ITermsDd { theta, sin2, i1, i2, i3, i4, i5, i6_bar, i7, a_star }
}

pub fn eval_i_terms(params: &FlowParams, s: f64) -> Result<ITerms> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("s = {s} must be positive")));
    }
    let t = i_terms_dd(params.p(), s);
    Ok(ITerms {
        theta: t.theta.to_f64(),
        i1: t.i1.to_f64(),
        i2: t.i2.to_f64(),
        i3: t.i3.to_f64(),
        i4: t.i4.to_f64(),
        i5: t.i5.to_f64(),
        i6_bar: t.i6_bar.to_f64(),
        i7: t.i7.to_f64(),
        a_star: t.a_star.to_f64(),
    })
}

/// `k x / (1 + x^2) - sin(k arctan(1/x))`.
pub fn basic_margin(k: f64, x: f64) -> f64 {
    let (k, x) = (Dd::new(k), Dd::new(x));
    let lhs = k * x / (Dd::ONE + x.sqr());
    (lhs - (k * (Dd::ONE / x).atan()).sin()).to_f64()
}

fn c2_poly<T>(p: T) -> T
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + From<i32>,
{
    // Horner for p^5 + 10p^4 + 72p^3 + 256p^2 - 128p - 1536.
    let coeffs = [1, 10, 72, 256, -128, -1536];
    coeffs.iter().skip(1).fold(T::from(coeffs[0]), |acc, &c| acc * p.clone() + T::from(c))
}

/// Large-`s` limit `C_2(p)` of `A*(s, p)`.
pub fn eval_c2(params: &FlowParams) -> f64 {
    let p = params.p();
    -(p + 4.0) * c2_poly(p) / 729.0
}

/// `C_2` in exact rational arithmetic.
pub fn c2_exact(p: &BigRational) -> BigRational {
    let poly = c2_poly(Rat(p.clone())).0;
    -(p + BigRational::from_integer(4.into())) * poly / BigRational::from_integer(729.into())
}

#[derive(Clone)]
struct Rat(BigRational);

impl From<i32> for Rat {
    fn from(v: i32) -> Self {
        Rat(BigRational::from_integer(BigInt::from(v)))
    }
}

impl std::ops::Add for Rat {
    type Output = Rat;
    fn add(self, b: Rat) -> Rat {
        Rat(self.0 + b.0)
    }
}

impl std::ops::Sub for Rat {
    type Output = Rat;
    fn sub(self, b: Rat) -> Rat {
        Rat(self.0 - b.0)
    }
}

impl std::ops::Mul for Rat {
    type Output = Rat;
    fn mul(self, b: Rat) -> Rat {
        Rat(self.0 * b.0)
    }
}

/// `C_1(p) b^{1-p}`, the large-`s` prefactor of the subsolution inequality.
pub fn eval_c1(params: &FlowParams, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("b = {b} must be positive")));
    }
    let p = params.p();
    Ok(2f64.powf((p - 4.0) / 2.0) * ((p + 4.0) / 3.0).powf(p - 4.0) * b.powf(1.0 - p))
}

/// The comparison constant; `G(1, p) = -2p`.
pub fn eval_g(a: f64, params: &FlowParams) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!("a = {a} outside (0, 1]")));
    }
    let p = params.p();
    let (a2, a3) = (a * a, a * a * a);
    let first = (p - 4.0) / 2.0 * ((p - 4.0) + (a2 * (3.0 - p) + 1.0) * a3);
    let second = a2 * (1.0 + a2) * (2.0 * (3.0 - p) - a2 * (a * (3.0 - p) + a3 + 2.0 * a2));
    Ok(first + second)
}

/// Outcome of one claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: String,
    pub statement: String,
    /// Worst value of the checked quantity (see `statement` for its sign convention).
    pub margin: f64,
    pub at: BTreeMap<String, f64>,
    pub grid: String,
    pub pass: bool,
    /// Reported only; does not affect the overall verdict.
    pub informational: bool,
}

impl ClaimResult {
    fn new(id: &str, statement: &str, margin: f64, at: &[(&str, f64)], grid: String, pass: bool) -> Self {
        Self {
            id: id.into(),
            statement: statement.into(),
            margin,
            at: at.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            grid,
            pass,
            informational: false,
        }
    }

    fn info(mut self) -> Self {
        self.informational = true;
        self
    }

    pub fn verdict(&self) -> &'static str {
        match (self.informational, self.pass) {
            (true, _) => "INFO",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub grid: SweepGrid,
    pub claims: Vec<ClaimResult>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.informational || c.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.claims.iter().filter(|c| !c.informational && !c.pass).map(|c| c.id.as_str()).collect()
    }

    pub fn claim(&self, id: &str) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.id == id)
    }
}

/// Running maximum with its location. Ties keep the earlier point, which makes
/// an in-order merge deterministic.
#[derive(Debug, Clone, Copy)]
struct Worst {
    value: f64,
    s: f64,
    p: f64,
}

impl Worst {
    const EMPTY: Worst = Worst { value: f64::NEG_INFINITY, s: f64::NAN, p: f64::NAN };

    fn offer(&mut self, value: f64, s: f64, p: f64) {
        if value > self.value || value.is_nan() && !self.value.is_nan() {
            *self = Worst { value, s, p };
        }
    }

    fn merge(&mut self, other: &Worst) {
        self.offer(other.value, other.s, other.p);
    }
}

fn ratio(num: Dd, scale: Dd) -> f64 {
    (num / scale).to_f64()
}

const SIGN_CLAIMS: usize = 7;

/// Per-point contributions, each normalized by the magnitude of its constituents.
fn sign_point(p: f64, s: f64) -> [Option<f64>; SIGN_CLAIMS] {
    let t = i_terms_dd(p, s);
    let boundary = (3.0f64 / 7.0).sqrt();
    let (a1, a2, a3, a4) = (t.i1.abs(), t.i2.abs(), t.i3.abs(), t.i4.abs());
    let theta_small = t.theta.to_f64() < 2.0 * PI / 3.0;
    // I1 + I3 = 9 (1+s^2)^2 sin^2(theta) I5, I2 + I4 = (p+4)^2 s^2 I7.
    let q = 1.0 + Dd::new(s).sqr();
    let f13 = q.sqr() * t.sin2 * 9.0 * t.i5;
    let f24 = (Dd::new(p) + 4.0).sqr() * Dd::new(s).sqr() * t.i7;
    let fact = ratio((t.i1 + t.i3 - f13).abs(), a1 + a3).max(ratio((t.i2 + t.i4 - f24).abs(), a2 + a4));
    [
        Some(ratio(t.i1 + t.i3, a1 + a3)),
        (s > boundary).then(|| ratio(t.i2 + t.i3, a2 + a3)),
        Some(ratio(t.i1 + t.i4, a1 + a4)),
        (s < boundary).then(|| ratio(t.i2 + t.i4, a2 + a4)),
        Some(ratio(t.i1 + t.i2 + t.i3 + t.i4, a1 + a2 + a3 + a4)),
        theta_small.then(|| {
            let scale = (t.i6_bar - Dd::new(s).sqr() * (Dd::new(p) + 4.0).sqr() * (p * 2.0 - 3.0 - Dd::new(s).sqr())).abs()
                + (Dd::new(s).sqr() * (Dd::new(p) + 4.0).sqr() * (p * 2.0 - 3.0 - Dd::new(s).sqr())).abs();
            ratio(t.i6_bar, scale)
        }),
        Some(fact),
    ]
}

/// The four pairwise sign claims, the total-sum claim, the auxiliary `I6_bar`
/// bound (informational) and the two factorization identities.
pub fn check_sign_claims(grid: &SweepGrid) -> Result<Vec<ClaimResult>> {
    grid.validate()?;
    let boundary = (3.0f64 / 7.0).sqrt();
    let mut svals = grid.s_values();
    svals.push(boundary * (1.0 + 1e-9));
    svals.push(boundary * (1.0 - 1e-9));
    let pvals = grid.p_values();
    let rows: Vec<[Worst; SIGN_CLAIMS]> = svals
        .par_iter()
        .map(|&s| {
            let mut acc = [Worst::EMPTY; SIGN_CLAIMS];
            for &p in &pvals {
                for (w, v) in acc.iter_mut().zip(sign_point(p, s)) {
                    if let Some(v) = v {
                        w.offer(v, s, p);
                    }
                }
            }
            acc
        })
        .collect();
    let mut worst = [Worst::EMPTY; SIGN_CLAIMS];
    for row in &rows {
        for (w, r) in worst.iter_mut().zip(row) {
            w.merge(r);
        }
    }
    let sig = format!("{} (+ s = sqrt(3/7)(1 +- 1e-9))", grid.sp_signature());
    let at = |w: &Worst| [("s", w.s), ("p", w.p)];
    let neg = |id: &str, statement: &str, w: &Worst| {
        ClaimResult::new(id, statement, w.value, &at(w), sig.clone(), w.value < 0.0)
    };
    Ok(vec![
        neg("i1_plus_i3", "max (I1+I3)/(|I1|+|I3|) < 0 for all s", &worst[0]),
        neg("i2_plus_i3", "max (I2+I3)/(|I2|+|I3|) < 0 for s > sqrt(3/7)", &worst[1]),
        neg("i1_plus_i4", "max (I1+I4)/(|I1|+|I4|) < 0 for all s", &worst[2]),
        neg("i2_plus_i4", "max (I2+I4)/(|I2|+|I4|) < 0 for s < sqrt(3/7)", &worst[3]),
        neg("total_sum", "max (I1+I2+I3+I4)/sum|Ii| < 0 for all s", &worst[4]),
        neg("i6_bar", "max I6_bar (normalized) where theta < 2pi/3", &worst[5]).info(),
        ClaimResult::new(
            "factorizations",
            "max relative defect of I1+I3 = 9(1+s^2)^2 sin^2(theta) I5 and I2+I4 = (p+4)^2 s^2 I7 <= 1e-10",
            worst[6].value,
            &at(&worst[6]),
            sig.clone(),
            worst[6].value <= 1e-10,
        ),
    ])
}

/// `k x / (1+x^2) - sin(k arctan(1/x))` over the `(k, x)` grid and on the slice `k = 10/3`.
pub fn check_basic_ineq(grid: &SweepGrid) -> Result<Vec<ClaimResult>> {
    grid.validate()?;
    let xs = grid.x_values();
    let min_over = |k: f64| {
        xs.iter().fold((f64::INFINITY, f64::NAN), |(m, at), &x| {
            let v = basic_margin(k, x);
            if v < m { (v, x) } else { (m, at) }
        })
    };
    let rows: Vec<(f64, f64, f64)> = grid
        .k_values()
        .par_iter()
        .map(|&k| {
            let (m, x) = min_over(k);
            (m, k, x)
        })
        .collect();
    let (m, k, x) = rows.iter().fold((f64::INFINITY, f64::NAN, f64::NAN), |acc, &r| if r.0 < acc.0 { r } else { acc });
    let k3 = 10.0 / 3.0;
    let (m3, x3) = min_over(k3);
    let sig = format!(
        "k [{}, {}] x{}; x log [{:e}, {:e}] x{}",
        grid.k_min, grid.k_max, grid.nk, grid.x_min, grid.x_max, grid.nx
    );
    Ok(vec![
        ClaimResult::new("basic_ineq", "min k x/(1+x^2) - sin(k arctan(1/x)) >= 0", m, &[("k", k), ("x", x)], sig.clone(), m >= 0.0),
        ClaimResult::new(
            "basic_ineq_k10_3",
            "min over x at k = 10/3 > 0",
            m3,
            &[("k", k3), ("x", x3)],
            format!("x log [{:e}, {:e}] x{}", grid.x_min, grid.x_max, grid.nx),
            m3 > 0.0,
        ),
    ])
}

/// Largest `|v| / scale` of the `p = 2` identities over `n` log-spaced `s`.
pub fn p2_collapse(grid: &SweepGrid) -> Result<(f64, f64)> {
    let mut worst = (0.0, f64::NAN);
    for s in logspace(grid.s_min, grid.s_max, grid.n_collapse) {
        let t = i_terms_dd(2.0, s);
        let scale5 = (t.i1.abs() + t.i3.abs()) / (9.0 * (1.0 + Dd::new(s).sqr()).sqr() * t.sin2);
        let scale7 = (t.i2.abs() + t.i4.abs()) / (Dd::new(36.0) * Dd::new(s).sqr());
        let vals = [
            ratio(t.i5.abs(), scale5),
            ratio(t.i7.abs(), scale7),
            ratio((t.i1 + t.i4).abs(), t.i1.abs() + t.i4.abs()),
            ratio((t.i1 + t.i2 + t.i3 + t.i4).abs(), t.i1.abs() + t.i2.abs() + t.i3.abs() + t.i4.abs()),
        ];
        for v in vals {
            if v > worst.0 {
                worst = (v, s);
            }
        }
    }
    Ok(worst)
}

/// `|A*(s, p) - C_2(p)| / C_2(p)`.
pub fn check_astar_asymptote(params: &FlowParams, s: f64) -> Result<f64> {
    let a = eval_i_terms(params, s)?.a_star;
    let c2 = eval_c2(params);
    Ok((a - c2).abs() / c2)
}

/// Exact `C_2` values and agreement of the f64 polynomial with them.
fn c2_claims(grid: &SweepGrid) -> Vec<ClaimResult> {
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let at2 = c2_exact(&int(2));
    let at1 = c2_exact(&int(1));
    let exact_ok = at2.is_zero() && at1 == BigRational::new(BigInt::from(6625), BigInt::from(729));
    let mut worst_rel: f64 = 0.0;
    let mut min_c2 = f64::INFINITY;
    for p in grid.p_values() {
        let exact = c2_exact(&BigRational::from_float(p).expect("finite p")).to_f64().unwrap_or(f64::NAN);
        let approx = eval_c2(&FlowParams::closed(p).expect("p in range"));
        worst_rel = worst_rel.max((approx - exact).abs() / exact.abs());
        min_c2 = min_c2.min(approx);
    }
    let psig = format!("p [{}, {}] x{}", grid.p_min, grid.p_max, grid.np);
    vec![
        ClaimResult::new(
            "c2_exact",
            "C2(2) = 0 and C2(1) = 6625/729 in rational arithmetic",
            at2.to_f64().unwrap_or(f64::NAN),
            &[("c2_at_1", at1.to_f64().unwrap_or(f64::NAN))],
            "p in {1, 2}".into(),
            exact_ok,
        ),
        ClaimResult::new(
            "c2_positive",
            "min C2(p) > 0, f64 polynomial within 1e-13 of the rational value",
            min_c2,
            &[("max_rel_defect", worst_rel)],
            psig,
            min_c2 > 0.0 && worst_rel <= 1e-13,
        ),
    ]
}

fn g_claims(grid: &SweepGrid) -> Result<Vec<ClaimResult>> {
    let ps = grid.p_values();
    let mut lim: (f64, f64) = (0.0, f64::NAN);
    let mut neg = Worst::EMPTY;
    for &p in &ps {
        let params = FlowParams::new(p)?;
        let d = (eval_g(1.0, &params)? + 2.0 * p).abs();
        if d > lim.0 {
            lim = (d, p);
        }
        for a in grid.a_values() {
            neg.offer(eval_g(a, &params)?, a, p);
        }
    }
    // Smallest a* with G < 0 on [a*, 1) for every p, from a fine scan.
    let mut a_star: f64 = 0.0;
    for &p in &ps {
        let params = FlowParams::new(p)?;
        let n = 20000;
        for i in (0..n).rev() {
            let a = 0.5 + 0.5 * i as f64 / n as f64;
            if eval_g(a, &params)? >= 0.0 {
                a_star = a_star.max(a);
                break;
            }
        }
    }
    let psig = format!("p [{}, {}] x{}", grid.p_min, grid.p_max, grid.np);
    Ok(vec![
        ClaimResult::new("g_limit", "max |G(1,p) + 2p| <= 1e-12", lim.0, &[("p", lim.1)], psig.clone(), lim.0 <= 1e-12),
        ClaimResult::new(
            "g_negative",
            "max G(a,p) < 0 on [a_min, 1)",
            neg.value,
            &[("a", neg.s), ("p", neg.p)],
            format!("a [{}, 1) x{}; {psig}", grid.a_min, grid.na),
            neg.value < 0.0,
        ),
        ClaimResult::new(
            "g_threshold",
            "largest a in [0.5, 1) with G(a,p) >= 0 over the p grid",
            a_star,
            &[],
            format!("a [0.5, 1) step 2.5e-5; {psig}"),
            true,
        )
        .info(),
    ])
}

fn c1_claim(grid: &SweepGrid) -> Result<ClaimResult> {
    let mut min = f64::INFINITY;
    for p in grid.p_values() {
        for b in [1e-3, 1.0, 1e3] {
            min = min.min(eval_c1(&FlowParams::new(p)?, b)?);
        }
    }
    let at2 = eval_c1(&FlowParams::closed(2.0)?, 1.0)?;
    Ok(ClaimResult::new(
        "c1_positive",
        "min C1(p) b^(1-p) > 0, C1(2) = 1/8",
        min,
        &[("c1_at_2", at2)],
        format!("p [{}, {}] x{}; b in {{1e-3, 1, 1e3}}", grid.p_min, grid.p_max, grid.np),
        min > 0.0 && (at2 - 0.125).abs() <= 1e-15,
    ))
}

/// Every claim on `grid`.
pub fn verify_all(grid: &SweepGrid) -> Result<VerifyReport> {
    grid.validate()?;
    let mut claims = check_basic_ineq(grid)?;
    claims.extend(check_sign_claims(grid)?);

    let (collapse, s_at) = p2_collapse(grid)?;
    claims.push(ClaimResult::new(
        "p2_collapse",
        "at p = 2: |I5|, |I7|, |I1+I4|, |sum| <= 1e-9 relative to their constituents",
        collapse,
        &[("s", s_at)],
        format!("s log [{:e}, {:e}] x{}", grid.s_min, grid.s_max, grid.n_collapse),
        collapse <= 1e-9,
    ));

    let mut asym: (f64, f64) = (0.0, f64::NAN);
    for p in [1.1, 1.5, 1.9] {
        let e = check_astar_asymptote(&FlowParams::new(p)?, 1e6)?;
        if e > asym.0 || asym.1.is_nan() {
            asym = (e, p);
        }
    }
    claims.push(ClaimResult::new(
        "astar_asymptote",
        "|A*(1e6, p) - C2(p)| / C2(p) <= 1e-4",
        asym.0,
        &[("p", asym.1), ("s", 1e6)],
        "p in {1.1, 1.5, 1.9}".into(),
        asym.0 <= 1e-4,
    ));
    claims.extend(c2_claims(grid));
    claims.extend(g_claims(grid)?);
    claims.push(c1_claim(grid)?);
    Ok(VerifyReport { grid: grid.clone(), claims })
}

/// Worst point per claim, for a CSV table.
pub fn worst_rows(report: &VerifyReport) -> Vec<(String, f64, String)> {
    report
        .claims
        .iter()
        .map(|c| {
            let at: Vec<String> = c.at.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
            (c.id.clone(), c.margin, at.join(" "))
        })
        .collect()
}
