//! Line-oriented `key = value` run configuration.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{DatumShape, EvolveConfig, InitialDatum};
use crate::flow_core::FlowParams;
use crate::stationary::StationaryConfig;
use crate::verifier::SweepGrid;

/// Recipe for the initial profile, all with boundary value `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatumKind {
    /// `2 arctan(tan(l/2) r)`.
    Arctan,
    /// `l sin(pi r / 2)`.
    Sine,
    /// `2 arctan(r u)`, `u = tan(l/2) + B (1 - r^2)^2` with `h0(1/2) = bump_height`.
    Bump,
}

impl DatumKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "arctan" => Some(DatumKind::Arctan),
            "sine" => Some(DatumKind::Sine),
            "bump" => Some(DatumKind::Bump),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DatumKind::Arctan => "arctan",
            DatumKind::Sine => "sine",
            DatumKind::Bump => "bump",
        }
    }
}

/// Every tunable of the command-line tools, with defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: f64,
    /// Boundary value `h(t, 1)`.
    pub l: f64,
    pub datum: DatumKind,
    pub bump_height: f64,
    pub collar: f64,
    pub evolve: EvolveConfig,
    pub stationary: StationaryConfig,
    /// Initial length scale of the blow-up comparison family.
    pub b0: f64,
    pub sub_nt: usize,
    pub sub_nr: usize,
    pub verify_ns: usize,
    pub verify_np: usize,
    /// Lower end of the `a` range where the comparison constant must be negative.
    pub verify_a_min: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 1.5,
            l: FRAC_PI_2,
            datum: DatumKind::Arctan,
            bump_height: 2.95,
            collar: 0.1,
            evolve: EvolveConfig::default(),
            stationary: StationaryConfig::default(),
            b0: 1.0,
            sub_nt: 200,
            sub_nr: 200,
            verify_ns: 2000,
            verify_np: 99,
            verify_a_min: 0.965,
        }
    }
}

const KEYS: &[&str] = &[
    "p",
    "l",
    "datum",
    "bump_height",
    "collar",
    "n",
    "t_max",
    "dt_init",
    "dt_min",
    "dt_max",
    "rtol",
    "atol",
    "safety",
    "blowup_threshold",
    "converge_tol",
    "record_every",
    "dist_eps",
    "bound_guard",
    "max_steps",
    "tol",
    "r_max",
    "max_critical",
    "b0",
    "sub_nt",
    "sub_nr",
    "verify_ns",
    "verify_np",
    "verify_a_min",
];

fn num(v: &str, line: usize) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::ConfigParse { line, reason: format!("`{v}` is not a finite number") })
}

fn count<T: std::str::FromStr>(v: &str, line: usize) -> Result<T> {
    v.parse::<T>().map_err(|_| Error::ConfigParse { line, reason: format!("`{v}` is not a nonnegative integer") })
}

fn range(key: &str, reason: impl Into<String>) -> Error {
    Error::ConfigRange { key: key.into(), reason: reason.into() }
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::ConfigParse { line, reason: format!("expected `key = value`, got `{body}`") })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::ConfigParse { line, reason: format!("unknown key `{key}`") });
            }
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(Error::ConfigParse { line, reason: format!("`{key}` already set on line {first}") });
            }
            let e = &mut cfg.evolve;
            match key {
                "p" => cfg.p = num(value, line)?,
                "l" => cfg.l = num(value, line)?,
                "datum" => {
                    cfg.datum = DatumKind::parse(value).ok_or_else(|| Error::ConfigParse {
                        line,
                        reason: format!("datum `{value}` is not one of arctan, sine, bump"),
                    })?
                }
                "bump_height" => cfg.bump_height = num(value, line)?,
                "collar" => cfg.collar = num(value, line)?,
                "n" => e.n = count(value, line)?,
                "t_max" => e.t_max = num(value, line)?,
                "dt_init" => e.dt_init = num(value, line)?,
                "dt_min" => e.dt_min = num(value, line)?,
                "dt_max" => e.dt_max = num(value, line)?,
                "rtol" => e.rtol = num(value, line)?,
                "atol" => e.atol = num(value, line)?,
                "safety" => e.safety = num(value, line)?,
                "blowup_threshold" => e.blowup_threshold = num(value, line)?,
                "converge_tol" => e.converge_tol = num(value, line)?,
                "record_every" => e.record_every = count(value, line)?,
                "dist_eps" => e.dist_eps = num(value, line)?,
                "bound_guard" => e.bound_guard = if value == "none" { None } else { Some(num(value, line)?) },
                "max_steps" => e.max_steps = count(value, line)?,
                "tol" => cfg.stationary.tol = num(value, line)?,
                "r_max" => cfg.stationary.r_max = num(value, line)?,
                "max_critical" => cfg.stationary.max_critical = count(value, line)?,
                "b0" => cfg.b0 = num(value, line)?,
                "sub_nt" => cfg.sub_nt = count(value, line)?,
                "sub_nr" => cfg.sub_nr = count(value, line)?,
                "verify_ns" => cfg.verify_ns = count(value, line)?,
                "verify_np" => cfg.verify_np = count(value, line)?,
                "verify_a_min" => cfg.verify_a_min = num(value, line)?,
                _ => unreachable!("key list and match arms agree"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        FlowParams::new(self.p).map_err(|e| range("p", e.to_string()))?;
        if !(self.l > 0.0 && self.l < PI) {
            return Err(range("l", format!("{} must lie in (0, pi)", self.l)));
        }
        if !(self.collar > 0.0 && self.collar <= 0.5) {
            return Err(range("collar", format!("{} must lie in (0, 0.5]", self.collar)));
        }
        if self.datum == DatumKind::Bump && !(self.bump_height > 0.0 && self.bump_height < PI) {
            return Err(range("bump_height", format!("{} must lie in (0, pi)", self.bump_height)));
        }
        self.evolve.validate()?;
        self.stationary.validate().map_err(|e| range("tol", e.to_string()))?;
        if !(self.b0 > 0.0) {
            return Err(range("b0", "must be positive"));
        }
        if self.sub_nt < 2 || self.sub_nr < 2 {
            return Err(range("sub_nt", "subsolution grids need at least 2 points"));
        }
        if self.verify_ns < 2 || self.verify_np < 2 {
            return Err(range("verify_ns", "sweep grids need at least 2 points"));
        }
        if !(self.verify_a_min > 0.0 && self.verify_a_min < 1.0) {
            return Err(range("verify_a_min", "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn params(&self) -> FlowParams {
        FlowParams::new(self.p).expect("validated")
    }

    pub fn sweep_grid(&self) -> SweepGrid {
        SweepGrid { ns: self.verify_ns, np: self.verify_np, a_min: self.verify_a_min, ..SweepGrid::default() }
    }

    /// The raw (not yet compatible) initial datum.
    pub fn datum(&self) -> InitialDatum {
        let ul = (0.5 * self.l).tan();
        let shape = match self.datum {
            DatumKind::Arctan => DatumShape::arctan(ul),
            DatumKind::Sine => DatumShape::Sine { l: self.l },
            DatumKind::Bump => bump_shape(ul, self.bump_height),
        };
        InitialDatum::new(shape)
    }

    /// Effective configuration as ordered `(key, value)` pairs.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let e = &self.evolve;
        let f = |x: f64| format!("{x:?}");
        vec![
            ("p", f(self.p)),
            ("l", f(self.l)),
            ("datum", self.datum.name().into()),
            ("bump_height", f(self.bump_height)),
            ("collar", f(self.collar)),
            ("n", e.n.to_string()),
            ("t_max", f(e.t_max)),
            ("dt_init", f(e.dt_init)),
            ("dt_min", f(e.dt_min)),
            ("dt_max", f(e.dt_max)),
            ("rtol", f(e.rtol)),
            ("atol", f(e.atol)),
            ("safety", f(e.safety)),
            ("blowup_threshold", f(e.blowup_threshold)),
            ("converge_tol", f(e.converge_tol)),
            ("record_every", e.record_every.to_string()),
            ("dist_eps", f(e.dist_eps)),
            ("bound_guard", e.bound_guard.map(f).unwrap_or_else(|| "none".into())),
            ("max_steps", e.max_steps.to_string()),
            ("tol", f(self.stationary.tol)),
            ("r_max", f(self.stationary.r_max)),
            ("max_critical", self.stationary.max_critical.to_string()),
            ("b0", f(self.b0)),
            ("sub_nt", self.sub_nt.to_string()),
            ("sub_nr", self.sub_nr.to_string()),
            ("verify_ns", self.verify_ns.to_string()),
            ("verify_np", self.verify_np.to_string()),
            ("verify_a_min", f(self.verify_a_min)),
        ]
    }

    /// The echo rendered back into config syntax; parses to the same config.
    pub fn to_text(&self) -> String {
        self.echo().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// `u = ul + B (1 - r^2)^2` with `B` chosen so that `h0(1/2) = height`.
pub fn bump_shape(ul: f64, height: f64) -> DatumShape {
    let b = ((0.5 * height).tan() / 0.5 - ul) / 0.5625;
    DatumShape::EvenPoly { coeffs: vec![ul + b, -2.0 * b, b] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_config_parses() {
        let c = RunConfig::parse("p = 1.5\nl = 2.9\nn = 513").unwrap();
        assert_eq!(c.p, 1.5);
        assert_eq!(c.l, 2.9);
        assert_eq!(c.evolve.n, 513);
    }

    #[test]
    fn p_two_is_rejected() {
        match RunConfig::parse("p = 2.0") {
            Err(Error::ConfigRange { key, .. }) => assert_eq!(key, "p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_reports_line() {
        match RunConfig::parse("p = 1.5\n\nfoo = 3") {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(RunConfig::parse("n = x"), Err(Error::ConfigParse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("p = 1.2\np = 1.3"), Err(Error::ConfigParse { line: 2, .. })));
        assert!(matches!(RunConfig::parse("p 1.2"), Err(Error::ConfigParse { line: 1, .. })));
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::parse("p = 1.3\nl = 0.7853981633974483\ndatum = bump\nbound_guard = 4").unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn bump_hits_its_height() {
        let s = bump_shape((std::f64::consts::PI / 8.0).tan(), 2.95);
        assert!((s.jet(0.5).h - 2.95).abs() < 1e-12);
        assert!((s.jet(1.0).h - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }
}
