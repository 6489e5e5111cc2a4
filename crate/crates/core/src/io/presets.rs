//! Named experiments and the shared evolve pipeline.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::config::{DatumKind, RunConfig};
use crate::error::{Error, Result};
use crate::evolution::{
    initial_bound, run_with_observer, validate_initial, CompatReport, EvolveConfig, Outcome, RunOptions, RunReport,
};
use crate::flow_core::{FlowParams, RadialGrid, RadialProfile};
use crate::stationary::{build_hl, build_lower, integrate_hstar, StationaryProfile};

/// Tolerance on `|F(h0)(1)|` after the compatibility patch.
pub const COMPAT_TOL: f64 = 1e-8;

/// Samples used to check the initial datum, independent of the run grid.
pub const VALIDATION_SAMPLES: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PresetName {
    BlowupGeneric,
    BlowupNongeneric,
    Converge,
    Sandwich,
}

impl PresetName {
    pub const ALL: [PresetName; 4] =
        [PresetName::BlowupGeneric, PresetName::BlowupNongeneric, PresetName::Converge, PresetName::Sandwich];

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown preset `{s}`")))
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::BlowupGeneric => "blowup-generic",
            PresetName::BlowupNongeneric => "blowup-nongeneric",
            PresetName::Converge => "converge",
            PresetName::Sandwich => "sandwich",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: PresetName,
    pub config: RunConfig,
    pub expected: Outcome,
    /// `lambda` of the barrier pair `2 arctan(lambda r)`, `pi - 2 arctan(lambda r)`.
    pub sandwich: Option<f64>,
}

/// Threshold `H` of the stationary profile for `params`.
pub fn threshold(cfg: &RunConfig) -> Result<(StationaryProfile, f64)> {
    let star = integrate_hstar(&cfg.params(), &cfg.stationary)?;
    let h = star.threshold()?;
    Ok((star, h))
}

/// Builds a named experiment at exponent `p`.
pub fn preset(name: PresetName, p: f64) -> Result<ExperimentPreset> {
    FlowParams::new(p)?;
    let mut cfg = RunConfig { p, ..RunConfig::default() };
    let base = EvolveConfig::default();
    let mut sandwich = None;
    let expected = match name {
        PresetName::BlowupGeneric => {
            let (_, h) = threshold(&cfg)?;
            cfg.l = h + 0.9 * (PI - h);
            cfg.datum = DatumKind::Arctan;
            cfg.evolve = EvolveConfig { n: 513, t_max: 1.0, record_every: 50, ..base };
            Outcome::BlewUp
        }
        PresetName::BlowupNongeneric => {
            let level = (p + 4.0) * PI / 6.0;
            cfg.l = FRAC_PI_4;
            cfg.datum = DatumKind::Bump;
            cfg.bump_height = level + 0.5 * (PI - level);
            cfg.evolve = EvolveConfig { n: 257, t_max: 1.0, record_every: 50, ..base };
            Outcome::BlewUp
        }
        PresetName::Converge => {
            cfg.l = FRAC_PI_2;
            cfg.datum = DatumKind::Arctan;
            cfg.evolve = EvolveConfig { n: 129, t_max: 50.0, record_every: 500, ..base };
            Outcome::Converged
        }
        PresetName::Sandwich => {
            cfg.l = FRAC_PI_2;
            cfg.datum = DatumKind::Bump;
            cfg.bump_height = 1.5;
            cfg.evolve = EvolveConfig { n: 257, t_max: 1.0, converge_tol: 1e-12, record_every: 200, ..base };
            sandwich = Some(0.5);
            Outcome::ReachedTmax
        }
    };
    cfg.validate()?;
    Ok(ExperimentPreset { name, config: cfg, expected, sandwich })
}

/// Everything a run of the evolve pipeline produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub report: RunReport,
    pub compat: CompatReport,
    pub threshold: f64,
    /// The stationary state with boundary value `l` (none when `l = H`).
    pub target: Option<RadialProfile>,
    /// `sup (pi / h0)^{2/3} |r h0_r|`.
    pub initial_bound: f64,
    pub k_fit: f64,
    /// Largest excursion beyond the barrier pair, when one was requested.
    pub sandwich_violation: Option<f64>,
}

impl ExperimentRun {
    /// The weighted-gradient bound `max(initial term, K_fit)`.
    pub fn gradient_bound(&self) -> f64 {
        self.initial_bound.max(self.k_fit)
    }
}

/// Calibrated stand-in for the non-explicit constant of the weighted-gradient
/// bound: the largest `sup r h_r` among the profiles a classical flow can
/// approach (stationary states, the harmonic bubble `2 arctan(r / b)` and the
/// blow-up barrier `(p+4)/3 arctan(r / b)`).
pub fn k_fit(params: &FlowParams, star: &StationaryProfile) -> f64 {
    star.max_log_slope().max(1.0).max((params.p() + 4.0) / 6.0)
}

/// Stationary state with `h(1) = l`: `pi - h*(alpha r)` above `H`, `h*(alpha r)` below.
pub fn stationary_target(
    params: &FlowParams,
    star: &StationaryProfile,
    l: f64,
    grid: RadialGrid,
) -> Result<Option<RadialProfile>> {
    let h = star.threshold()?;
    if l > h {
        Ok(Some(build_hl(params, l, star, grid)?))
    } else if l < h {
        Ok(Some(build_lower(star, l, grid)?))
    } else {
        Ok(None)
    }
}

/// Make compatible, validate, evolve.
pub fn run_experiment(cfg: &RunConfig, sandwich: Option<f64>) -> Result<ExperimentRun> {
    cfg.validate()?;
    let params = cfg.params();
    let (star, h) = threshold(cfg)?;
    let grid = RadialGrid::new(cfg.evolve.n)?;
    let datum = cfg.datum().make_compatible(&params, cfg.collar)?;
    let compat = validate_initial(&params, &datum, cfg.evolve.n.max(VALIDATION_SAMPLES), COMPAT_TOL)?;
    if !compat.passed() {
        return Err(Error::Validation(format!("initial datum fails {:?}", compat.failures())));
    }
    let u0 = datum.u_profile(grid)?;
    let target = stationary_target(&params, &star, cfg.l, grid)?;
    let init = initial_bound(&datum.profile(grid))?;

    let nodes = grid.nodes();
    let mut worst: f64 = 0.0;
    let observer = |_t: f64, u: &[f64]| {
        if let Some(lambda) = sandwich {
            for (r, v) in nodes.iter().zip(u) {
                let h = 2.0 * (r * v).atan();
                let lower = 2.0 * (lambda * r).atan();
                worst = worst.max(lower - h).max(h - (PI - lower));
            }
        }
    };
    let report = run_with_observer(&params, &u0, &cfg.evolve, RunOptions { target: target.as_ref() }, observer)?;
    Ok(ExperimentRun {
        report,
        compat,
        threshold: h,
        target,
        initial_bound: init,
        k_fit: k_fit(&params, &star),
        sandwich_violation: sandwich.map(|_| worst),
    })
}

pub fn run_preset(preset: &ExperimentPreset) -> Result<ExperimentRun> {
    run_experiment(&preset.config, preset.sandwich)
}

/// Result of a grid-halving study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfConvergence {
    pub sizes: Vec<usize>,
    /// Max difference on the coarse nodes between consecutive resolutions.
    pub differences: Vec<f64>,
    pub order: f64,
}

/// Evolves `cfg` to time `t` on `n, 2n - 1, 4n - 3` nodes and compares
/// consecutive solutions on the coarse nodes.
pub fn self_convergence(cfg: &RunConfig, t: f64, n: usize) -> Result<SelfConvergence> {
    let sizes = vec![n, 2 * n - 1, 4 * n - 3];
    let mut sols = Vec::new();
    for &m in &sizes {
        let mut c = cfg.clone();
        c.evolve = EvolveConfig { n: m, t_max: t, rtol: 1e-10, atol: 1e-10, converge_tol: 1e-300, ..cfg.evolve.clone() };
        let run = run_experiment(&c, None)?;
        if run.report.outcome != Outcome::ReachedTmax {
            return Err(Error::Domain(format!("run on {m} nodes ended early: {:?}", run.report.outcome)));
        }
        sols.push(run.report.final_profile.h);
    }
    let diff = |a: &[f64], b: &[f64], stride: usize| {
        (0..n).map(|i| (a[i * stride] - b[2 * i * stride]).abs()).fold(0.0, f64::max)
    };
    let d1 = diff(&sols[0], &sols[1], 1);
    let d2 = diff(&sols[1], &sols[2], 2);
    Ok(SelfConvergence { sizes, differences: vec![d1, d2], order: (d1 / d2).log2() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in PresetName::ALL {
            assert_eq!(PresetName::parse(p.as_str()).unwrap(), p);
        }
        assert!(PresetName::parse("nope").is_err());
    }

    #[test]
    fn presets_validate() {
        for name in PresetName::ALL {
            let pr = preset(name, 1.5).unwrap();
            let params = pr.config.params();
            let datum = pr.config.datum().make_compatible(&params, pr.config.collar).unwrap();
            let rep = validate_initial(&params, &datum, VALIDATION_SAMPLES, COMPAT_TOL).unwrap();
            assert!(rep.passed(), "{}: {:?}", name.as_str(), rep.failures());
        }
    }

    #[test]
    fn generic_blowup_datum_lies_above_threshold() {
        let pr = preset(PresetName::BlowupGeneric, 1.5).unwrap();
        let (_, h) = threshold(&pr.config).unwrap();
        assert!(pr.config.l > h && pr.config.l < PI);
        let ng = preset(PresetName::BlowupNongeneric, 1.5).unwrap();
        assert!(ng.config.datum().shape.jet(0.5).h > 5.5 * PI / 6.0);
    }
}
