//! Acceptance suite: one line per criterion. Runs without the libtest harness
//! so the lines always reach the output. Exits nonzero when a criterion fails
//! that is not on the known-red list.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use pflow_core::comparison::{delta0_search, radius_grid, subsolution_residual, time_grid, Family};
use pflow_core::evolution::Outcome;
use pflow_core::flow_core::{tension, FlowParams, Jet};
use pflow_core::io::{preset, run_preset, self_convergence, ExperimentRun, PresetName};
use pflow_core::stationary::{integrate_hstar, StationaryConfig};
use pflow_core::verifier::{
    c2_exact, check_astar_asymptote, check_basic_ineq, check_sign_claims, eval_g, p2_collapse, SweepGrid,
};

/// Criteria whose literal statement cannot hold; each has a ledger entry.
const KNOWN_RED: &[u32] = &[1, 3];

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn phi_jet(lambda: f64, r: f64) -> Jet {
    let q = 1.0 + lambda * lambda * r * r;
    Jet::new(2.0 * (lambda * r).atan(), 2.0 * lambda / q, -4.0 * lambda.powi(3) * r / (q * q))
}

fn closed_form_residual(power: i32) -> f64 {
    let mut worst: f64 = 0.0;
    for p in [1.1, 1.5, 1.9] {
        let params = FlowParams::new(p).unwrap();
        for lambda in [0.5, 1.0, 2.0] {
            for i in 1..=100 {
                let r = i as f64 / 100.0;
                let a = tension(&params, phi_jet(lambda, r), r).unwrap();
                let exact = 32.0 * (2.0 - p) * lambda.powi(5) * r / (1.0 + lambda * lambda * r * r).powi(power);
                worst = worst.max((a - exact).abs() / (1.0 + a.abs()));
            }
        }
    }
    worst
}

fn criterion_1() -> Line {
    let t = Instant::now();
    let literal = closed_form_residual(2);
    let quartic = closed_form_residual(4);
    let dt = secs(t);
    Line {
        id: 1,
        pass: literal <= 1e-12 && dt < 1.0,
        detail: format!(
            "closed-form tension with denominator (1+l^2 r^2)^2: max rel {literal:.3e}; \
             with (1+l^2 r^2)^4: {quartic:.3e} ({:.2}s)",
            dt
        ),
    }
}

fn criterion_2() -> Line {
    let t = Instant::now();
    let grid = SweepGrid { s_min: 1e-3, s_max: 1e6, n_collapse: 500, ..SweepGrid::default() };
    let (worst, s) = p2_collapse(&grid).unwrap();
    let c2 = c2_exact(&BigRational::from_integer(BigInt::from(2)));
    let dt = secs(t);
    Line {
        id: 2,
        pass: worst <= 1e-9 && c2.is_zero() && dt < 1.0,
        detail: format!("p = 2 collapse max rel {worst:.3e} at s = {s:.3e}; C2(2) = {c2} exactly ({dt:.2}s)"),
    }
}

fn criterion_3() -> Line {
    let ps: Vec<f64> = (1..=99).map(|i| 1.0 + i as f64 / 100.0).collect();
    let mut lim: f64 = 0.0;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    for &p in &ps {
        let params = FlowParams::new(p).unwrap();
        lim = lim.max((eval_g(1.0, &params).unwrap() + 2.0 * p).abs());
        for i in 0..200 {
            let a = 0.95 + 0.05 * i as f64 / 200.0;
            let g = eval_g(a, &params).unwrap();
            if g > worst.0 {
                worst = (g, a, p);
            }
        }
    }
    Line {
        id: 3,
        pass: lim <= 1e-12 && worst.0 < 0.0,
        detail: format!(
            "max |G(1,p)+2p| = {lim:.1e}; max G on [0.95,1) x (1,2) = {:.4e} at a = {:.4}, p = {:.2}",
            worst.0, worst.1, worst.2
        ),
    }
}

fn criterion_4() -> Line {
    let t = Instant::now();
    let claims = check_sign_claims(&SweepGrid::default()).unwrap();
    let mut asym: f64 = 0.0;
    for p in [1.1, 1.5, 1.9] {
        asym = asym.max(check_astar_asymptote(&FlowParams::new(p).unwrap(), 1e6).unwrap());
    }
    let dt = secs(t);
    let signs = ["i1_plus_i3", "i2_plus_i3", "i1_plus_i4", "i2_plus_i4", "total_sum"];
    let mut ok = asym <= 1e-4 && dt < 30.0;
    let mut parts = Vec::new();
    for id in signs {
        let c = claims.iter().find(|c| c.id == id).unwrap();
        ok &= c.pass && c.margin < 0.0;
        parts.push(format!("{id} {:.2e}", c.margin));
    }
    Line {
        id: 4,
        pass: ok,
        detail: format!("2000x99 sweep max: {}; asymptote rel {asym:.2e} ({dt:.2}s)", parts.join(", ")),
    }
}

fn criterion_5() -> Line {
    let t = Instant::now();
    let claims = check_basic_ineq(&SweepGrid::default()).unwrap();
    let dt = secs(t);
    let (all, k3) = (&claims[0], &claims[1]);
    Line {
        id: 5,
        pass: all.margin >= 0.0 && k3.margin > 0.0 && dt < 5.0,
        detail: format!("500x500 min {:.3e}, k = 10/3 min {:.3e} ({dt:.2}s)", all.margin, k3.margin),
    }
}

fn criterion_6() -> Line {
    let t = Instant::now();
    let params = FlowParams::new(1.5).unwrap();
    let star = integrate_hstar(&params, &StationaryConfig { tol: 1e-10, ..StationaryConfig::default() }).unwrap();
    let h = star.threshold().unwrap();
    let res = star.residual().unwrap();
    let fine = integrate_hstar(&params, &StationaryConfig { tol: 1e-12, ..StationaryConfig::default() }).unwrap();
    let dh = (fine.threshold().unwrap() - h).abs();
    let cps = &star.critical_points;
    let alternate = cps.windows(2).all(|w| (w[0].value - FRAC_PI_2) * (w[1].value - FRAC_PI_2) < 0.0);
    let onset = star.envelope_onset();
    let dt = secs(t);
    Line {
        id: 6,
        pass: res <= 1e-6 && h > FRAC_PI_2 && h < PI && alternate && onset.is_some() && dh <= 1e-8 && dt < 10.0,
        detail: format!(
            "H = {h:.12}, max|r^2 B| = {res:.2e}, {} critical values alternating = {alternate}, \
             envelope decreasing from n0 = {onset:?}, |H(1e-12) - H(1e-10)| = {dh:.2e} ({dt:.2}s)",
            cps.len()
        ),
    }
}

fn criterion_7() -> Line {
    let t = Instant::now();
    let mut worst = f64::INFINITY;
    let mut d0s = Vec::new();
    for p in [1.1, 1.5, 1.9] {
        let params = FlowParams::new(p).unwrap();
        for b0 in [0.5, 1.0] {
            let d0 = delta0_search(&params, b0, 200, 200).unwrap().delta0;
            let fam = Family::BlowupArctan { b0, delta: 0.5 * d0 };
            let map = subsolution_residual(&fam, &params, &time_grid(&fam, 200), &radius_grid(200)).unwrap();
            worst = worst.min(map.min);
            d0s.push(d0);
        }
    }
    let dt = secs(t);
    let lo = d0s.iter().cloned().fold(f64::INFINITY, f64::min);
    Line {
        id: 7,
        pass: worst >= -1e-8 && dt < 10.0,
        detail: format!("min residual at delta0/2 = {worst:.3e}, smallest delta0 = {lo:.3e} ({dt:.2}s)"),
    }
}

fn run(name: PresetName) -> (ExperimentRun, f64) {
    let t = Instant::now();
    let pre = preset(name, 1.5).unwrap();
    let r = run_preset(&pre).unwrap();
    (r, secs(t))
}

fn criterion_8(r: &ExperimentRun, dt: f64) -> Line {
    let dr = 1.0 / 256.0;
    let v = r.sandwich_violation.unwrap();
    Line {
        id: 8,
        pass: v <= dr * dr && r.report.t_final >= 1.0 - 1e-12 && dt < 60.0,
        detail: format!(
            "sandwich violation {v:.3e} (dr^2 = {:.3e}) up to t = {:.3}, {:?} ({dt:.1}s)",
            dr * dr,
            r.report.t_final,
            r.report.outcome
        ),
    }
}

fn criterion_9(coarse: &ExperimentRun, fine: &ExperimentRun, dt: f64) -> Line {
    let rep = &coarse.report;
    let hr0_max = rep.series.iter().fold(0.0f64, |m, d| m.max(d.hr0));
    let trend = rep.distance_trend(0.5 * rep.t_final);
    let t1 = rep.blowup.as_ref().map(|b| b.time).unwrap_or(f64::NAN);
    let t2 = fine.report.blowup.as_ref().map(|b| b.time).unwrap_or(f64::NAN);
    let rel = (t2 - t1).abs() / t1;
    Line {
        id: 9,
        pass: rep.outcome == Outcome::BlewUp
            && fine.report.outcome == Outcome::BlewUp
            && hr0_max > 1e3
            && trend < 0.0
            && t1.is_finite()
            && rel <= 0.2
            && dt < 300.0,
        detail: format!(
            "{:?} at t = {:.5}, max h_r(0) = {hr0_max:.3e}, distance trend over final half {trend:.3e}, \
             T(513) = {t1:.5}, T(1025) = {t2:.5}, rel change {rel:.2e} ({dt:.1}s)",
            rep.outcome, rep.t_final
        ),
    }
}

fn criterion_10(r: &ExperimentRun, dt: f64) -> Line {
    Line {
        id: 10,
        pass: r.report.outcome == Outcome::BlewUp && dt < 300.0,
        detail: format!("{:?} at t = {:.5} ({dt:.2}s)", r.report.outcome, r.report.t_final),
    }
}

fn criterion_11(r: &ExperimentRun, dt: f64) -> Line {
    let dist = r.report.series.iter().rev().map(|d| d.dist).find(|d| d.is_finite()).unwrap_or(f64::NAN);
    Line {
        id: 11,
        pass: r.report.outcome == Outcome::Converged && dist <= 1e-3 && dt < 120.0,
        detail: format!("{:?} at t = {:.3}, final distance {dist:.3e} ({dt:.1}s)", r.report.outcome, r.report.t_final),
    }
}

fn criterion_12(runs: &[(&str, &ExperimentRun)]) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, r) in runs {
        let sup = r.report.max_sup_rhr();
        let bound = r.gradient_bound();
        ok &= sup <= 1.01 * bound;
        parts.push(format!("{name} {sup:.3}/{bound:.3}"));
    }
    Line { id: 12, pass: ok, detail: format!("max sup|r h_r| / bound: {}", parts.join(", ")) }
}

fn criterion_13() -> Line {
    let t = Instant::now();
    let pre = preset(PresetName::Converge, 1.5).unwrap();
    let sc = self_convergence(&pre.config, 0.1, pre.config.evolve.n).unwrap();
    let dt = secs(t);
    Line {
        id: 13,
        pass: sc.order >= 1.7,
        detail: format!(
            "n = {:?}: differences {:.3e}, {:.3e}, observed order {:.3} ({dt:.1}s)",
            sc.sizes, sc.differences[0], sc.differences[1], sc.order
        ),
    }
}

fn main() -> ExitCode {
    // libtest-style flags (`--nocapture`, filters) are accepted and ignored.
    let mut lines = vec![criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(), criterion_6(), criterion_7()];

    let (sandwich, t8) = run(PresetName::Sandwich);
    lines.push(criterion_8(&sandwich, t8));

    let t9 = Instant::now();
    let generic = preset(PresetName::BlowupGeneric, 1.5).unwrap();
    let coarse = run_preset(&generic).unwrap();
    let mut refined = generic.clone();
    refined.config.evolve.n = 1025;
    let fine = run_preset(&refined).unwrap();
    lines.push(criterion_9(&coarse, &fine, secs(t9)));

    let (nongeneric, t10) = run(PresetName::BlowupNongeneric);
    lines.push(criterion_10(&nongeneric, t10));

    let (converge, t11) = run(PresetName::Converge);
    lines.push(criterion_11(&converge, t11));

    lines.push(criterion_12(&[
        ("sandwich", &sandwich),
        ("blowup-generic", &coarse),
        ("blowup-nongeneric", &nongeneric),
        ("converge", &converge),
    ]));
    lines.push(criterion_13());

    let mut unexpected = Vec::new();
    for l in &lines {
        let known = KNOWN_RED.contains(&l.id);
        let tag = match (l.pass, known) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as known red)",
            (false, true) => "FAIL (known red)",
            (false, false) => "FAIL",
        };
        println!("criterion {:2}: {tag}: {}", l.id, l.detail);
        if !l.pass && !known {
            unexpected.push(l.id);
        }
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("acceptance: {passed}/{} criteria pass", lines.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
