use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use pflow_core::comparison::{delta0_search, radius_grid, subsolution_residual, time_grid, Family};
use pflow_core::evolution::{Outcome, RunReport};
use pflow_core::io::{
    json_artifact, preset, run_experiment, run_preset, write_csv_file, write_json_file, write_table, ExperimentRun,
    PresetName, RunConfig,
};
use pflow_core::stationary::integrate_hstar;
use pflow_core::verifier::{eval_c1, verify_all};
use pflow_core::Error;

#[derive(Parser)]
#[command(name = "pflow", version, about = "Rotationally symmetric p-harmonic flow from the disk to the sphere")]
struct Cli {
    /// Line-oriented `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the output artifacts (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shoot the stationary profile and report its threshold value H.
    Stationary,
    /// Evolve the configured initial datum.
    Evolve,
    /// Run the inequality sweeps; exits 4 if any claim fails.
    Verify,
    /// Residual maps of the barrier families and the admissible blow-up speed.
    Subsolution,
    /// Run a named experiment: blowup-generic, blowup-nongeneric, converge, sandwich.
    Preset { name: String },
}

enum Failure {
    Lib(Error),
    Verify(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigParse { .. } | Error::ConfigRange { .. } | Error::Validation(_) | Error::Domain(_) => 2,
        Error::GridMismatch(_) => 2,
        Error::Degenerate(_) | Error::Transform { .. } | Error::Integration { .. } | Error::Inconsistent(_) => 3,
        Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Verify(ids)) => {
            eprintln!("verification FAILED: {}", ids.join(", "));
            ExitCode::from(4)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    std::fs::create_dir_all(&cli.out).map_err(Error::from)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Stationary => stationary(&cfg, out),
        Command::Evolve => {
            let run = run_experiment(&cfg, None)?;
            write_run(&cfg, out, "evolve", &run, json!({}))
        }
        Command::Verify => verify(&cfg, out),
        Command::Subsolution => subsolution(&cfg, out),
        Command::Preset { name } => {
            let name = PresetName::parse(name).map_err(|_| {
                let names: Vec<&str> = PresetName::ALL.iter().map(|p| p.as_str()).collect();
                Error::Domain(format!("unknown preset `{name}`; expected one of {}", names.join(", ")))
            })?;
            let pre = preset(name, cfg.p)?;
            let run = run_preset(&pre)?;
            let matches = run.report.outcome == pre.expected;
            if !matches {
                eprintln!("note: expected {:?}, got {:?}", pre.expected, run.report.outcome);
            }
            let extra = json!({
                "preset": name.as_str(),
                "expected_outcome": format!("{:?}", pre.expected),
                "matches_expected": matches,
            });
            write_run(&pre.config, out, &format!("preset_{}", name.as_str()), &run, extra)
        }
    }
}

fn stationary(cfg: &RunConfig, out: &Path) -> Result<u8, Failure> {
    let star = integrate_hstar(&cfg.params(), &cfg.stationary)?;
    let h = star.threshold()?;
    let echo = cfg.echo();
    let rows = star
        .r_nodes()
        .into_iter()
        .zip(star.values())
        .zip(star.log_slopes())
        .map(|((r, &v), &s)| vec![r, v, s]);
    write_csv_file(&out.join("stationary_profile.csv"), &echo, &["r", "h", "r_h_r"], rows)?;
    let crit: Vec<_> = star.critical_points.iter().map(|c| json!({"r": c.r, "value": c.value})).collect();
    let body = json!({
        "H": h,
        "residual": star.residual()?,
        "r_end": star.r_end(),
        "envelope_onset": star.envelope_onset(),
        "max_log_slope": star.max_log_slope(),
        "critical_points": crit,
    });
    write_json_file(&out.join("stationary_summary.json"), &json_artifact(&echo, body))?;
    println!("H = {h:.15}");
    Ok(0)
}

fn diagnostics_rows(report: &RunReport) -> impl Iterator<Item = Vec<f64>> + '_ {
    report.series.iter().map(|d| vec![d.t, d.hr0, d.sup_rhr, d.d1, d.d2, d.dist, d.dt])
}

fn write_run(cfg: &RunConfig, out: &Path, stem: &str, run: &ExperimentRun, extra: serde_json::Value) -> Result<u8, Failure> {
    let echo = cfg.echo();
    let rep = &run.report;
    write_csv_file(
        &out.join(format!("{stem}_diagnostics.csv")),
        &echo,
        &["t", "hr0", "sup_rhr", "d1", "d2", "dist", "dt"],
        diagnostics_rows(rep),
    )?;
    let fp = &rep.final_profile;
    let nodes = fp.grid.nodes();
    let rows = nodes.iter().zip(&fp.h).zip(&rep.final_u).map(|((&r, &h), &u)| vec![r, h, u]);
    write_csv_file(&out.join(format!("{stem}_final.csv")), &echo, &["r", "h", "u"], rows)?;
    let last_dist = rep.series.iter().rev().map(|d| d.dist).find(|d| d.is_finite());
    let mut body = json!({
        "outcome": format!("{:?}", rep.outcome),
        "t_final": rep.t_final,
        "steps": rep.steps,
        "rejected": rep.rejected,
        "failure": rep.failure,
        "blowup_time_estimate": rep.blowup.as_ref().map(|b| b.time),
        "blowup_doubling_ratio": rep.blowup.as_ref().map(|b| b.doubling_ratio),
        "threshold_H": run.threshold,
        "final_distance": last_dist,
        "max_sup_rhr": rep.max_sup_rhr(),
        "initial_bound": run.initial_bound,
        "k_fit": run.k_fit,
        "gradient_bound": run.gradient_bound(),
        "sandwich_violation": run.sandwich_violation,
        "compat_boundary_rate": run.compat.boundary_rate,
    });
    if let (Some(map), serde_json::Value::Object(more)) = (body.as_object_mut(), extra) {
        map.extend(more);
    }
    write_json_file(&out.join(format!("{stem}_report.json")), &json_artifact(&echo, body))?;
    println!("{stem}: {:?} at t = {:.6e} after {} steps", rep.outcome, rep.t_final, rep.steps);
    if let Some(b) = &rep.blowup {
        println!("extrapolated blow-up time {:.6e}", b.time);
    }
    Ok(if rep.outcome == Outcome::SolverFailure { 3 } else { 0 })
}

fn verify(cfg: &RunConfig, out: &Path) -> Result<u8, Failure> {
    let report = verify_all(&cfg.sweep_grid())?;
    let echo = cfg.echo();
    let body = serde_json::to_value(&report).map_err(Error::from)?;
    let body = json!({ "all_pass": report.all_pass(), "report": body });
    write_json_file(&out.join("verify_report.json"), &json_artifact(&echo, body))?;
    let rows = report.claims.iter().map(|c| {
        let at: Vec<String> = c.at.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
        vec![c.id.clone(), c.verdict().into(), pflow_core::io::fmt_num(c.margin), at.join(" ")]
    });
    let mut file = BufWriter::new(File::create(out.join("verify_worst.csv")).map_err(Error::from)?);
    write_table(&mut file, &echo, &["claim", "verdict", "margin", "at"], rows)?;
    for c in &report.claims {
        println!("{:5} {:18} {:+.3e}", c.verdict(), c.id, c.margin);
    }
    if report.all_pass() {
        Ok(0)
    } else {
        Err(Failure::Verify(report.failures().into_iter().map(String::from).collect()))
    }
}

fn subsolution(cfg: &RunConfig, out: &Path) -> Result<u8, Failure> {
    let params = cfg.params();
    let echo = cfg.echo();
    let d0 = delta0_search(&params, cfg.b0, cfg.sub_nt, cfg.sub_nr)?;
    let fam = Family::BlowupArctan { b0: cfg.b0, delta: 0.5 * d0.delta0 };
    let map = subsolution_residual(&fam, &params, &time_grid(&fam, cfg.sub_nt), &radius_grid(cfg.sub_nr))?;
    write_csv_file(&out.join("subsolution_blowup.csv"), &echo, &["t", "r", "residual"], map.rows())?;

    let radii = radius_grid(cfg.sub_nr);
    let lambda = (0.5 * cfg.l).tan();
    let phi = subsolution_residual(&Family::Phi { lambda }, &params, &[0.0], &radii)?;
    let psi = subsolution_residual(&Family::Psi { lambda }, &params, &[0.0], &radii)?;
    let rows = radii.iter().enumerate().map(|(j, &r)| vec![r, phi.values[0][j], psi.values[0][j]]);
    write_csv_file(&out.join("subsolution_static.csv"), &echo, &["r", "phi_residual", "psi_residual"], rows)?;

    let body = json!({
        "delta0": d0.delta0,
        "b0": d0.b0,
        "nt": d0.nt,
        "nr": d0.nr,
        "blowup_min_residual_at_half_delta0": map.min,
        "blowup_argmin_t": map.argmin.0,
        "blowup_argmin_r": map.argmin.1,
        "static_lambda": lambda,
        "phi_min_residual": phi.min,
        "psi_min_residual": psi.min,
        "c1_b0": eval_c1(&params, cfg.b0)?,
    });
    write_json_file(&out.join("subsolution_summary.json"), &json_artifact(&echo, body))?;
    println!("delta0 = {:.6e} (b0 = {}, {}x{} grid)", d0.delta0, d0.b0, d0.nt, d0.nr);
    Ok(0)
}
