//! Batch front end behind the `sigmak` binary.
//!
//! `sigmak <solve|check|verify|export> <config>` exits with
//! [`EXIT_OK`], [`EXIT_CHECK_FAILED`], [`EXIT_CONFIG`] or [`EXIT_NO_CONVERGENCE`].

pub mod config;
pub mod io;
pub mod verify;

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::geometry::{assemble, starshape_margin};
use crate::grid::{ScalarField, SphereGrid};
use crate::prescription::{check_barriers, check_monotonicity, normal_samples, rho_samples, Condition, ConditionReport, Prescription};
use crate::solver::{continuity_solve, SolveReport};
use crate::{Error, Result};

pub use config::RunConfig;
pub use io::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

/// Exit status and the report a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: i32,
    pub report: Report,
}

/// Exit status for a command that stopped with `err`.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Grid(_) | Error::Domain { .. } | Error::Io { .. } => EXIT_CONFIG,
        Error::NoConvergence(_)
        | Error::ConeBreach(_)
        | Error::NotAdmissible { .. }
        | Error::Singular(_)
        | Error::Geometry { .. } => EXIT_NO_CONVERGENCE,
    }
}

fn grid_of(cfg: &RunConfig) -> Result<Arc<SphereGrid>> {
    Ok(Arc::new(SphereGrid::new(cfg.n_theta, cfg.n_phi)?))
}

fn prescription_of(cfg: &RunConfig) -> Result<Prescription> {
    let psi = cfg.psi.build(cfg.k)?;
    psi.validate(&cfg.model).map_err(|e| Error::Config(format!("psi: {e}")))?;
    Ok(psi)
}

fn header(cfg: &RunConfig, command: &str) -> Report {
    let mut r = Report::default();
    r.push("command", command);
    r.push("model.K", cfg.model.curvature().sign());
    r.push("grid.n_theta", cfg.n_theta);
    r.push("grid.n_phi", cfg.n_phi);
    r.push("problem.k", cfg.k);
    r.push("psi.family", cfg.psi.family());
    r
}

/// Node table, mesh and report for the field `rho` against the target `psi`.
fn write_artifacts(
    cfg: &RunConfig,
    psi: &Prescription,
    rho: &ScalarField,
    run: &RunSummary,
    report: &mut Report,
) -> Result<()> {
    let state = assemble(&cfg.model, rho)?;
    let res = crate::solver::residual(&cfg.model, rho, psi, cfg.k)?;
    let last = run.report.and_then(SolveReport::last);
    let (rho_min, rho_max) = state.rho_range();
    let cone = state
        .nodes
        .iter()
        .map(|n| crate::algebra::cone_slack(&n.kappa, cfg.k))
        .fold(f64::INFINITY, f64::min);
    let residual_inf = res.max_abs();
    let converged = run.converged.unwrap_or(residual_inf <= cfg.solver.newton_tol && cone > cfg.solver.cone_margin);
    report.push("converged", converged);
    report.push("admissible", cone > cfg.solver.cone_margin);
    report.push("iterations", run.report.map_or(0, |r| r.iterations));
    report.push_f64("residual_inf", residual_inf);
    report.push_f64("rho_min", rho_min);
    report.push_f64("rho_max", rho_max);
    report.push_f64("grad_inf", state.grad_max());
    report.push_f64("kappa_max", state.kappa_max());
    report.push_f64("u_min", starshape_margin(&state));
    report.push_f64("cone_slack_min", cone);
    report.push_f64("homotopy_t_final", run.t_final);
    if let Some(r) = run.report {
        report.push("homotopy_stages", r.homotopy_t.len());
        report.push_f64("trace_cone_slack_min", r.min_cone_slack());
        if let Some(m) = last {
            report.push_f64("trace_residual_last", m.residual_inf);
        }
    }
    if let Some(reason) = &run.failure {
        report.push("failure", reason.replace('\n', " "));
    }
    report.push("mesh_embedding", "euclidean rho*z");

    if let Some(p) = &cfg.outputs.node_table {
        io::write_text(p, &io::node_table(&state, res.values()))?;
    }
    if let Some(p) = &cfg.outputs.mesh {
        io::write_text(p, &io::mesh(rho, cfg.model.curvature().sign()))?;
    }
    write_report(cfg, report)
}

fn write_report(cfg: &RunConfig, report: &Report) -> Result<()> {
    match &cfg.outputs.report {
        Some(p) => io::write_text(p, &report.render()),
        None => Ok(()),
    }
}

struct RunSummary<'a> {
    report: Option<&'a SolveReport>,
    converged: Option<bool>,
    t_final: f64,
    failure: Option<String>,
}

/// Continuation solve of the configured problem. Artifacts are written on
/// success and on non-convergence (then for the last good field).
pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let grid = grid_of(cfg)?;
    let psi = prescription_of(cfg)?;
    let mut report = header(cfg, "solve");
    match continuity_solve(&cfg.model, &psi, cfg.k, grid, &cfg.solver) {
        Ok(sol) => {
            let run = RunSummary {
                report: Some(&sol.report),
                converged: Some(true),
                t_final: sol.report.homotopy_t_final(),
                failure: None,
            };
            write_artifacts(cfg, &psi, &sol.rho, &run, &mut report)?;
            Ok(Outcome { status: EXIT_OK, report })
        }
        Err(Error::NoConvergence(f)) | Err(Error::ConeBreach(f)) => {
            let run = RunSummary {
                report: Some(&f.report),
                converged: Some(false),
                t_final: f.last_t,
                failure: Some(f.reason.clone()),
            };
            write_artifacts(cfg, &psi, &f.last_rho, &run, &mut report)?;
            Ok(Outcome {
                status: EXIT_NO_CONVERGENCE,
                report,
            })
        }
        Err(e) => Err(e),
    }
}

fn push_condition(report: &mut Report, name: &str, c: &Condition) {
    report.push(format!("{name}_ok"), c.ok);
    report.push_f64(format!("{name}_margin"), c.margin);
    report.push(format!("{name}_samples"), c.samples);
}

/// Barrier and monotonicity checks as requested by `check.*`.
pub fn cmd_check(cfg: &RunConfig) -> Result<Outcome> {
    let grid = grid_of(cfg)?;
    let psi = prescription_of(cfg)?;
    let mut cond = ConditionReport::default();
    if cfg.check.barriers {
        let (r1, r2) = cfg
            .barriers
            .ok_or_else(|| Error::Config("check.barriers needs barriers.R1 and barriers.R2".into()))?;
        cond = cond.merge(check_barriers(&psi, &cfg.model, cfg.k, r1, r2, &grid).map_err(|e| Error::Config(e.to_string()))?);
    }
    if cfg.check.monotonicity {
        let (lo, hi) = cfg.monotonicity_range();
        if !(lo > 0.0 && lo <= hi && cfg.model.contains(hi)) || cfg.check.rho_samples == 0 {
            return Err(Error::Config(format!(
                "monotonicity radii [{lo}, {hi}] x {} must lie in (0, {})",
                cfg.check.rho_samples,
                cfg.model.domain_end()
            )));
        }
        let rs = rho_samples(lo, hi, cfg.check.rho_samples);
        cond = cond.merge(
            check_monotonicity(&psi, &cfg.model, cfg.k, &rs, &normal_samples(&grid)).map_err(|e| Error::Config(e.to_string()))?,
        );
    }
    let mut report = header(cfg, "check");
    if let Some(c) = &cond.barrier_low {
        push_condition(&mut report, "barrier_low", c);
    }
    if let Some(c) = &cond.barrier_high {
        push_condition(&mut report, "barrier_high", c);
    }
    if let Some(c) = &cond.monotone {
        push_condition(&mut report, "monotone", c);
        report.push_f64("monotone_max_derivative", -c.margin);
    }
    report.push("all_ok", cond.all_ok());
    write_report(cfg, &report)?;
    Ok(Outcome {
        status: if cond.all_ok() { EXIT_OK } else { EXIT_CHECK_FAILED },
        report,
    })
}

/// Property suites; one `name = pass|fail` line per property.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    SphereGrid::new(cfg.n_theta, cfg.n_phi)?;
    let props = verify::run_suites(cfg)?;
    let mut report = header(cfg, "verify");
    for p in &props {
        report.push(p.name.clone(), if p.pass { "pass" } else { "fail" });
        for (k, v) in &p.details {
            report.push_f64(format!("{}.{k}", p.name), *v);
        }
    }
    let all = props.iter().all(|p| p.pass);
    report.push("all_pass", all);
    write_report(cfg, &report)?;
    Ok(Outcome {
        status: if all { EXIT_OK } else { EXIT_CHECK_FAILED },
        report,
    })
}

/// Re-reads a node table and regenerates node table, mesh and report for
/// the configured problem. `converged` then means that the stored field
/// satisfies the equation to `solver.newton_tol` inside the cone.
pub fn cmd_export(cfg: &RunConfig) -> Result<Outcome> {
    let grid = grid_of(cfg)?;
    let psi = prescription_of(cfg)?;
    let input = cfg
        .export_input
        .as_ref()
        .or(cfg.outputs.node_table.as_ref())
        .ok_or_else(|| Error::Config("export needs export.input or outputs.node_table".into()))?;
    let rho = io::read_node_table(&io::read_text(input)?, grid)?;
    let mut report = header(cfg, "export");
    report.push("source", input.display());
    let run = RunSummary {
        report: None,
        converged: None,
        t_final: 1.0,
        failure: None,
    };
    write_artifacts(cfg, &psi, &rho, &run, &mut report)?;
    Ok(Outcome { status: EXIT_OK, report })
}

pub const USAGE: &str = "usage: sigmak <solve|check|verify|export> <config>";

/// Runs one command line and returns the exit status. The report is printed
/// to `out`, diagnostics to `err`.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (cmd, path) = match args {
        [c, p] => (c.as_str(), Path::new(p)),
        _ => {
            let _ = writeln!(err, "{USAGE}");
            return EXIT_CONFIG;
        }
    };
    let command: fn(&RunConfig) -> Result<Outcome> = match cmd {
        "solve" => cmd_solve,
        "check" => cmd_check,
        "verify" => cmd_verify,
        "export" => cmd_export,
        other => {
            let _ = writeln!(err, "unknown command '{other}'\n{USAGE}");
            return EXIT_CONFIG;
        }
    };
    let result = RunConfig::load(path).and_then(|cfg| command(&cfg));
    match result {
        Ok(outcome) => {
            let _ = out.write_all(outcome.report.render().as_bytes());
            if outcome.status == EXIT_NO_CONVERGENCE {
                let _ = writeln!(err, "error: {}", outcome.report.get("failure").unwrap_or("no convergence"));
            }
            outcome.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text, Path::new(".")).unwrap()
    }

    #[test]
    fn exit_codes_follow_error_kinds() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Grid("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Singular(3)), EXIT_NO_CONVERGENCE);
    }

    #[test]
    fn solve_unit_sphere_in_memory() {
        let o = cmd_solve(&cfg("grid.n_theta = 8\ngrid.n_phi = 16")).unwrap();
        assert_eq!(o.status, EXIT_OK);
        assert_eq!(o.report.get("converged"), Some("true"));
        let rho_max: f64 = o.report.get("rho_max").unwrap().parse().unwrap();
        assert!((rho_max - 1.0).abs() < 1e-8);
    }

    #[test]
    fn odd_longitudes_are_a_config_error() {
        let err = cmd_solve(&cfg("grid.n_theta = 8\ngrid.n_phi = 15")).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
        assert!(err.to_string().contains("even"), "{err}");
    }

    #[test]
    fn check_requires_barriers() {
        let err = cmd_check(&cfg("psi.family = constant")).unwrap_err();
        assert_eq!(exit_code(&err), EXIT_CONFIG);
        let o = cmd_check(&cfg("psi.family = radial_power\npsi.m = 4\ncheck.barriers = false")).unwrap();
        assert_eq!(o.status, EXIT_OK);
    }

    #[test]
    fn usage_errors() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(&["solve".into()], &mut o, &mut e), EXIT_CONFIG);
        assert_eq!(run(&["fly".into(), "x".into()], &mut o, &mut e), EXIT_CONFIG);
        assert_eq!(run(&["solve".into(), "/nonexistent/cfg".into()], &mut o, &mut e), EXIT_CONFIG);
        assert!(String::from_utf8(e).unwrap().contains("unknown command"));
    }
}
