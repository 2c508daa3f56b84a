//! Command-line interface. Flags override `GENFLOW_*` environment variables,
//! which override the defaults.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::catalog::{self, AlgebraSpec};
use crate::courant::{
    bismut_ricci, codifferential_of_h, gen_scalar, h_squared, l_moment_map, DorfmanBracket,
};
use crate::error::{Error, Result};
use crate::flow::{integrate, FlowOptions, OutcomeKind};
use crate::io::emit_trajectory_csv;
use crate::liealg::{ricci, scalar_curvature, structure_report};
use crate::soliton::{self, SearchOptions};

#[derive(Debug, Parser)]
#[command(name = "genflow", version, about = "Generalized Ricci flow on Lie groups")]
pub struct Cli {
    /// Emit a machine-readable JSON report on stdout.
    #[arg(long, global = true, env = "GENFLOW_JSON")]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature quantities of a bracket.
    Curvature {
        /// JSON spec file, or a catalog query such as `n4:a=1,b=0,c=1`.
        spec: String,
    },
    /// Integrates the (optionally normalized) bracket flow.
    Flow {
        spec: String,
        #[arg(long, env = "GENFLOW_T_MAX", default_value_t = 10.0)]
        t_max: f64,
        #[arg(long)]
        normalized: bool,
        /// Trajectory CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "GENFLOW_RTOL", default_value_t = 1e-9)]
        rtol: f64,
        #[arg(long, env = "GENFLOW_ATOL", default_value_t = 1e-12)]
        atol: f64,
        #[arg(long, env = "GENFLOW_MAX_STEPS", default_value_t = 1_000_000)]
        max_steps: usize,
        #[arg(long, env = "GENFLOW_MONITOR_EVERY", default_value_t = 1)]
        monitor_every: usize,
    },
    /// Checks the algebraic soliton equations.
    Verify {
        spec: String,
        #[arg(long, env = "GENFLOW_TOL", default_value_t = soliton::DEFAULT_VERIFY_TOL)]
        tol: f64,
    },
    /// Runs the normalized flow and certifies the limit.
    Search {
        spec: String,
        #[arg(long, env = "GENFLOW_T_BUDGET", default_value_t = 1e4)]
        t_budget: f64,
        #[arg(long, env = "GENFLOW_SEARCH_TOL", default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, env = "GENFLOW_MAX_STEPS", default_value_t = 1_000_000)]
        max_steps: usize,
        /// Writes the limit as a JSON spec.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in fixtures.
    Catalog {
        #[command(subcommand)]
        action: Option<CatalogAction>,
    },
    /// Verifies every classification fixture and control.
    ReproduceClassification {
        #[arg(long, env = "GENFLOW_TOL", default_value_t = soliton::DEFAULT_VERIFY_TOL)]
        tol: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { name: String },
    /// Writes the spec JSON (stdout without `--out`).
    Export {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status: 0 pass, 1 check failed, 2 usage or input/IO problem.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_)
        | Error::Parse { .. }
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Index(_)
        | Error::Duplicate(_)
        | Error::UnknownEntry(_)
        | Error::Jacobi { .. }
        | Error::NotClosed { .. }
        | Error::DimensionMismatch(_) => 2,
        _ => 1,
    }
}

/// Loads a spec file if `arg` names an existing path, otherwise a catalog query.
pub fn resolve_spec(arg: &str) -> Result<(AlgebraSpec, DorfmanBracket)> {
    let p = Path::new(arg);
    let spec = if p.exists() {
        catalog::read_spec(p)?
    } else {
        catalog::entry(arg)?.spec
    };
    let d = spec.to_dorfman()?;
    Ok((spec, d))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn print_matrix(label: &str, m: &DMatrix<f64>) {
    println!("{label}:");
    for i in 0..m.nrows() {
        let r: Vec<String> = (0..m.ncols()).map(|j| format!("{:>12.6}", m[(i, j)])).collect();
        println!("  {}", r.join(" "));
    }
}

fn emit(json_mode: bool, report: &Value, text: impl FnOnce()) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(report).expect("serializable"));
    } else {
        text();
    }
}

fn code(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let js = cli.json;
    match cli.command {
        Command::Curvature { spec } => {
            let (spec, d) = resolve_spec(&spec)?;
            let ric = ricci(d.mu());
            let rb = bismut_ricci(d.mu(), d.h());
            let h2 = h_squared(d.h());
            let ds = codifferential_of_h(&d);
            let m = l_moment_map(&d);
            let report = json!({
                "name": spec.name,
                "structure": structure_report(d.mu(), 1e-9),
                "ric_mu": rows(&ric),
                "ric_bismut": rows(&rb),
                "h_squared": rows(&h2),
                "dstar_h": ds.components(),
                "moment_map": {"a": rows(&m.a), "alpha": m.alpha.components()},
                "scal": scalar_curvature(d.mu()),
                "gen_scalar": gen_scalar(&d),
                "norm2_mud": d.norm2(),
            });
            emit(js, &report, || {
                println!("{} (dim {})", spec.name, d.dim());
                print_matrix("Ric_mu", &ric);
                print_matrix("Ric^B", &rb);
                print_matrix("H^2", &h2);
                println!("d*H (increasing e^ij): {:?}", ds.components());
                print_matrix("M (endomorphism part)", &m.a);
                println!("M (2-form part): {:?}", m.alpha.components());
                println!("scal = {}", scalar_curvature(d.mu()));
                println!("S = {}", gen_scalar(&d));
                println!("|mud|^2 = {}", d.norm2());
            });
            Ok(ExitCode::SUCCESS)
        }
        Command::Flow {
            spec,
            t_max,
            normalized,
            out,
            rtol,
            atol,
            max_steps,
            monitor_every,
        } => {
            let (spec, d) = resolve_spec(&spec)?;
            let opts = FlowOptions {
                t_max,
                rtol,
                atol,
                max_steps,
                normalized,
                monitor_every,
                ..Default::default()
            };
            let outcome = integrate(&d, &opts)?;
            if let Some(path) = &out {
                emit_trajectory_csv(&outcome.trajectory, path)?;
            }
            let last = outcome.final_sample();
            let (kind, detail) = match &outcome.kind {
                OutcomeKind::ReachedTMax => ("reached_t_max", Value::Null),
                OutcomeKind::BlowUp { t_estimate } => ("blow_up", json!(t_estimate)),
                OutcomeKind::Converged { limit } => (
                    "converged",
                    serde_json::to_value(AlgebraSpec::from_dorfman("limit", limit))?,
                ),
                OutcomeKind::StepUnderflow => ("step_underflow", Value::Null),
            };
            let ok = !matches!(outcome.kind, OutcomeKind::StepUnderflow);
            let report = json!({
                "name": spec.name,
                "options": opts,
                "outcome": kind,
                "detail": detail,
                "accepted_steps": outcome.accepted_steps,
                "rejected_steps": outcome.rejected_steps,
                "samples": outcome.trajectory.len(),
                "t_final": last.t,
                "norm2_mud": last.norm2_mud,
                "gen_scalar": last.gen_scalar,
                "csv": out,
            });
            emit(js, &report, || {
                println!("{}: {kind} at t = {}", spec.name, last.t);
                if let OutcomeKind::BlowUp { t_estimate } = outcome.kind {
                    println!("blow-up time estimate: {t_estimate}");
                }
                println!(
                    "steps: {} accepted, {} rejected; |mud|^2 = {}, S = {}",
                    outcome.accepted_steps, outcome.rejected_steps, last.norm2_mud, last.gen_scalar
                );
                if let Some(p) = &out {
                    println!("trajectory written to {}", p.display());
                }
            });
            Ok(code(ok))
        }
        Command::Verify { spec, tol } => {
            let (spec, d) = resolve_spec(&spec)?;
            let check = soliton::verify_soliton(&d, tol)?;
            let report = json!({"name": spec.name, "check": check});
            emit(js, &report, || {
                let c = &check.certificate;
                println!(
                    "{}: {}",
                    spec.name,
                    if check.passed { "soliton" } else { "not a soliton" }
                );
                println!("lambda = {} ({:?})", c.lambda, c.soliton_class);
                println!("D eigenvalues = {:?}", c.d_eigenvalues);
                println!(
                    "residuals: metric {:.3e}, torsion {:.3e} (tol {tol:.1e})",
                    c.residual_metric, c.residual_torsion
                );
            });
            Ok(code(check.passed))
        }
        Command::Search {
            spec,
            t_budget,
            tol,
            max_steps,
            out,
        } => {
            let (spec, d) = resolve_spec(&spec)?;
            let opts = SearchOptions {
                t_budget,
                max_steps,
                verify_tol: tol,
                ..Default::default()
            };
            let rep = soliton::search_soliton(&d, &opts)?;
            let limit = AlgebraSpec::from_dorfman(&format!("{}-limit", spec.name), &rep.limit);
            if let Some(p) = &out {
                catalog::save_spec(p, &limit)?;
            }
            let ok = rep.converged && rep.check.passed;
            let report = json!({
                "name": spec.name,
                "converged": rep.converged,
                "t_final": rep.t_final,
                "steps": rep.steps,
                "functional_value": rep.functional_value,
                "check": rep.check,
                "limit": limit,
                "warnings": rep.warnings,
            });
            emit(js, &report, || {
                for w in &rep.warnings {
                    eprintln!("warning: {w}");
                }
                println!(
                    "{}: {} after t = {} ({} steps), F = {}",
                    spec.name,
                    if rep.converged { "converged" } else { "not converged" },
                    rep.t_final,
                    rep.steps,
                    rep.functional_value
                );
                let c = &rep.check.certificate;
                println!(
                    "limit {}: lambda = {}, D eigenvalues = {:?}",
                    if rep.check.passed { "verified" } else { "not verified" },
                    c.lambda,
                    c.d_eigenvalues
                );
            });
            Ok(code(ok))
        }
        Command::Catalog { action } => match action.unwrap_or(CatalogAction::List) {
            CatalogAction::List => {
                let entries = catalog::catalog();
                let report: Vec<Value> = entries
                    .iter()
                    .map(|e| {
                        json!({
                            "name": e.spec.name,
                            "dim": e.spec.dim,
                            "expect_soliton": e.expect_soliton,
                            "lambda": e.expected.as_ref().map(|x| x.lambda),
                        })
                    })
                    .collect();
                emit(js, &json!(report), || {
                    for e in &entries {
                        let tag = match (&e.expected, e.expect_soliton) {
                            (Some(x), _) => format!("soliton, lambda = {}", x.lambda),
                            (None, Some(false)) => "control".to_string(),
                            _ => String::new(),
                        };
                        println!("{:<20} dim {}  {tag}", e.spec.name, e.spec.dim);
                    }
                });
                Ok(ExitCode::SUCCESS)
            }
            CatalogAction::Show { name } => {
                let e = catalog::entry(&name)?;
                let report = serde_json::to_value(&e)?;
                emit(js, &report, || {
                    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"))
                });
                Ok(ExitCode::SUCCESS)
            }
            CatalogAction::Export { name, out } => {
                let e = catalog::entry(&name)?;
                match out {
                    Some(p) => catalog::save_spec(&p, &e.spec)?,
                    None => println!("{}", serde_json::to_string_pretty(&e.spec)?),
                }
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::ReproduceClassification { tol } => {
            let rep = soliton::reproduce_classification_with(tol);
            emit(js, &serde_json::to_value(&rep)?, || {
                for r in &rep.rows {
                    println!(
                        "{} {:<20} lambda = {:<22} metric {:.1e} torsion {:.1e} {}",
                        if r.passed { "PASS" } else { "FAIL" },
                        r.name,
                        r.lambda,
                        r.residual_metric,
                        r.residual_torsion,
                        r.note
                    );
                }
            });
            Ok(code(rep.all_passed))
        }
    }
}
