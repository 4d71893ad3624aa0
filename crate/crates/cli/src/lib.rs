//! `fj` command-line front end.
//!
//! Exit codes: 0 success, 1 failed checkpoints or a degenerate analytic
//! solution, 2 flag or validation error, 3 non-integer `Omega/omega`, 4
//! divergence.

pub mod args;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;
use floquet_junction::checkpoints::run_reference_suite;
use floquet_junction::model::Parity;
use floquet_junction::stability::{
    boundary_curve, scan, verify_cells_dynamics, AxisParam, Quantity,
};
use floquet_junction::{
    analytic_evolution, classify, effective_couplings, equilibrium_check, propagate, quasienergies,
    Error, StateVector, Trajectory,
};
use num_complex::Complex;
use serde_json::{json, Value};

use crate::args::{Cli, Format};
use crate::config::{resolve, CommandKind, Initial, RunConfig};
use crate::output::{
    complex, num, params_json, scan_json, suite_json, to_text, trajectory_csv, trajectory_json,
};

/// Periods and bound used by `scan --verify-dynamics`.
pub const DYNAMICS_PERIODS: usize = 50;
pub const DYNAMICS_BOUND: f64 = 10.0;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(String),
    ChecksFailed(usize),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::ChecksFailed(_) => 1,
            CliError::Core(e) => match e {
                Error::ResonanceViolation { .. } => 3,
                Error::Divergence { .. } => 4,
                Error::Degenerate { .. } | Error::Singular | Error::Alignment(_) => 1,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::ChecksFailed(n) => write!(f, "{n} checkpoint(s) failed"),
        }
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fj: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (cfg, dump) = resolve(&cli.command)?;
    if dump {
        let mut text =
            serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        return write_out(None, &text);
    }
    dispatch(&cfg)
}

/// Runs an already resolved configuration.
pub fn dispatch(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        CommandKind::Evolve => evolve(cfg),
        CommandKind::Quasienergy => quasienergy(cfg),
        CommandKind::Scan => run_scan(cfg),
        CommandKind::Boundary => boundary(cfg),
        CommandKind::Verify => verify(cfg),
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Io(e.to_string()))
                }
                _ => Ok(()),
            }
        }
    }
}

fn json_only(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Usage(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn initial_state(init: &Initial) -> Result<StateVector<f64>, CliError> {
    let state = match init {
        Initial::Basis(k) => StateVector::basis(*k)?,
        Initial::Amplitudes(a) => StateVector::new(a.map(|[re, im]| Complex::new(re, im)), 0.0),
    };
    if state
        .amps
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(CliError::Usage("initial amplitudes must be finite".into()));
    }
    if state.total_probability() == 0.0 {
        return Err(CliError::Usage("initial amplitudes are all zero".into()));
    }
    Ok(state)
}

fn trajectory_text(t: &Trajectory<f64>, format: Format) -> String {
    match format {
        Format::Csv => trajectory_csv(t),
        Format::Json => to_text(&trajectory_json(t)),
    }
}

fn evolve(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.params.validate()?;
    let initial = initial_state(&cfg.initial)?;
    let format = cfg.format.unwrap_or(Format::Csv);
    let traj = propagate(&cfg.params, &initial, &cfg.integration)?;
    if let Some(path) = &cfg.analytic {
        let ana = analytic_evolution(&cfg.params, &initial, &traj.times)?;
        write_out(Some(path), &trajectory_text(&ana, format))?;
    }
    write_out(cfg.output.as_deref(), &trajectory_text(&traj, format))
}

fn quasienergy(cfg: &RunConfig) -> Result<(), CliError> {
    json_only(cfg, "quasienergy")?;
    let p = &cfg.params;
    let c = effective_couplings(p)?;
    let modes = quasienergies(&c, p.beta_l, p.beta_r);
    let verdict = classify(&modes.map(|m| m.energy), cfg.tol);
    let modes_json: Vec<Value> = modes
        .iter()
        .map(|m| {
            json!({
                "index": m.index,
                "energy": complex(m.energy),
                "vector": m.vector.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut out = json!({
        "params": params_json(p),
        "couplings": {
            "j0": num(c.j0),
            "j_plus": num(c.j_plus),
            "j_minus": num(c.j_minus),
            "n": c.n,
        },
        "quasienergies": modes_json,
        "verdict": {
            "case": verdict.case.label(),
            "stable": verdict.case.is_stable(),
            "max_im": num(verdict.max_im),
        },
    });
    if !p.is_balanced() {
        out["equilibrium"] = match equilibrium_check(p, cfg.equilibrium_tol) {
            Ok(r) => json!({
                "tol": num(cfg.equilibrium_tol),
                "stable": r.stable,
                "matched": r.matched.map(|m| m.label()),
                "checks": r.checks.iter().map(|ch| json!({
                    "condition": ch.condition.label(),
                    "satisfied": ch.satisfied,
                    "residual": num(ch.residual),
                    "spectrum": ch.spectrum.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            }),
            Err(e @ Error::Prerequisite { .. }) => json!({"error": e.to_string()}),
            Err(e) => return Err(e.into()),
        };
    }
    write_out(cfg.output.as_deref(), &to_text(&out))
}

fn thread_count(cfg: &RunConfig) -> Result<Option<usize>, CliError> {
    if let Some(n) = cfg.threads {
        return Ok(Some(n));
    }
    match std::env::var("FJ_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("FJ_THREADS=`{v}` is not a thread count"))),
        _ => Ok(None),
    }
}

fn default_quantity(cfg: &RunConfig) -> Result<Quantity, CliError> {
    let n = cfg.params.resonance_order()?;
    let axes = [cfg.scan.axis1.param, cfg.scan.axis2.param];
    let unbalanced_axis = axes
        .iter()
        .any(|a| matches!(a, AxisParam::BetaL | AxisParam::BetaR));
    let balanced =
        !unbalanced_axis && (axes.contains(&AxisParam::Beta) || cfg.params.is_balanced());
    Ok(match (balanced, Parity::of(n)) {
        (false, _) => Quantity::MaxImSpectrum,
        (true, Parity::Even) => Quantity::ReRhoEven,
        (true, Parity::Odd) => Quantity::ReRhoSumOdd,
    })
}

fn run_scan(cfg: &RunConfig) -> Result<(), CliError> {
    json_only(cfg, "scan")?;
    let quantity = match cfg.scan.quantity {
        Some(q) => q,
        None => default_quantity(cfg)?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cfg)? {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    let spec = &cfg.scan;
    let (grid, dynamics) = pool.install(|| -> Result<_, CliError> {
        let grid = scan(&cfg.params, spec.axis1, spec.axis2, quantity, cfg.tol)?;
        let dynamics = if spec.verify_dynamics > 0 {
            Some(verify_cells_dynamics(
                &grid,
                spec.verify_dynamics,
                spec.seed,
                DYNAMICS_PERIODS,
                DYNAMICS_BOUND,
            )?)
        } else {
            None
        };
        Ok((grid, dynamics))
    })?;
    write_out(
        cfg.output.as_deref(),
        &to_text(&scan_json(&grid, dynamics.as_deref())),
    )
}

fn boundary(cfg: &RunConfig) -> Result<(), CliError> {
    let axis = &cfg.boundary_axis;
    let curve = boundary_curve(&cfg.params, axis)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("{},boundary_beta\n", axis.param.name());
            for (x, b) in &curve {
                s.push_str(&format!(
                    "{},{}\n",
                    output::fmt_num(*x),
                    output::fmt_num(*b)
                ));
            }
            s
        }
        Format::Json => to_text(&json!({
            "swept": axis.param.name(),
            "points": curve.iter().map(|&(x, b)| [num(x), num(b)]).collect::<Vec<_>>(),
        })),
    };
    write_out(cfg.output.as_deref(), &text)
}

fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    json_only(cfg, "verify")?;
    if cfg.suite != "figures" {
        return Err(CliError::Usage(format!("unknown suite `{}`", cfg.suite)));
    }
    let report = run_reference_suite(cfg.artifacts.is_some());
    let mut written = Vec::new();
    if let Some(dir) = &cfg.artifacts {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        for (name, t) in &report.artifacts.trajectories {
            let file = format!("{name}.csv");
            write_out(Some(&dir.join(&file)), &trajectory_csv(t))?;
            written.push(file);
        }
        for (name, g) in &report.artifacts.scans {
            let file = format!("{name}.json");
            write_out(Some(&dir.join(&file)), &to_text(&scan_json(g, None)))?;
            written.push(file);
        }
    }
    write_out(
        cfg.output.as_deref(),
        &to_text(&suite_json(&cfg.suite, &report, &written)),
    )?;
    let failed = report.items.iter().filter(|i| !i.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
