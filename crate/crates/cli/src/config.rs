use std::path::PathBuf;

use floquet_junction::integrator::DEFAULT_STEPS_PER_PERIOD;
use floquet_junction::stability::{AxisParam, Quantity, ScanAxis, DEFAULT_TOL};
use floquet_junction::{IntegrationConfig, SystemParams};
use serde::{Deserialize, Serialize};

use crate::args::{
    BoundaryArgs, Command, CommonArgs, EvolveArgs, Format, ParamArgs, QuasienergyArgs, ScanArgs,
    VerifyArgs,
};
use crate::CliError;

pub const DEFAULT_T_END: f64 = 40.0;
pub const DEFAULT_EQUILIBRIUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    #[default]
    Evolve,
    Quasienergy,
    Scan,
    Boundary,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// 1-based basis index.
    Basis(usize),
    /// `[re, im]` per component.
    Amplitudes([[f64; 2]; 4]),
}

impl Default for Initial {
    fn default() -> Self {
        Initial::Basis(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanSpec {
    pub axis1: ScanAxis<f64>,
    pub axis2: ScanAxis<f64>,
    /// Picked from the resonance parity when absent.
    pub quantity: Option<Quantity>,
    pub verify_dynamics: usize,
    pub seed: u64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            axis1: ScanAxis::new(AxisParam::Lambda, 0.0, 2.0, 101),
            axis2: ScanAxis::new(AxisParam::TwoEpsOverOmega, 0.0, 8.0, 201),
            quantity: None,
            verify_dynamics: 0,
            seed: 0,
        }
    }
}

/// Fully resolved invocation; `--dump-config` prints it and `--config`
/// reads it back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: SystemParams<f64>,
    pub initial: Initial,
    pub integration: IntegrationConfig<f64>,
    pub tol: f64,
    pub equilibrium_tol: f64,
    pub scan: ScanSpec,
    pub boundary_axis: ScanAxis<f64>,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub analytic: Option<PathBuf>,
    pub suite: String,
    pub artifacts: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: CommandKind::Evolve,
            params: SystemParams::default(),
            initial: Initial::default(),
            integration: IntegrationConfig::new(DEFAULT_T_END)
                .with_steps_per_period(DEFAULT_STEPS_PER_PERIOD),
            tol: DEFAULT_TOL,
            equilibrium_tol: DEFAULT_EQUILIBRIUM_TOL,
            scan: ScanSpec::default(),
            boundary_axis: ScanAxis::new(AxisParam::TwoEpsOverOmega, 0.0, 8.0, 401),
            threads: None,
            output: None,
            format: None,
            analytic: None,
            suite: "figures".into(),
            artifacts: None,
        }
    }
}

/// Parses `name:min:max:count`.
pub fn parse_axis(s: &str) -> Result<ScanAxis<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Usage(format!("axis `{s}` is not name:min:max:count"));
    let [name, min, max, count] = parts.as_slice() else {
        return Err(bad());
    };
    let param = AxisParam::parse(name)
        .ok_or_else(|| CliError::Usage(format!("unknown axis parameter `{name}`")))?;
    let min: f64 = min.parse().map_err(|_| bad())?;
    let max: f64 = max.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    Ok(ScanAxis::new(param, min, max, count))
}

fn parse_amps(s: &str) -> Result<[[f64; 2]; 4], CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--init-amps `{s}` needs eight comma-separated numbers"
        ))
    };
    let nums: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    if nums.len() != 8 {
        return Err(bad());
    }
    let mut out = [[0.0; 2]; 4];
    for (k, pair) in out.iter_mut().enumerate() {
        *pair = [nums[2 * k], nums[2 * k + 1]];
    }
    Ok(out)
}

fn load(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let Some(path) = &common.config else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn apply_common(cfg: &mut RunConfig, common: &CommonArgs) {
    if let Some(o) = &common.output {
        cfg.output = Some(o.clone());
    }
    if let Some(f) = common.format {
        cfg.format = Some(f);
    }
}

fn apply_params(p: &mut SystemParams<f64>, a: &ParamArgs) -> Result<(), CliError> {
    if let Some(v) = a.nu {
        p.nu = v;
    }
    if let Some(v) = a.omega {
        p.omega = v;
    }
    if let Some(v) = a.zeeman {
        p.zeeman = v;
    }
    if let Some(v) = a.lambda {
        p.lambda = v;
    }
    if let Some(v) = a.eps {
        p.epsilon = v;
    }
    if let Some(v) = a.two_eps_over_omega {
        *p = p.with_two_eps_over_omega(v);
    }
    match (a.beta, a.beta_l, a.beta_r) {
        (Some(b), None, None) => {
            p.beta_l = b;
            p.beta_r = b;
        }
        (None, Some(l), Some(r)) => {
            p.beta_l = l;
            p.beta_r = r;
        }
        (None, None, None) => {}
        (Some(_), _, _) => {
            return Err(CliError::Usage(
                "--beta cannot be combined with --beta-l/--beta-r".into(),
            ))
        }
        _ => {
            return Err(CliError::Usage(
                "unbalanced gain-loss needs both --beta-l and --beta-r".into(),
            ))
        }
    }
    Ok(())
}

fn start(
    kind: CommandKind,
    params: Option<&ParamArgs>,
    common: &CommonArgs,
) -> Result<RunConfig, CliError> {
    let mut cfg = load(common)?;
    cfg.command = kind;
    if let Some(a) = params {
        apply_params(&mut cfg.params, a)?;
    }
    apply_common(&mut cfg, common);
    Ok(cfg)
}

fn evolve(a: &EvolveArgs) -> Result<RunConfig, CliError> {
    let mut cfg = start(CommandKind::Evolve, Some(&a.params), &a.common)?;
    if let Some(k) = a.init {
        cfg.initial = Initial::Basis(usize::from(k));
    }
    if let Some(s) = &a.init_amps {
        cfg.initial = Initial::Amplitudes(parse_amps(s)?);
    }
    if let Some(t) = a.t_end {
        cfg.integration.t_end = t;
    }
    if let Some(s) = a.steps_per_period {
        cfg.integration.steps_per_period = s;
    }
    if let Some(s) = a.sample_stride {
        cfg.integration.sample_stride = s;
    }
    if let Some(p) = &a.analytic {
        cfg.analytic = Some(p.clone());
    }
    Ok(cfg)
}

fn quasienergy(a: &QuasienergyArgs) -> Result<RunConfig, CliError> {
    let mut cfg = start(CommandKind::Quasienergy, Some(&a.params), &a.common)?;
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if let Some(t) = a.equilibrium_tol {
        cfg.equilibrium_tol = t;
    }
    Ok(cfg)
}

fn scan(a: &ScanArgs) -> Result<RunConfig, CliError> {
    let mut cfg = start(CommandKind::Scan, Some(&a.params), &a.common)?;
    if let Some(s) = &a.axis1 {
        cfg.scan.axis1 = parse_axis(s)?;
    }
    if let Some(s) = &a.axis2 {
        cfg.scan.axis2 = parse_axis(s)?;
    }
    if let Some(q) = &a.quantity {
        cfg.scan.quantity = Some(
            Quantity::parse(q).ok_or_else(|| CliError::Usage(format!("unknown quantity `{q}`")))?,
        );
    }
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if let Some(k) = a.verify_dynamics {
        cfg.scan.verify_dynamics = k;
    }
    if let Some(s) = a.seed {
        cfg.scan.seed = s;
    }
    if let Some(t) = a.threads {
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

fn boundary(a: &BoundaryArgs) -> Result<RunConfig, CliError> {
    let mut cfg = start(CommandKind::Boundary, Some(&a.params), &a.common)?;
    if let Some(s) = &a.axis {
        cfg.boundary_axis = parse_axis(s)?;
    }
    Ok(cfg)
}

fn verify(a: &VerifyArgs) -> Result<RunConfig, CliError> {
    let mut cfg = start(CommandKind::Verify, None, &a.common)?;
    if let Some(s) = &a.suite {
        cfg.suite = s.clone();
    }
    if let Some(d) = &a.artifacts {
        cfg.artifacts = Some(d.clone());
    }
    Ok(cfg)
}

/// Merges the optional config file with the command-line flags.
pub fn resolve(command: &Command) -> Result<(RunConfig, bool), CliError> {
    let (cfg, dump) = match command {
        Command::Evolve(a) => (evolve(a)?, a.common.dump_config),
        Command::Quasienergy(a) => (quasienergy(a)?, a.common.dump_config),
        Command::Scan(a) => (scan(a)?, a.common.dump_config),
        Command::Boundary(a) => (boundary(a)?, a.common.dump_config),
        Command::Verify(a) => (verify(a)?, a.common.dump_config),
    };
    Ok((cfg, dump))
}
