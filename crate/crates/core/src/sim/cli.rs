//! Command-line and configuration-file front end.
//!
//! Precedence, lowest first: built-in defaults, the experiment preset,
//! the configuration file, explicit flags.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use super::SimConfig;
use crate::continuation::SolverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Gmres,
    Minres,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Gmres => SolverKind::Gmres,
            SolverArg::Minres => SolverKind::Minres,
        }
    }
}

/// Closed-loop continuation NMPC simulator for the minimum-time test problem.
#[derive(Debug, Parser)]
#[command(name = "cnmpc-sim", version, arg_required_else_help = true)]
struct Args {
    /// Experiment preset: 1 no preconditioning (k_max 10); 2 t_p 0.2, k_max 1;
    /// 3 t_p 0.4, k_max 2; 4 t_p 0.4, k_max 10.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    case: Option<u8>,
    /// Maximum Krylov iterations per step.
    #[arg(long = "kmax")]
    kmax: Option<usize>,
    /// Preconditioner rebuild period in seconds.
    #[arg(long)]
    tp: Option<f64>,
    #[arg(long, value_enum)]
    precond: Option<OnOff>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Factor the symmetrized matrix (A + Aᵀ)/2.
    #[arg(long)]
    symmetrize: bool,
    /// System sampling period in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Horizon steps.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Forward-difference step.
    #[arg(long = "h")]
    h: Option<f64>,
    /// Relative Krylov tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Simulated time cap in seconds.
    #[arg(long)]
    tmax: Option<f64>,
    /// CSV log destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Compare this run against a previously written CSV log.
    #[arg(long, value_name = "PATH")]
    baseline: Option<PathBuf>,
    /// Write the comparison report as CSV.
    #[arg(long, value_name = "PATH", requires = "baseline")]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliOptions {
    pub config: SimConfig,
    pub baseline: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Argument syntax errors, plus `--help` / `--version` requests.
    #[error("{0}")]
    Clap(#[from] clap::Error),
    #[error("usage error: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) => 2,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected `key = value`, got '{line}'",
                no + 1
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Usage(format!(
                "config line {}: empty key or value in '{line}'",
                no + 1
            )));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value '{value}' for '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!(
            "invalid value '{value}' for '{key}'"
        ))),
    }
}

/// Keys that only matter when preconditioning is on.
#[derive(Default)]
struct Touched {
    t_p: bool,
}

fn apply_key(
    cfg: &mut SimConfig,
    touched: &mut Touched,
    key: &str,
    value: &str,
) -> Result<(), CliError> {
    let k = &mut cfg.consts;
    match key {
        "case" => {}
        "dt" => cfg.dt = parse_value(key, value)?,
        "N" | "horizon_steps" => cfg.horizon_steps = parse_value(key, value)?,
        "h" => cfg.h = parse_value(key, value)?,
        "tol" => cfg.tol = parse_value(key, value)?,
        "k_max" | "kmax" => cfg.k_max = parse_value(key, value)?,
        "early_exit" => cfg.early_exit = parse_bool(key, value)?,
        "precond" => cfg.precond = parse_bool(key, value)?,
        "t_p" | "tp" => {
            cfg.t_p = parse_value(key, value)?;
            touched.t_p = true;
        }
        "symmetrize" => cfg.symmetrize = parse_bool(key, value)?,
        "solver" => {
            cfg.solver = value
                .parse()
                .map_err(|e: String| CliError::Usage(format!("{key}: {e}")))?
        }
        "t_end" | "tmax" => cfg.t_end = parse_value(key, value)?,
        "stop_radius" => cfg.stop_radius = parse_value(key, value)?,
        "newton_tol" => cfg.newton_tol = parse_value(key, value)?,
        "newton_max_iter" => cfg.newton_max_iter = parse_value(key, value)?,
        "out" => cfg.out = Some(PathBuf::from(value)),
        "A" | "a" => k.a = parse_value(key, value)?,
        "B" | "b" => k.b = parse_value(key, value)?,
        "c_u" => k.c_u = parse_value(key, value)?,
        "r_u" => k.r_u = parse_value(key, value)?,
        "w_d" => k.w_d = parse_value(key, value)?,
        "x0" => k.x0 = parse_value(key, value)?,
        "y0" => k.y0 = parse_value(key, value)?,
        "t0" => k.t0 = parse_value(key, value)?,
        "x_f" => k.x_f = parse_value(key, value)?,
        "y_f" => k.y_f = parse_value(key, value)?,
        other => return Err(CliError::Usage(format!("unknown config key '{other}'"))),
    }
    Ok(())
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_file(&text)
}

/// Parses the full argument vector (including the program name).
pub fn parse_cli<I, T>(argv: I) -> Result<CliOptions, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => Vec::new(),
    };

    let file_case = file
        .iter()
        .rev()
        .find(|(k, _)| k == "case")
        .map(|(k, v)| parse_value::<u8>(k, v))
        .transpose()?;
    let case = args.case.or(file_case);
    let mut cfg = match case {
        Some(c) => SimConfig::preset(c)
            .ok_or_else(|| CliError::Usage(format!("unknown case {c} (expected 1-4)")))?,
        None => SimConfig::default(),
    };

    let mut touched = Touched::default();
    for (k, v) in &file {
        apply_key(&mut cfg, &mut touched, k, v)?;
    }

    if let Some(v) = args.kmax {
        cfg.k_max = v;
    }
    if let Some(v) = args.tp {
        cfg.t_p = v;
        touched.t_p = true;
    }
    if let Some(v) = args.precond {
        cfg.precond = v == OnOff::On;
    }
    if let Some(v) = args.solver {
        cfg.solver = v.into();
    }
    if args.symmetrize {
        cfg.symmetrize = true;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.n {
        cfg.horizon_steps = v;
    }
    if let Some(v) = args.h {
        cfg.h = v;
    }
    if let Some(v) = args.tol {
        cfg.tol = v;
    }
    if let Some(v) = args.tmax {
        cfg.t_end = v;
    }
    if let Some(v) = args.out {
        cfg.out = Some(v);
    }

    if touched.t_p && !cfg.precond {
        return Err(CliError::Usage(
            "t_p is set but preconditioning is off (add --precond on)".into(),
        ));
    }
    if cfg.precond && cfg.solver == SolverKind::Minres {
        return Err(CliError::Usage(
            "--solver minres needs a positive definite preconditioner; \
             the LU preconditioner is indefinite for this problem (use --precond off)"
                .into(),
        ));
    }
    cfg.validate().map_err(CliError::Usage)?;

    Ok(CliOptions {
        config: cfg,
        baseline: args.baseline,
        report: args.report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<CliOptions, CliError> {
        parse_cli(std::iter::once("cnmpc-sim").chain(args.iter().copied()))
    }

    #[test]
    fn case_two_preset() {
        let c = parse(&["--case", "2"]).unwrap().config;
        assert!(c.precond);
        assert_eq!((c.t_p, c.k_max), (0.2, 1));
    }

    #[test]
    fn flag_overrides_preset() {
        let c = parse(&["--case", "1", "--kmax", "5"]).unwrap().config;
        assert!(!c.precond);
        assert_eq!(c.k_max, 5);
    }

    #[test]
    fn no_args_is_usage() {
        let e = parse(&[]).unwrap_err();
        assert_ne!(e.exit_code(), 0);
    }

    #[test]
    fn bad_inputs_are_usage_errors() {
        for args in [
            &["--case", "5"][..],
            &["--bogus"],
            &["--case", "1", "--dt", "-0.1"],
            &["--case", "1", "--tp", "0.3"],
            &["--case", "3", "--solver", "minres"],
            &["--precond", "maybe"],
            &["--case", "1", "--kmax", "0"],
        ] {
            let e = parse(args).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{args:?}: {e}");
        }
    }

    #[test]
    fn config_file_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# experiment\ncase = 3\nk_max = 4   # file beats preset\ntol = 1e-6\nw_d = 0.01\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["--config", p]).unwrap().config;
        assert_eq!((c.case, c.k_max, c.tol, c.t_p), (Some(3), 4, 1e-6, 0.4));
        assert_eq!(c.consts.w_d, 0.01);
        let c = parse(&["--config", p, "--kmax", "7", "--case", "4"])
            .unwrap()
            .config;
        assert_eq!((c.case, c.k_max, c.tol), (Some(4), 7, 1e-6));
    }

    #[test]
    fn config_file_errors() {
        assert!(parse_config_file("dt 0.1").is_err());
        assert!(parse_config_file("dt =").is_err());
        let kv = parse_config_file("  # only a comment\n\nN = 20\n").unwrap();
        assert_eq!(kv, vec![("N".to_string(), "20".to_string())]);
        let mut cfg = SimConfig::default();
        assert!(apply_key(&mut cfg, &mut Touched::default(), "nonsense", "1").is_err());
    }
}
