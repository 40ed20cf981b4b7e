//! Closed-loop receding-horizon simulation of the minimum-time problem.

mod cli;
mod compare;
mod config;
mod csv;

pub use cli::{parse_cli, parse_config_file, CliError, CliOptions};
pub use compare::{compare_runs, ComparisonReport};
pub use config::SimConfig;
pub use csv::{read_csv, write_csv, write_csv_to, CSV_HEADER};

use log::info;
use thiserror::Error;

use crate::continuation::{
    initial_solve, ContinuationEngine, NewtonSettings, OcpSpec, SolverSettings,
};
use crate::krylov::KrylovSettings;
use crate::precond::{should_rebuild, PrecondConfig, PrecondState, RebuildOutcome};
use crate::tfc::{self, TfcProblem};

/// Diagnostics of one system time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    /// State at `t`, before the control is applied.
    pub x: f64,
    pub y: f64,
    /// Applied heading.
    pub u: f64,
    pub u_d: f64,
    /// Time to go `t_f` after the update.
    pub p: f64,
    /// `‖F‖₂` before the update.
    pub norm_f: f64,
    /// Relative preconditioned residual at solver exit.
    pub krylov_residual: f64,
    pub iterations: usize,
    pub rebuilt: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub records: Vec<StepRecord>,
    /// First time the trajectory came within the stop radius of the target.
    pub arrival_time: Option<f64>,
    /// Operator applications inside the Krylov solver.
    pub total_map_evals: usize,
    /// Operator applications spent assembling preconditioner matrices.
    pub total_rebuild_evals: usize,
    /// Dimension `m` of the stacked unknown.
    pub decision_dim: usize,
    /// `‖F‖` after the cold start.
    pub initial_norm_f: f64,
}

impl SimResult {
    /// Rebuilds a result from logged records, deriving evaluation counts
    /// (one operator application per Krylov iteration, `m` per rebuild).
    pub fn from_records(records: Vec<StepRecord>, decision_dim: usize) -> Self {
        let total_map_evals = records.iter().map(|r| r.iterations).sum();
        let total_rebuild_evals = records.iter().filter(|r| r.rebuilt).count() * decision_dim;
        Self {
            records,
            arrival_time: None,
            total_map_evals,
            total_rebuild_evals,
            decision_dim,
            initial_norm_f: f64::NAN,
        }
    }

    pub fn total_iterations(&self) -> usize {
        self.records.iter().map(|r| r.iterations).sum()
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cold start failed: ‖F‖ = {norm_f:e} after {iterations} Newton iterations")]
    ColdStart { norm_f: f64, iterations: usize },
    #[error(transparent)]
    Solver(#[from] crate::Error),
}

/// Supplies the state at the next sampling instant.
pub trait StateSource {
    fn next_state(&mut self, t: f64, x: &[f64], u: &[f64], predicted: &[f64]) -> Vec<f64>;
}

/// Uses the model prediction `x_{i+1} = x_i + Δt·f(x_i, u_i)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModelPropagation;

impl StateSource for ModelPropagation {
    fn next_state(&mut self, _t: f64, _x: &[f64], _u: &[f64], predicted: &[f64]) -> Vec<f64> {
        predicted.to_vec()
    }
}

pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult, SimError> {
    run_simulation_with(cfg, &mut ModelPropagation)
}

/// Runs the closed loop, taking each next state from `source`.
///
/// The loop stops when the straight-line motion over a sampling interval
/// passes within `stop_radius` of the target, when the time to go drops to
/// `Δt` or below, or when `t_end` simulated seconds have elapsed.
pub fn run_simulation_with(
    cfg: &SimConfig,
    source: &mut dyn StateSource,
) -> Result<SimResult, SimError> {
    cfg.validate().map_err(SimError::Config)?;
    let k = cfg.consts;
    let problem = TfcProblem::new(k, cfg.horizon_steps);
    let m = problem.dims().decision_dim();
    let target = k.target();

    let cold = initial_solve(
        &problem,
        &k.initial_state(),
        k.t0,
        &problem.initial_guess(),
        &NewtonSettings {
            tol: cfg.newton_tol,
            max_iter: cfg.newton_max_iter,
            h: cfg.h,
        },
    )?;
    if !cold.converged {
        return Err(SimError::ColdStart {
            norm_f: cold.norm_f,
            iterations: cold.iterations,
        });
    }
    info!(
        "cold start: ‖F‖ = {:e} after {} Newton iterations, t_f = {}",
        cold.norm_f,
        cold.iterations,
        cold.u.p()[0]
    );

    let solver = SolverSettings {
        kind: cfg.solver,
        krylov: KrylovSettings {
            k_max: cfg.k_max,
            tol: cfg.tol,
            early_exit: cfg.early_exit,
        },
    };
    let mut engine = ContinuationEngine::new(cold.u, cfg.h, cfg.dt, solver)?;
    let pcfg = if cfg.precond {
        PrecondConfig {
            enabled: true,
            period: cfg.t_p,
            symmetrize: cfg.symmetrize,
        }
    } else {
        PrecondConfig::disabled()
    };
    let mut pstate = PrecondState::new();

    let mut records = Vec::new();
    let mut arrival_time = None;
    let mut total_map_evals = 0;
    let mut x = k.initial_state().to_vec();
    let mut step = 0usize;
    loop {
        let elapsed = step as f64 * cfg.dt;
        if elapsed >= cfg.t_end - 1e-9 * cfg.dt {
            break;
        }
        let t = k.t0 + elapsed;

        let mut rebuilt = false;
        if should_rebuild(&pcfg, &pstate, t, cfg.dt) {
            let outcome = pstate.rebuild(&problem, engine.decision(), &x, t, cfg.h, &pcfg)?;
            rebuilt = outcome == RebuildOutcome::Rebuilt;
        }
        let (u, diag) = engine.step(&problem, &x, t, &pstate)?;
        total_map_evals += diag.map_evals;
        let p = engine.decision().p()[0];
        records.push(StepRecord {
            step,
            t,
            x: x[0],
            y: x[1],
            u: u[0],
            u_d: u[1],
            p,
            norm_f: diag.norm_f,
            krylov_residual: diag.krylov_residual,
            iterations: diag.iterations,
            rebuilt,
        });

        let rate = tfc::dynamics(&k, &x, &u, 1.0);
        let predicted = [x[0] + cfg.dt * rate[0], x[1] + cfg.dt * rate[1]];
        let next = source.next_state(t, &x, &u, &predicted);

        if let Some(s) = first_entry(&x, &next, &target, cfg.stop_radius) {
            arrival_time = Some(t + s * cfg.dt);
            break;
        }
        x = next;
        step += 1;
        if p <= cfg.dt {
            break;
        }
    }

    Ok(SimResult {
        records,
        arrival_time,
        total_map_evals,
        total_rebuild_evals: pstate.evaluations(),
        decision_dim: m,
        initial_norm_f: cold.norm_f,
    })
}

/// Smallest `s ∈ [0, 1]` with `‖a + s(b − a) − c‖ ≤ r`, if any.
fn first_entry(a: &[f64], b: &[f64], c: &[f64; 2], r: f64) -> Option<f64> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let w = [a[0] - c[0], a[1] - c[1]];
    let dd = d[0] * d[0] + d[1] * d[1];
    let wd = w[0] * d[0] + w[1] * d[1];
    let ww = w[0] * w[0] + w[1] * w[1] - r * r;
    if ww <= 0.0 {
        return Some(0.0);
    }
    if dd == 0.0 {
        return None;
    }
    let disc = wd * wd - dd * ww;
    if disc < 0.0 {
        return None;
    }
    let s = (-wd - disc.sqrt()) / dd;
    (0.0..=1.0).contains(&s).then_some(s)
}
