//! Per-step continuation update and the cold-start Newton solve.

use log::{debug, warn};

use super::fdmap::{assemble_jacobian, FdMap};
use super::ocp::{DecisionVector, OcpSpec};
use super::residual::eval_residual;
use crate::error::{Error, Result};
use crate::krylov::{
    dense_solve, gmres, minres, norm2, KrylovResult, KrylovSettings, Preconditioner,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Gmres,
    Minres,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Gmres => "gmres",
            SolverKind::Minres => "minres",
        })
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gmres" => Ok(SolverKind::Gmres),
            "minres" => Ok(SolverKind::Minres),
            other => Err(format!(
                "unknown solver '{other}' (expected gmres or minres)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub kind: SolverKind,
    pub krylov: KrylovSettings,
}

/// Diagnostics of one continuation step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step_index: usize,
    /// `‖F[U_{i-1}, x_i, t_i]‖₂` before the update.
    pub norm_f: f64,
    /// Relative preconditioned residual at solver exit.
    pub krylov_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The solver failed; the update fell back to `ΔU = 0`.
    pub degraded: bool,
    /// Residual evaluations spent by the solver (excluding the base point).
    pub map_evals: usize,
}

/// Tracks `U(t)` across system time steps.
#[derive(Debug, Clone)]
pub struct ContinuationEngine {
    u: DecisionVector,
    /// Forward-difference step.
    pub h: f64,
    /// System sampling period.
    pub dt: f64,
    step_index: usize,
    pub solver: SolverSettings,
}

impl ContinuationEngine {
    pub fn new(u: DecisionVector, h: f64, dt: f64, solver: SolverSettings) -> Result<Self> {
        if !(h > 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "h and dt must be positive (h = {h}, dt = {dt})"
            )));
        }
        if h < 1e-8 {
            warn!("difference step h = {h:e} is below 1e-8; cancellation will dominate");
        }
        Ok(Self {
            u,
            h,
            dt,
            step_index: 0,
            solver,
        })
    }

    pub fn decision(&self) -> &DecisionVector {
        &self.u
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// First control block of the current `U`.
    pub fn control(&self) -> &[f64] {
        self.u.u(0)
    }

    /// One update `U_i = U_{i-1} + ΔU_i` where `ΔU_i = h·W` and `W` solves
    /// `a_i(W) = −F[U_{i-1}, x_i, t_i] / h` from `W = 0`.
    ///
    /// Only a failure to evaluate `F` at the base point is an error. Solver
    /// failures leave `U` unchanged and set `degraded`.
    pub fn step<S, P>(
        &mut self,
        spec: &S,
        x: &[f64],
        t: f64,
        precond: &P,
    ) -> Result<(Vec<f64>, StepDiagnostics)>
    where
        S: OcpSpec + ?Sized,
        P: Preconditioner + ?Sized,
    {
        let map = FdMap::new(spec, &self.u, x, t, self.h)?;
        let f = map.base_residual();
        let norm_f = norm2(f);
        let rhs: Vec<f64> = f.iter().map(|v| -v / self.h).collect();
        let w0 = vec![0.0; rhs.len()];

        let solved: Result<KrylovResult> = match self.solver.kind {
            SolverKind::Gmres => gmres(&map, precond, &rhs, &w0, &self.solver.krylov),
            SolverKind::Minres => minres(&map, precond, &rhs, &w0, &self.solver.krylov),
        };

        let mut diag = StepDiagnostics {
            step_index: self.step_index,
            norm_f,
            krylov_residual: f64::NAN,
            iterations: 0,
            converged: false,
            degraded: false,
            map_evals: map.evaluations(),
        };
        match solved {
            Ok(res) if res.x.iter().all(|v| v.is_finite()) => {
                diag.krylov_residual = res.relative_residual();
                diag.iterations = res.iterations;
                diag.converged = res.converged;
                diag.degraded = res.rank_deficient;
                self.u = self.u.offset(self.h, &res.x);
            }
            Ok(res) => {
                warn!(
                    "step {}: solver returned a non-finite update",
                    self.step_index
                );
                diag.iterations = res.iterations;
                diag.degraded = true;
            }
            Err(e) => {
                warn!("step {}: linear solve failed: {e}", self.step_index);
                diag.degraded = true;
            }
        }
        diag.map_evals = map.evaluations();
        self.step_index += 1;
        Ok((self.u.u(0).to_vec(), diag))
    }
}

/// Result of the cold-start Newton iteration.
#[derive(Debug, Clone)]
pub struct InitialSolution {
    pub u: DecisionVector,
    pub norm_f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual evaluations spent, including Jacobian columns.
    pub evaluations: usize,
}

/// Settings of the cold-start Newton iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Difference step for the Jacobian columns.
    pub h: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50,
            h: 1e-5,
        }
    }
}

const MAX_HALVINGS: usize = 20;

/// Damped Newton on `F[U, x0, t0] = 0` with a forward-difference Jacobian,
/// a direct solve and step halving on `‖F‖`.
///
/// Stops when `‖F‖ ≤ tol`, after `max_iter` iterations, or when no halved
/// step decreases `‖F‖`. A singular Jacobian is retried once with a
/// diagonal shift of `1e-10·‖A‖_F`.
pub fn initial_solve<S: OcpSpec + ?Sized>(
    spec: &S,
    x0: &[f64],
    t0: f64,
    guess: &DecisionVector,
    settings: &NewtonSettings,
) -> Result<InitialSolution> {
    let mut u = guess.clone();
    let mut f = eval_residual(spec, &u, x0, t0)?;
    let mut norm_f = norm2(&f);
    let mut evaluations = 1;
    let mut iterations = 0;

    while norm_f > settings.tol && iterations < settings.max_iter {
        let map = FdMap::new(spec, &u, x0, t0, settings.h)?;
        let a = assemble_jacobian(&map)?;
        evaluations += 1 + map.evaluations();
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = match dense_solve(&a, &rhs) {
            Ok(d) => d,
            Err(Error::Singular { column }) => {
                warn!("cold start: singular Jacobian (column {column}), retrying with a shift");
                let shift = 1e-10 * a.frobenius_norm();
                dense_solve(&a.shifted(shift), &rhs).map_err(|_| {
                    Error::InvalidArgument(format!(
                        "cold start: Jacobian singular after shift; best ‖F‖ = {norm_f:e}"
                    ))
                })?
            }
            Err(e) => return Err(e),
        };

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = u.offset(alpha, &delta);
            evaluations += 1;
            if let Ok(ft) = eval_residual(spec, &trial, x0, t0) {
                let nt = norm2(&ft);
                if nt < norm_f {
                    accepted = Some((trial, ft, nt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, ft, nt)) => {
                debug!("cold start {iterations}: ‖F‖ = {nt:e}, step {alpha}");
                u = trial;
                f = ft;
                norm_f = nt;
            }
            None => {
                warn!("cold start: line search stalled at ‖F‖ = {norm_f:e}");
                break;
            }
        }
    }

    Ok(InitialSolution {
        u,
        norm_f,
        iterations,
        converged: norm_f <= settings.tol,
        evaluations,
    })
}
