use std::path::PathBuf;

use crate::continuation::SolverKind;
use crate::tfc::TfcConstants;

/// Closed-loop simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Experiment preset the configuration was derived from, if any.
    pub case: Option<u8>,
    /// System sampling period `Δt` (s).
    pub dt: f64,
    /// Horizon steps `N`; `Δτ = 1/N`.
    pub horizon_steps: usize,
    /// Forward-difference step.
    pub h: f64,
    /// Relative Krylov tolerance.
    pub tol: f64,
    pub k_max: usize,
    pub early_exit: bool,
    pub precond: bool,
    /// Preconditioner rebuild period `t_p` (s).
    pub t_p: f64,
    pub symmetrize: bool,
    pub solver: SolverKind,
    /// Simulated time cap (s).
    pub t_end: f64,
    /// Arrival radius around the target.
    pub stop_radius: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub consts: TfcConstants,
    pub out: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            case: None,
            dt: 0.02,
            horizon_steps: 10,
            h: 1e-5,
            tol: 1e-5,
            k_max: 10,
            early_exit: true,
            precond: false,
            t_p: 0.2,
            symmetrize: false,
            solver: SolverKind::Gmres,
            t_end: 2.0,
            stop_radius: 1e-2,
            newton_tol: 1e-6,
            newton_max_iter: 50,
            consts: TfcConstants::default(),
            out: None,
        }
    }
}

impl SimConfig {
    /// The four reference experiments:
    /// 1. no preconditioning, `k_max = 10`;
    /// 2. preconditioning with `t_p = 0.2`, `k_max = 1`;
    /// 3. preconditioning with `t_p = 0.4`, `k_max = 2`;
    /// 4. preconditioning with `t_p = 0.4`, `k_max = 10`.
    pub fn preset(case: u8) -> Option<Self> {
        let base = Self {
            case: Some(case),
            ..Self::default()
        };
        let (precond, t_p, k_max) = match case {
            1 => (false, base.t_p, 10),
            2 => (true, 0.2, 1),
            3 => (true, 0.4, 2),
            4 => (true, 0.4, 10),
            _ => return None,
        };
        Some(Self {
            precond,
            t_p,
            k_max,
            ..base
        })
    }

    pub fn validate(&self) -> Result<(), String> {
        fn positive(name: &str, v: f64) -> Result<(), String> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {v}"))
            }
        }
        positive("dt", self.dt)?;
        positive("h", self.h)?;
        positive("tol", self.tol)?;
        positive("stop_radius", self.stop_radius)?;
        positive("newton_tol", self.newton_tol)?;
        if self.precond {
            positive("t_p", self.t_p)?;
        }
        if self.horizon_steps == 0 {
            return Err("N must be at least 1".into());
        }
        if self.k_max == 0 {
            return Err("k_max must be at least 1".into());
        }
        if !(self.t_end >= 0.0) {
            return Err(format!("t_end must be non-negative, got {}", self.t_end));
        }
        self.consts.validate()
    }
}
