//! LU preconditioner rebuilt at `t = j·t_p` and reused in between.

use log::warn;

use crate::continuation::{assemble_jacobian, symmetrize, DecisionVector, FdMap, OcpSpec};
use crate::error::{Error, Result};
use crate::krylov::{lu_factor, LuFactors, Preconditioner};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecondConfig {
    pub enabled: bool,
    /// Rebuild period `t_p` in seconds.
    pub period: f64,
    /// Factor `(A + Aᵀ)/2` instead of `A`.
    pub symmetrize: bool,
}

impl PrecondConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            period: f64::INFINITY,
            symmetrize: false,
        }
    }

    pub fn every(period: f64) -> Self {
        Self {
            enabled: true,
            period,
            symmetrize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enabled && !(self.period > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "preconditioner period must be positive, got {}",
                self.period
            )));
        }
        Ok(())
    }
}

/// Current factors and rebuild bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct PrecondState {
    factors: Option<LuFactors>,
    built_at: Option<f64>,
    rebuild_count: usize,
    /// The last rebuild failed and older factors are still in use.
    stale: bool,
    /// Operator applications spent on Jacobian columns across all rebuilds.
    evaluations: usize,
}

/// What happened at a rebuild instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RebuildOutcome {
    Rebuilt,
    /// Factorization failed; previous factors (if any) were kept.
    KeptStale,
}

impl PrecondState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> Option<&LuFactors> {
        self.factors.as_ref()
    }

    pub fn built_at(&self) -> Option<f64> {
        self.built_at
    }

    pub fn rebuild_count(&self) -> usize {
        self.rebuild_count
    }

    pub fn is_stale(&self) -> bool {
        self.stale
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Installs factors directly, e.g. from an externally computed matrix.
    pub fn install(&mut self, factors: LuFactors, t: f64) {
        self.factors = Some(factors);
        self.built_at = Some(t);
        self.rebuild_count += 1;
        self.stale = false;
    }

    /// Assembles `A` at `(U, x, t)` with step `h`, optionally symmetrizes it,
    /// and factors it. On a singular `A` the previous factors are kept and
    /// the state is marked stale; other errors propagate.
    pub fn rebuild<S: OcpSpec + ?Sized>(
        &mut self,
        spec: &S,
        u: &DecisionVector,
        x: &[f64],
        t: f64,
        h: f64,
        cfg: &PrecondConfig,
    ) -> Result<RebuildOutcome> {
        let map = FdMap::new(spec, u, x, t, h)?;
        let assembled = assemble_jacobian(&map);
        self.evaluations += map.evaluations();
        let mut a = assembled?;
        if cfg.symmetrize {
            a = symmetrize(&a);
        }
        match lu_factor(&a) {
            Ok(f) => {
                self.install(f, t);
                Ok(RebuildOutcome::Rebuilt)
            }
            Err(Error::Singular { column }) => {
                warn!("preconditioner at t = {t}: singular column {column}, keeping old factors");
                self.stale = true;
                Ok(RebuildOutcome::KeptStale)
            }
            Err(e) => Err(e),
        }
    }
}

/// True iff enabled and either nothing is built yet or
/// `t ≥ built_at + t_p − Δt/2`.
pub fn should_rebuild(cfg: &PrecondConfig, st: &PrecondState, t: f64, dt: f64) -> bool {
    if !cfg.enabled {
        return false;
    }
    match (st.factors.as_ref(), st.built_at) {
        (Some(_), Some(built)) => t >= built + cfg.period - 0.5 * dt,
        _ => true,
    }
}

/// `z = U⁻¹(L⁻¹·P·r)` when factors exist, otherwise `z = r`.
impl Preconditioner for PrecondState {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        match &self.factors {
            Some(f) => f.solve(r),
            None => r.to_vec(),
        }
    }
}
