//! Matrix-free Krylov solvers and the dense LU used as their preconditioner.
//!
//! Operators are only ever touched through [`LinearMap::apply`], so the
//! forward-difference operator of the continuation method plugs in directly.
//! Both solvers measure convergence on the preconditioned residual relative
//! to its initial value.

mod dense;
mod gmres;
mod lsq;
mod minres;

pub use dense::{axpy, dense_solve, dot, lu_factor, lu_solve, norm2, DenseMatrix, LuFactors};
pub use gmres::{gmres, Arnoldi, ArnoldiStep};
pub use lsq::{hessenberg_lsq, Hessenberg, LsqSolution};
pub use minres::minres;

use crate::error::{Error, Result};

/// A dimension-preserving, possibly mildly nonlinear, map `v ↦ a(v)`.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>>;
}

impl LinearMap for DenseMatrix {
    fn dim(&self) -> usize {
        self.order()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("operator input", self.order(), v.len())?;
        Ok(self.mul_vec(v))
    }
}

impl<T: LinearMap + ?Sized> LinearMap for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        (**self).apply(v)
    }
}

/// Adapts a closure into a [`LinearMap`].
pub struct FnMap<F> {
    dim: usize,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearMap for FnMap<F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("operator input", self.dim, v.len())?;
        let out = (self.f)(v);
        check_len("operator output", self.dim, out.len())?;
        Ok(out)
    }
}

/// Action `r ↦ T·r` of a preconditioner `T ≈ A⁻¹`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// `T = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

impl Preconditioner for LuFactors {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self.solve(r)
    }
}

impl<F> Preconditioner for F
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self(r)
    }
}

/// Iteration limits shared by both solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovSettings {
    /// Maximum number of operator applications inside the iteration.
    pub k_max: usize,
    /// Relative tolerance on the preconditioned residual.
    pub tol: f64,
    /// Stop as soon as the residual estimate drops below `tol`. When false
    /// the solver always performs `k_max` iterations (barring breakdown).
    pub early_exit: bool,
}

impl KrylovSettings {
    pub fn new(k_max: usize, tol: f64) -> Self {
        Self {
            k_max,
            tol,
            early_exit: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be non-negative, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovResult {
    pub x: Vec<f64>,
    /// Final preconditioned residual estimate (absolute).
    pub residual_norm: f64,
    /// Preconditioned residual of the initial guess.
    pub initial_residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The Krylov space became invariant (exact solution reached).
    pub breakdown: bool,
    /// The projected least-squares problem was rank deficient.
    pub rank_deficient: bool,
    /// Residual estimate after each iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
}

impl KrylovResult {
    pub fn relative_residual(&self) -> f64 {
        if self.initial_residual_norm == 0.0 {
            0.0
        } else {
            self.residual_norm / self.initial_residual_norm
        }
    }

    fn trivial(x: Vec<f64>) -> Self {
        Self {
            x,
            residual_norm: 0.0,
            initial_residual_norm: 0.0,
            iterations: 0,
            converged: true,
            breakdown: false,
            rank_deficient: false,
            residual_history: vec![0.0],
        }
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    } else {
        Ok(())
    }
}

/// `r = b - a(x0)`, skipping the operator call when `x0` is zero.
fn initial_residual<M: LinearMap + ?Sized>(map: &M, b: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
    let m = map.dim();
    check_len("right-hand side", m, b.len())?;
    check_len("initial guess", m, x0.len())?;
    if x0.iter().all(|&v| v == 0.0) {
        return Ok(b.to_vec());
    }
    let ax = map.apply(x0)?;
    check_len("operator output", m, ax.len())?;
    Ok(b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect())
}
