//! Preconditioned GMRES without restarts.

use super::lsq::{min_norm_lsq, GivensQr, Hessenberg};
use super::{axpy, check_len, dot, initial_residual, norm2};
use super::{KrylovResult, KrylovSettings, LinearMap, Preconditioner};
use crate::error::Result;

/// Arnoldi process on the preconditioned operator `v ↦ T·a(v)` using
/// classical Gram-Schmidt.
pub struct Arnoldi<'a, M: ?Sized, P: ?Sized> {
    map: &'a M,
    precond: &'a P,
    basis: Vec<Vec<f64>>,
    hessenberg: Hessenberg,
    beta: f64,
}

/// Outcome of one Arnoldi step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArnoldiStep {
    Extended {
        subdiagonal: f64,
    },
    /// The new direction vanished relative to `β`; the basis is not extended.
    Breakdown {
        subdiagonal: f64,
    },
}

impl<'a, M, P> Arnoldi<'a, M, P>
where
    M: LinearMap + ?Sized,
    P: Preconditioner + ?Sized,
{
    /// Starts from the preconditioned residual `z0`, which must be nonzero.
    pub fn new(map: &'a M, precond: &'a P, z0: &[f64]) -> Self {
        let beta = norm2(z0);
        assert!(beta > 0.0, "Arnoldi start vector must be nonzero");
        Self {
            map,
            precond,
            basis: vec![z0.iter().map(|v| v / beta).collect()],
            hessenberg: Hessenberg::new(),
            beta,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Orthonormal basis vectors built so far (`k + 1` after `k` extended steps).
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn hessenberg(&self) -> &Hessenberg {
        &self.hessenberg
    }

    pub fn step(&mut self) -> Result<ArnoldiStep> {
        let k = self.hessenberg.ncols();
        let m = self.map.dim();
        let r = self.map.apply(&self.basis[k])?;
        check_len("operator output", m, r.len())?;
        let mut z = self.precond.apply(&r);
        check_len("preconditioner output", m, z.len())?;

        let mut col: Vec<f64> = self.basis.iter().map(|v| dot(v, &z)).collect();
        for (v, &hik) in self.basis.iter().zip(&col) {
            axpy(-hik, v, &mut z);
        }
        let sub = norm2(&z);
        col.push(sub);
        self.hessenberg.push_column(col);

        if !(sub > f64::EPSILON * self.beta) {
            return Ok(ArnoldiStep::Breakdown { subdiagonal: sub });
        }
        self.basis.push(z.into_iter().map(|v| v / sub).collect());
        Ok(ArnoldiStep::Extended { subdiagonal: sub })
    }
}

/// Solves `a(x) = b` with preconditioner `T`, starting from `x0`.
///
/// Runs at most `k_max` Arnoldi steps on `T·a(·)` and returns
/// `x = x0 + V·y` where `y` minimises the preconditioned residual over the
/// Krylov space. With `early_exit` set, the loop stops once the Givens
/// residual estimate is at most `tol·‖T(b − a(x0))‖`. When `x0` is zero the
/// operator is not evaluated for the initial residual.
pub fn gmres<M, P>(
    map: &M,
    precond: &P,
    b: &[f64],
    x0: &[f64],
    settings: &KrylovSettings,
) -> Result<KrylovResult>
where
    M: LinearMap + ?Sized,
    P: Preconditioner + ?Sized,
{
    settings.validate()?;
    let m = map.dim();
    let r0 = initial_residual(map, b, x0)?;
    let z0 = precond.apply(&r0);
    check_len("preconditioner output", m, z0.len())?;
    let beta = norm2(&z0);
    if beta == 0.0 {
        return Ok(KrylovResult::trivial(x0.to_vec()));
    }

    let mut arnoldi = Arnoldi::new(map, precond, &z0);
    let mut qr = GivensQr::new(beta);
    let mut history = vec![beta];
    let mut breakdown = false;
    let mut converged = false;
    let threshold = settings.tol * beta;

    for _ in 0..settings.k_max {
        let step = arnoldi.step()?;
        let k = arnoldi.hessenberg().ncols();
        let resid = qr.push(arnoldi.hessenberg().column(k - 1));
        history.push(resid);
        if let ArnoldiStep::Breakdown { .. } = step {
            breakdown = true;
            converged = true;
            break;
        }
        if settings.early_exit && resid <= threshold {
            converged = true;
            break;
        }
    }

    let iterations = arnoldi.hessenberg().ncols();
    let hmax = (0..iterations)
        .flat_map(|j| arnoldi.hessenberg().column(j).iter())
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    let (y, residual_norm, rank_deficient) = match qr.solve(hmax) {
        Some(y) => (y, qr.residual(), false),
        None => {
            let s = min_norm_lsq(arnoldi.hessenberg(), beta);
            (s.y, s.residual, true)
        }
    };
    if rank_deficient || !converged {
        converged = residual_norm <= threshold;
    }

    let mut x = x0.to_vec();
    for (v, &yj) in arnoldi.basis().iter().zip(&y) {
        axpy(yj, v, &mut x);
    }
    Ok(KrylovResult {
        x,
        residual_norm,
        initial_residual_norm: beta,
        iterations,
        converged,
        breakdown,
        rank_deficient,
        residual_history: history,
    })
}
