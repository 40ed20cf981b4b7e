//! Preconditioned MINRES (Paige-Saunders) with a three-term Lanczos
//! recurrence. Storage is a fixed set of working vectors regardless of
//! `k_max`.

use super::{axpy, check_len, dot, initial_residual};
use super::{KrylovResult, KrylovSettings, LinearMap, Preconditioner};
use crate::error::{Error, Result};

/// Solves the symmetric system `a(x) = b` with a symmetric positive definite
/// preconditioner `T`.
///
/// Residuals are measured in the `T`-norm, `‖r‖_T = sqrt(rᵀ·T·r)`, so the
/// stopping rule is `‖r_k‖_T ≤ tol·‖r_0‖_T`. A negative `rᵀ·T·r` is reported
/// as [`Error::IndefinitePreconditioner`].
pub fn minres<M, P>(
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
    let mut r1 = initial_residual(map, b, x0)?;
    let mut y = precond.apply(&r1);
    check_len("preconditioner output", m, y.len())?;
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 {
        return Err(Error::IndefinitePreconditioner { value: beta1_sq });
    }
    let beta1 = beta1_sq.sqrt();
    if beta1 == 0.0 {
        return Ok(KrylovResult::trivial(x0.to_vec()));
    }

    let mut x = x0.to_vec();
    let mut r2 = r1.clone();
    let mut w = vec![0.0; m];
    let mut w1 = vec![0.0; m];
    let mut w2 = vec![0.0; m];
    let mut v = vec![0.0; m];

    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;

    let threshold = settings.tol * beta1;
    let mut history = vec![beta1];
    let mut iterations = 0;
    let mut converged = false;
    let mut breakdown = false;

    while iterations < settings.k_max {
        iterations += 1;
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        y = map.apply(&v)?;
        check_len("operator output", m, y.len())?;
        if iterations >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alpha = dot(&v, &y);
        axpy(-alpha / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        y = precond.apply(&r2);
        check_len("preconditioner output", m, y.len())?;
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if beta_sq < 0.0 {
            return Err(Error::IndefinitePreconditioner { value: beta_sq });
        }
        beta = beta_sq.sqrt();

        // Apply the previous rotation, then build the next one.
        let oldeps = epsln;
        let delta = cs * dbar + sn * alpha;
        let gbar = sn * dbar - cs * alpha;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..m {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);

        history.push(phibar);
        if !(beta > f64::EPSILON * beta1) {
            breakdown = true;
            converged = true;
            break;
        }
        if settings.early_exit && phibar <= threshold {
            converged = true;
            break;
        }
    }
    if !converged {
        converged = phibar <= threshold;
    }

    Ok(KrylovResult {
        x,
        residual_norm: phibar,
        initial_residual_norm: beta1,
        iterations,
        converged,
        breakdown,
        rank_deficient: false,
        residual_history: history,
    })
}
