//! Forward/backward horizon recursions and the optimality residual
//! `F[U, x, t]`.

use super::ocp::{DecisionVector, OcpSpec, Stage};
use crate::error::{Error, Result};

/// States `x_0..=x_N` and costates `λ_0..=λ_N` on the horizon grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonTrajectory {
    pub states: Vec<Vec<f64>>,
    pub costates: Vec<Vec<f64>>,
    pub dtau: f64,
    /// Stage times `τ_i = t + i·Δτ`.
    pub taus: Vec<f64>,
}

fn check_dims<S: OcpSpec + ?Sized>(spec: &S, u: &DecisionVector, x0: &[f64]) -> Result<()> {
    let dims = spec.dims();
    dims.validate()?;
    if u.dims() != dims {
        return Err(Error::InvalidArgument(format!(
            "decision vector layout {:?} does not match problem {:?}",
            u.dims(),
            dims
        )));
    }
    if x0.len() != dims.n_x {
        return Err(Error::Dimension {
            what: "initial state",
            expected: dims.n_x,
            got: x0.len(),
        });
    }
    Ok(())
}

fn stage_times<S: OcpSpec + ?Sized>(spec: &S, t: f64) -> (f64, Vec<f64>) {
    let n = spec.dims().horizon_steps;
    let dtau = spec.horizon_length() / n as f64;
    (dtau, (0..=n).map(|i| t + i as f64 * dtau).collect())
}

fn forward(
    spec: &(impl OcpSpec + ?Sized),
    x0: &[f64],
    u: &DecisionVector,
    dtau: f64,
    taus: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let dims = spec.dims();
    let mut states = Vec::with_capacity(dims.horizon_steps + 1);
    states.push(x0.to_vec());
    let mut rate = vec![0.0; dims.n_x];
    for i in 0..dims.horizon_steps {
        let xi = &states[i];
        spec.dynamics(taus[i], xi, u.u(i), u.p(), &mut rate);
        let next: Vec<f64> = xi.iter().zip(&rate).map(|(x, f)| x + f * dtau).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                what: "state",
                step: i + 1,
            });
        }
        states.push(next);
    }
    Ok(states)
}

/// `x_{i+1} = x_i + f(τ_i, x_i, u_i, p)·Δτ` with `x_0 = x0`.
pub fn forward_states<S: OcpSpec + ?Sized>(
    spec: &S,
    x0: &[f64],
    u: &DecisionVector,
    t: f64,
) -> Result<Vec<Vec<f64>>> {
    check_dims(spec, u, x0)?;
    let (dtau, taus) = stage_times(spec, t);
    forward(spec, x0, u, dtau, &taus)
}

fn backward(
    spec: &(impl OcpSpec + ?Sized),
    states: &[Vec<f64>],
    u: &DecisionVector,
    dtau: f64,
    taus: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let dims = spec.dims();
    let n = dims.horizon_steps;
    let mut costates = vec![vec![0.0; dims.n_x]; n + 1];

    let mut lam_n = vec![0.0; dims.n_x];
    let mut tmp = vec![0.0; dims.n_x];
    spec.terminal_cost_x(taus[n], &states[n], u.p(), &mut lam_n);
    spec.terminal_constraint_x_adjoint(taus[n], &states[n], u.p(), u.nu(), &mut tmp);
    for (l, t) in lam_n.iter_mut().zip(&tmp) {
        *l += t;
    }
    if lam_n.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged {
            what: "costate",
            step: n,
        });
    }
    costates[n] = lam_n;

    for i in (0..n).rev() {
        let stage = Stage {
            tau: taus[i],
            x: &states[i],
            lambda: &costates[i + 1],
            u: u.u(i),
            mu: u.mu(i),
            p: u.p(),
        };
        spec.hamiltonian_x(&stage, &mut tmp);
        let li: Vec<f64> = costates[i + 1]
            .iter()
            .zip(&tmp)
            .map(|(l, hx)| l + hx * dtau)
            .collect();
        if li.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                what: "costate",
                step: i,
            });
        }
        costates[i] = li;
    }
    Ok(costates)
}

/// `λ_N = φ_xᵀ + ψ_xᵀ·ν`, then `λ_i = λ_{i+1} + H_xᵀ(τ_i, x_i, λ_{i+1}, u_i, μ_i, p)·Δτ`.
pub fn backward_costates<S: OcpSpec + ?Sized>(
    spec: &S,
    states: &[Vec<f64>],
    u: &DecisionVector,
    t: f64,
) -> Result<Vec<Vec<f64>>> {
    let dims = spec.dims();
    if states.len() != dims.horizon_steps + 1 {
        return Err(Error::Dimension {
            what: "state trajectory",
            expected: dims.horizon_steps + 1,
            got: states.len(),
        });
    }
    check_dims(spec, u, &states[0])?;
    let (dtau, taus) = stage_times(spec, t);
    backward(spec, states, u, dtau, &taus)
}

/// Runs both recursions.
pub fn horizon_trajectory<S: OcpSpec + ?Sized>(
    spec: &S,
    u: &DecisionVector,
    x0: &[f64],
    t: f64,
) -> Result<HorizonTrajectory> {
    check_dims(spec, u, x0)?;
    let (dtau, taus) = stage_times(spec, t);
    let states = forward(spec, x0, u, dtau, &taus)?;
    let costates = backward(spec, &states, u, dtau, &taus)?;
    Ok(HorizonTrajectory {
        states,
        costates,
        dtau,
        taus,
    })
}

/// Evaluates `F[U, x, t]`, stacked as
/// `[H_uᵀ·Δτ (i = 0..N), C·Δτ (i = 0..N), ψ(x_N), φ_pᵀ + ψ_pᵀ·ν + Σ H_pᵀ·Δτ]`.
pub fn eval_residual<S: OcpSpec + ?Sized>(
    spec: &S,
    u: &DecisionVector,
    x0: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let traj = horizon_trajectory(spec, u, x0, t)?;
    Ok(stack_residual(spec, u, &traj))
}

fn stack_residual<S: OcpSpec + ?Sized>(
    spec: &S,
    u: &DecisionVector,
    traj: &HorizonTrajectory,
) -> Vec<f64> {
    let dims = spec.dims();
    let n = dims.horizon_steps;
    let dtau = traj.dtau;
    let mut out = vec![0.0; dims.decision_dim()];
    let mut hp_sum = vec![0.0; dims.n_p];
    let mut hp = vec![0.0; dims.n_p];

    let (u_rows, rest) = out.split_at_mut(n * dims.n_u);
    let (c_rows, rest) = rest.split_at_mut(n * dims.n_c);
    let (psi_row, p_row) = rest.split_at_mut(dims.n_psi);

    for i in 0..n {
        let stage = Stage {
            tau: traj.taus[i],
            x: &traj.states[i],
            lambda: &traj.costates[i + 1],
            u: u.u(i),
            mu: u.mu(i),
            p: u.p(),
        };
        let hu = &mut u_rows[i * dims.n_u..(i + 1) * dims.n_u];
        spec.hamiltonian_u(&stage, hu);
        hu.iter_mut().for_each(|v| *v *= dtau);

        let c = &mut c_rows[i * dims.n_c..(i + 1) * dims.n_c];
        spec.constraint(stage.tau, stage.x, stage.u, stage.p, c);
        c.iter_mut().for_each(|v| *v *= dtau);

        spec.hamiltonian_p(&stage, &mut hp);
        for (s, v) in hp_sum.iter_mut().zip(&hp) {
            *s += v * dtau;
        }
    }

    let tau_n = traj.taus[n];
    let x_n = &traj.states[n];
    spec.terminal_constraint(tau_n, x_n, u.p(), psi_row);

    spec.terminal_cost_p(tau_n, x_n, u.p(), p_row);
    spec.terminal_constraint_p_adjoint(tau_n, x_n, u.p(), u.nu(), &mut hp);
    for ((r, a), b) in p_row.iter_mut().zip(&hp).zip(&hp_sum) {
        *r += a + b;
    }
    out
}
