//! Minimum-time motion to a target point with a band-constrained heading.
//!
//! State `(x, y)`, controls `(u, u_d)` where `u_d` is a slack turning the band
//! `c_u − r_u ≤ u ≤ c_u + r_u` into the equality
//! `(u − c_u)² + u_d² − r_u² = 0`, and a single parameter `p = t_f`, the time
//! to go. The horizon is normalized to `[0, 1]`, so every rate carries a
//! factor `p`.
//!
//! Multipliers use the scaled convention (`p·μ_i` replaced by `μ_i` before
//! differentiation), which keeps `p` out of the constraint rows.

use crate::continuation::{DecisionVector, OcpDims, OcpSpec, Stage};

/// Model and target constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfcConstants {
    pub a: f64,
    pub b: f64,
    /// Band center.
    pub c_u: f64,
    /// Band radius.
    pub r_u: f64,
    /// Slack weight.
    pub w_d: f64,
    pub x0: f64,
    pub y0: f64,
    pub t0: f64,
    pub x_f: f64,
    pub y_f: f64,
}

impl Default for TfcConstants {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            c_u: 0.8,
            r_u: 0.2,
            w_d: 0.005,
            x0: 0.0,
            y0: 0.0,
            t0: 0.0,
            x_f: 1.0,
            y_f: 1.0,
        }
    }
}

impl TfcConstants {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.r_u > 0.0) {
            return Err(format!(
                "band radius r_u must be positive, got {}",
                self.r_u
            ));
        }
        if !(self.w_d > 0.0) {
            return Err(format!(
                "slack weight w_d must be positive, got {}",
                self.w_d
            ));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> [f64; 2] {
        [self.x0, self.y0]
    }

    pub fn target(&self) -> [f64; 2] {
        [self.x_f, self.y_f]
    }

    fn speed(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// State rate on the normalized horizon, `p·(A·x + B)·(cos u, sin u)`.
pub fn dynamics(k: &TfcConstants, x: &[f64], u: &[f64], p: f64) -> [f64; 2] {
    let s = p * k.speed(x[0]);
    [s * u[0].cos(), s * u[0].sin()]
}

/// `(u − c_u)² + u_d² − r_u²`.
pub fn constraint(k: &TfcConstants, u: &[f64]) -> f64 {
    let du = u[0] - k.c_u;
    du * du + u[1] * u[1] - k.r_u * k.r_u
}

/// `(x − x_f, y − y_f)`.
pub fn terminal(k: &TfcConstants, x: &[f64]) -> [f64; 2] {
    [x[0] - k.x_f, x[1] - k.y_f]
}

/// Terminal cost `φ = t_f`.
pub fn terminal_cost(t_f: f64) -> f64 {
    t_f
}

/// Running cost in physical time, `L = −w_d·u_d`.
pub fn running_cost(k: &TfcConstants, u_d: f64) -> f64 {
    -k.w_d * u_d
}

/// Discrete objective `φ + Σ L·t_f·Δτ` for the given slack sequence.
pub fn objective(k: &TfcConstants, t_f: f64, slacks: &[f64], dtau: f64) -> f64 {
    terminal_cost(t_f)
        + slacks
            .iter()
            .map(|&s| running_cost(k, s) * t_f * dtau)
            .sum::<f64>()
}

/// The test problem with `N` horizon steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfcProblem {
    pub consts: TfcConstants,
    pub horizon_steps: usize,
}

impl TfcProblem {
    pub fn new(consts: TfcConstants, horizon_steps: usize) -> Self {
        Self {
            consts,
            horizon_steps,
        }
    }

    pub fn dtau(&self) -> f64 {
        1.0 / self.horizon_steps as f64
    }

    /// Deterministic starting point for the cold-start solve: heading at
    /// the band center, slack at half the radius, `t_f` equal to the
    /// straight-line distance to the target, `μ_i` chosen so the slack rows
    /// vanish, and `ν = (0.1, 0.1)`.
    pub fn initial_guess(&self) -> DecisionVector {
        let k = &self.consts;
        let mut u = DecisionVector::zeros(self.dims());
        let p = (k.x_f - k.x0).hypot(k.y_f - k.y0);
        let slack = 0.5 * k.r_u;
        for i in 0..self.horizon_steps {
            u.u_mut(i).copy_from_slice(&[k.c_u, slack]);
            u.mu_mut(i)[0] = k.w_d * p / (2.0 * slack);
        }
        u.nu_mut().copy_from_slice(&[0.1, 0.1]);
        u.p_mut()[0] = p;
        u
    }

    /// Forward recursion written out for this model.
    pub fn states(&self, u: &DecisionVector, x0: &[f64]) -> Vec<[f64; 2]> {
        let k = &self.consts;
        let dt = self.dtau();
        let p = u.p()[0];
        let mut xs = vec![[x0[0], x0[1]]];
        for i in 0..self.horizon_steps {
            let [x, y] = xs[i];
            let ui = u.u(i)[0];
            xs.push([
                x + dt * (p * (k.a * x + k.b) * ui.cos()),
                y + dt * (p * (k.a * x + k.b) * ui.sin()),
            ]);
        }
        xs
    }

    /// Backward recursion written out for this model; `λ_N = ν`.
    pub fn costates(&self, u: &DecisionVector) -> Vec<[f64; 2]> {
        let k = &self.consts;
        let dt = self.dtau();
        let p = u.p()[0];
        let n = self.horizon_steps;
        let mut lam = vec![[0.0; 2]; n + 1];
        lam[n] = [u.nu()[0], u.nu()[1]];
        for i in (0..n).rev() {
            let [l1, l2] = lam[i + 1];
            let ui = u.u(i)[0];
            lam[i] = [l1 + dt * (p * k.a * (ui.cos() * l1 + ui.sin() * l2)), l2];
        }
        lam
    }

    /// The residual rows for this model, evaluated directly from the
    /// closed-form expressions rather than through the generic callbacks.
    pub fn f_rows(
        &self,
        u: &DecisionVector,
        states: &[[f64; 2]],
        costates: &[[f64; 2]],
    ) -> Vec<f64> {
        let k = &self.consts;
        let n = self.horizon_steps;
        let dt = self.dtau();
        let p = u.p()[0];
        let mut out = Vec::with_capacity(self.dims().decision_dim());

        for i in 0..n {
            let [ui, udi] = [u.u(i)[0], u.u(i)[1]];
            let mu = u.mu(i)[0];
            let [l1, l2] = costates[i + 1];
            let speed = k.a * states[i][0] + k.b;
            out.push(dt * (p * speed * (-ui.sin() * l1 + ui.cos() * l2) + 2.0 * (ui - k.c_u) * mu));
            out.push(dt * (2.0 * mu * udi - k.w_d * p));
        }
        for i in 0..n {
            let [ui, udi] = [u.u(i)[0], u.u(i)[1]];
            out.push(dt * ((ui - k.c_u).powi(2) + udi * udi - k.r_u * k.r_u));
        }
        out.push(states[n][0] - k.x_f);
        out.push(states[n][1] - k.y_f);

        let mut sum = 0.0;
        for i in 0..n {
            let [ui, udi] = [u.u(i)[0], u.u(i)[1]];
            let [l1, l2] = costates[i + 1];
            let speed = k.a * states[i][0] + k.b;
            sum += speed * (ui.cos() * l1 + ui.sin() * l2) - k.w_d * udi;
        }
        out.push(dt * sum + 1.0);
        out
    }

    /// [`TfcProblem::f_rows`] after running both recursions from `x0`.
    pub fn residual(&self, u: &DecisionVector, x0: &[f64]) -> Vec<f64> {
        let xs = self.states(u, x0);
        let ls = self.costates(u);
        self.f_rows(u, &xs, &ls)
    }
}

impl OcpSpec for TfcProblem {
    fn dims(&self) -> OcpDims {
        OcpDims {
            n_x: 2,
            n_u: 2,
            n_c: 1,
            n_psi: 2,
            n_p: 1,
            horizon_steps: self.horizon_steps,
        }
    }

    fn dynamics(&self, _tau: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&dynamics(&self.consts, x, u, p[0]));
    }

    fn constraint(&self, _tau: f64, _x: &[f64], u: &[f64], _p: &[f64], out: &mut [f64]) {
        out[0] = constraint(&self.consts, u);
    }

    fn terminal_constraint(&self, _tau: f64, x: &[f64], _p: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&terminal(&self.consts, x));
    }

    fn terminal_cost(&self, _tau: f64, _x: &[f64], p: &[f64]) -> f64 {
        terminal_cost(p[0])
    }

    // Normalized time: the physical integrand is scaled by t_f.
    fn running_cost(&self, _tau: f64, _x: &[f64], u: &[f64], p: &[f64]) -> f64 {
        p[0] * running_cost(&self.consts, u[1])
    }

    fn terminal_cost_x(&self, _tau: f64, _x: &[f64], _p: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn terminal_cost_p(&self, _tau: f64, _x: &[f64], _p: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn terminal_constraint_x_adjoint(
        &self,
        _tau: f64,
        _x: &[f64],
        _p: &[f64],
        nu: &[f64],
        out: &mut [f64],
    ) {
        out.copy_from_slice(nu);
    }

    fn terminal_constraint_p_adjoint(
        &self,
        _tau: f64,
        _x: &[f64],
        _p: &[f64],
        _nu: &[f64],
        out: &mut [f64],
    ) {
        out[0] = 0.0;
    }

    fn hamiltonian_u(&self, s: &Stage<'_>, out: &mut [f64]) {
        let k = &self.consts;
        let (u, ud, p, mu) = (s.u[0], s.u[1], s.p[0], s.mu[0]);
        let speed = k.speed(s.x[0]);
        out[0] =
            p * speed * (-u.sin() * s.lambda[0] + u.cos() * s.lambda[1]) + 2.0 * (u - k.c_u) * mu;
        out[1] = -k.w_d * p + 2.0 * mu * ud;
    }

    fn hamiltonian_x(&self, s: &Stage<'_>, out: &mut [f64]) {
        let k = &self.consts;
        let (u, p) = (s.u[0], s.p[0]);
        out[0] = p * k.a * (u.cos() * s.lambda[0] + u.sin() * s.lambda[1]);
        out[1] = 0.0;
    }

    fn hamiltonian_p(&self, s: &Stage<'_>, out: &mut [f64]) {
        let k = &self.consts;
        let u = s.u[0];
        out[0] =
            -k.w_d * s.u[1] + k.speed(s.x[0]) * (u.cos() * s.lambda[0] + u.sin() * s.lambda[1]);
    }
}
