#![allow(dead_code)]

use cnmpc::continuation::{DecisionVector, OcpDims, OcpSpec, Stage};
use cnmpc::krylov::DenseMatrix;
use cnmpc::tfc::TfcConstants;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Linear dynamics `f = (x₂, u₁)`, quadratic costs and a linear stage
/// constraint `u₂ − 0.3`, so `F` is affine in `U`. With `degenerate` the
/// stage constraint is identically zero and the Jacobian is singular.
#[derive(Debug, Clone, Copy)]
pub struct Affine {
    pub horizon_steps: usize,
    pub degenerate: bool,
}

impl Affine {
    pub fn new(horizon_steps: usize) -> Self {
        Self {
            horizon_steps,
            degenerate: false,
        }
    }
}

impl OcpSpec for Affine {
    fn dims(&self) -> OcpDims {
        OcpDims {
            n_x: 2,
            n_u: 2,
            n_c: 1,
            n_psi: 1,
            n_p: 0,
            horizon_steps: self.horizon_steps,
        }
    }

    fn dynamics(&self, _tau: f64, x: &[f64], u: &[f64], _p: &[f64], out: &mut [f64]) {
        out[0] = x[1];
        out[1] = u[0];
    }

    fn constraint(&self, _tau: f64, _x: &[f64], u: &[f64], _p: &[f64], out: &mut [f64]) {
        out[0] = if self.degenerate { 0.0 } else { u[1] - 0.3 };
    }

    fn terminal_constraint(&self, _tau: f64, x: &[f64], _p: &[f64], out: &mut [f64]) {
        out[0] = x[0] - 1.0;
    }

    fn terminal_cost(&self, _tau: f64, x: &[f64], _p: &[f64]) -> f64 {
        0.5 * (x[0] * x[0] + x[1] * x[1])
    }

    fn running_cost(&self, _tau: f64, x: &[f64], u: &[f64], _p: &[f64]) -> f64 {
        0.5 * (x[0] * x[0] + x[1] * x[1] + u[0] * u[0] + u[1] * u[1])
    }

    fn terminal_cost_x(&self, _tau: f64, x: &[f64], _p: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn terminal_cost_p(&self, _tau: f64, _x: &[f64], _p: &[f64], _out: &mut [f64]) {}

    fn terminal_constraint_x_adjoint(
        &self,
        _tau: f64,
        _x: &[f64],
        _p: &[f64],
        nu: &[f64],
        out: &mut [f64],
    ) {
        out[0] = nu[0];
        out[1] = 0.0;
    }

    fn terminal_constraint_p_adjoint(
        &self,
        _tau: f64,
        _x: &[f64],
        _p: &[f64],
        _nu: &[f64],
        _out: &mut [f64],
    ) {
    }

    fn hamiltonian_u(&self, s: &Stage<'_>, out: &mut [f64]) {
        let c_u = if self.degenerate { 0.0 } else { 1.0 };
        out[0] = s.u[0] + s.lambda[1];
        out[1] = s.u[1] + c_u * s.mu[0];
    }

    fn hamiltonian_x(&self, s: &Stage<'_>, out: &mut [f64]) {
        out[0] = s.x[0];
        out[1] = s.x[1] + s.lambda[0];
    }

    fn hamiltonian_p(&self, _s: &Stage<'_>, _out: &mut [f64]) {}
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// A TfC decision vector near the feasible region.
pub fn random_tfc_point(rng: &mut ChaCha8Rng, dims: OcpDims) -> DecisionVector {
    let mut u = DecisionVector::zeros(dims);
    for i in 0..dims.horizon_steps {
        u.u_mut(i)[0] = rng.gen_range(0.5..1.1);
        u.u_mut(i)[1] = rng.gen_range(0.02..0.25);
        u.mu_mut(i)[0] = rng.gen_range(0.0..0.1);
    }
    u.nu_mut()[0] = rng.gen_range(-1.0..1.0);
    u.nu_mut()[1] = rng.gen_range(-1.0..1.0);
    u.p_mut()[0] = rng.gen_range(0.3..2.0);
    u
}

/// Reduced Lagrangian of the TfC problem on the normalized horizon,
/// `t_f + Σ (−w_d·t_f·u_d + μ·C)·Δτ + νᵀψ(x_N)`, with the states from
/// forward Euler.
pub fn tfc_lagrangian(k: &TfcConstants, n: usize, z: &[f64], x0: [f64; 2]) -> f64 {
    let dtau = 1.0 / n as f64;
    let tf = z[3 * n + 2];
    let (nu1, nu2) = (z[3 * n], z[3 * n + 1]);
    let (mut x, mut y) = (x0[0], x0[1]);
    let mut total = tf;
    for i in 0..n {
        let (heading, slack, mu) = (z[2 * i], z[2 * i + 1], z[2 * n + i]);
        let c = (heading - k.c_u).powi(2) + slack * slack - k.r_u * k.r_u;
        total += (-k.w_d * tf * slack + mu * c) * dtau;
        let v = tf * (k.a * x + k.b);
        x += v * heading.cos() * dtau;
        y += v * heading.sin() * dtau;
    }
    total + nu1 * (x - k.x_f) + nu2 * (y - k.y_f)
}

/// Central-difference gradient with step `d`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, z: &[f64], d: f64) -> Vec<f64> {
    let mut zp = z.to_vec();
    (0..z.len())
        .map(|j| {
            zp[j] = z[j] + d;
            let up = f(&zp);
            zp[j] = z[j] - d;
            let dn = f(&zp);
            zp[j] = z[j];
            (up - dn) / (2.0 * d)
        })
        .collect()
}

/// Central-difference Jacobian of a vector function, column by column.
pub fn central_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, z: &[f64], d: f64) -> DenseMatrix {
    let mut zp = z.to_vec();
    let cols: Vec<Vec<f64>> = (0..z.len())
        .map(|j| {
            zp[j] = z[j] + d;
            let up = f(&zp);
            zp[j] = z[j] - d;
            let dn = f(&zp);
            zp[j] = z[j];
            up.iter()
                .zip(&dn)
                .map(|(a, b)| (a - b) / (2.0 * d))
                .collect()
        })
        .collect();
    DenseMatrix::from_columns(&cols).unwrap()
}

/// Symmetric `Q·diag(σ)·Qᵀ` with eigenvalues spread over `[1, κ]` and
/// random signs when `indefinite`.
pub fn random_symmetric(
    rng: &mut ChaCha8Rng,
    n: usize,
    kappa: f64,
    indefinite: bool,
) -> DenseMatrix {
    let g = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            let s = if n == 1 {
                1.0
            } else {
                kappa.powf(i as f64 / (n - 1) as f64)
            };
            if indefinite && rng.gen_bool(0.5) {
                -s
            } else {
                s
            }
        })
        .collect();
    let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sigma));
    let a = &q * d * q.transpose();
    let mut out = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            // exact symmetry
            out[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
