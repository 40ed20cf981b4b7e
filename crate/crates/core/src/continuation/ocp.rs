//! Problem definition and the stacked decision vector.

use crate::error::{Error, Result};

/// Dimensions of a discretized optimal control problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OcpDims {
    pub n_x: usize,
    pub n_u: usize,
    /// Equality constraints per stage.
    pub n_c: usize,
    /// Terminal constraints.
    pub n_psi: usize,
    /// Free parameters.
    pub n_p: usize,
    /// Horizon steps.
    pub horizon_steps: usize,
}

impl OcpDims {
    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_u == 0 || self.horizon_steps == 0 {
            return Err(Error::InvalidArgument(format!(
                "n_x, n_u and the horizon step count must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// `m = N·(n_u + n_c) + n_psi + n_p`.
    pub fn decision_dim(&self) -> usize {
        self.horizon_steps * (self.n_u + self.n_c) + self.n_psi + self.n_p
    }

    fn mu_offset(&self) -> usize {
        self.horizon_steps * self.n_u
    }

    fn nu_offset(&self) -> usize {
        self.horizon_steps * (self.n_u + self.n_c)
    }

    fn p_offset(&self) -> usize {
        self.nu_offset() + self.n_psi
    }
}

/// Arguments of the Hamiltonian `H = L + λᵀf + μᵀC` at one horizon stage.
#[derive(Debug, Clone, Copy)]
pub struct Stage<'a> {
    pub tau: f64,
    pub x: &'a [f64],
    /// Costate `λ_{i+1}`.
    pub lambda: &'a [f64],
    pub u: &'a [f64],
    pub mu: &'a [f64],
    pub p: &'a [f64],
}

/// A continuous-time optimal control problem with a terminal constraint and
/// free parameters, together with the analytic partial derivatives needed to
/// form the optimality residual.
///
/// Every `out` slice is overwritten and has the length implied by
/// [`OcpSpec::dims`].
pub trait OcpSpec: Sync {
    fn dims(&self) -> OcpDims;

    /// Length `T` of the prediction horizon; `Δτ = T / N`.
    fn horizon_length(&self) -> f64 {
        1.0
    }

    /// State rate `f(τ, x, u, p)`.
    fn dynamics(&self, tau: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]);
    /// Equality constraint `C(τ, x, u, p)`.
    fn constraint(&self, tau: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]);
    /// Terminal constraint `ψ(τ, x, p)`.
    fn terminal_constraint(&self, tau: f64, x: &[f64], p: &[f64], out: &mut [f64]);
    /// Terminal cost `φ(τ, x, p)`.
    fn terminal_cost(&self, tau: f64, x: &[f64], p: &[f64]) -> f64;
    /// Running cost `L(τ, x, u, p)`.
    fn running_cost(&self, tau: f64, x: &[f64], u: &[f64], p: &[f64]) -> f64;

    /// `φ_xᵀ`.
    fn terminal_cost_x(&self, tau: f64, x: &[f64], p: &[f64], out: &mut [f64]);
    /// `φ_pᵀ`.
    fn terminal_cost_p(&self, tau: f64, x: &[f64], p: &[f64], out: &mut [f64]);
    /// `ψ_xᵀ·ν`.
    fn terminal_constraint_x_adjoint(
        &self,
        tau: f64,
        x: &[f64],
        p: &[f64],
        nu: &[f64],
        out: &mut [f64],
    );
    /// `ψ_pᵀ·ν`.
    fn terminal_constraint_p_adjoint(
        &self,
        tau: f64,
        x: &[f64],
        p: &[f64],
        nu: &[f64],
        out: &mut [f64],
    );

    /// `H_uᵀ`.
    fn hamiltonian_u(&self, stage: &Stage<'_>, out: &mut [f64]);
    /// `H_xᵀ`.
    fn hamiltonian_x(&self, stage: &Stage<'_>, out: &mut [f64]);
    /// `H_pᵀ`.
    fn hamiltonian_p(&self, stage: &Stage<'_>, out: &mut [f64]);
}

/// `U = [u_0, …, u_{N-1}, μ_0, …, μ_{N-1}, ν, p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVector {
    dims: OcpDims,
    data: Vec<f64>,
}

impl DecisionVector {
    pub fn zeros(dims: OcpDims) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.decision_dim()],
        }
    }

    pub fn from_vec(dims: OcpDims, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.decision_dim() {
            return Err(Error::Dimension {
                what: "decision vector",
                expected: dims.decision_dim(),
                got: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> OcpDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn u(&self, i: usize) -> &[f64] {
        let n = self.dims.n_u;
        &self.data[i * n..(i + 1) * n]
    }

    pub fn u_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.dims.n_u;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn mu(&self, i: usize) -> &[f64] {
        let (o, n) = (self.dims.mu_offset(), self.dims.n_c);
        &self.data[o + i * n..o + (i + 1) * n]
    }

    pub fn mu_mut(&mut self, i: usize) -> &mut [f64] {
        let (o, n) = (self.dims.mu_offset(), self.dims.n_c);
        &mut self.data[o + i * n..o + (i + 1) * n]
    }

    pub fn nu(&self) -> &[f64] {
        let o = self.dims.nu_offset();
        &self.data[o..o + self.dims.n_psi]
    }

    pub fn nu_mut(&mut self) -> &mut [f64] {
        let o = self.dims.nu_offset();
        &mut self.data[o..o + self.dims.n_psi]
    }

    pub fn p(&self) -> &[f64] {
        let o = self.dims.p_offset();
        &self.data[o..o + self.dims.n_p]
    }

    pub fn p_mut(&mut self) -> &mut [f64] {
        let o = self.dims.p_offset();
        &mut self.data[o..o + self.dims.n_p]
    }

    /// `self + alpha·dir`.
    pub fn offset(&self, alpha: f64, dir: &[f64]) -> Self {
        assert_eq!(dir.len(), self.data.len(), "direction length mismatch");
        Self {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(dir)
                .map(|(a, d)| a + alpha * d)
                .collect(),
        }
    }
}
