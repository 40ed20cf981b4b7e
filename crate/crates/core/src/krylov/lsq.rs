//! Least squares with an upper Hessenberg matrix, as produced by Arnoldi.

use nalgebra::{DMatrix, DVector};

/// A `(k+1)×k` upper Hessenberg matrix stored by columns; column `j`
/// holds rows `0..=j+1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hessenberg {
    cols: Vec<Vec<f64>>,
}

impl Hessenberg {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends column `k`; `col` must have exactly `k + 2` entries.
    pub fn push_column(&mut self, col: Vec<f64>) {
        assert_eq!(
            col.len(),
            self.cols.len() + 2,
            "Hessenberg column {} must have {} entries",
            self.cols.len(),
            self.cols.len() + 2
        );
        self.cols.push(col);
    }

    /// Builds from dense rows of a `(k+1)×k` matrix; entries below the
    /// subdiagonal are ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let k = rows.len().saturating_sub(1);
        let mut h = Self::new();
        for j in 0..k {
            h.push_column(rows[..j + 2].iter().map(|r| r[j]).collect());
        }
        h
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    fn max_abs(&self) -> f64 {
        self.cols
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let k = self.ncols();
        let mut m = DMatrix::zeros(k + 1, k);
        for (j, col) in self.cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    pub y: Vec<f64>,
    /// `min ‖H·y − β·e₁‖₂`.
    pub residual: f64,
    pub rank_deficient: bool,
}

/// Incremental Givens QR of a Hessenberg matrix applied to `β·e₁`.
#[derive(Debug, Clone)]
pub(crate) struct GivensQr {
    rotations: Vec<(f64, f64)>,
    r_cols: Vec<Vec<f64>>,
    g: Vec<f64>,
}

impl GivensQr {
    pub(crate) fn new(beta: f64) -> Self {
        Self {
            rotations: Vec::new(),
            r_cols: Vec::new(),
            g: vec![beta],
        }
    }

    /// Absorbs the next Hessenberg column and returns the updated residual
    /// estimate `|g_{k+1}|`.
    pub(crate) fn push(&mut self, col: &[f64]) -> f64 {
        let k = self.r_cols.len();
        debug_assert_eq!(col.len(), k + 2);
        let mut c = col.to_vec();
        for (i, &(cs, sn)) in self.rotations.iter().enumerate() {
            let (a, b) = (c[i], c[i + 1]);
            c[i] = cs * a + sn * b;
            c[i + 1] = -sn * a + cs * b;
        }
        let (a, b) = (c[k], c[k + 1]);
        let r = a.hypot(b);
        let (cs, sn) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
        c[k] = r;
        c.pop();
        self.rotations.push((cs, sn));
        self.r_cols.push(c);
        let gk = self.g[k];
        self.g[k] = cs * gk;
        self.g.push(-sn * gk);
        self.residual()
    }

    pub(crate) fn residual(&self) -> f64 {
        self.g.last().map_or(0.0, |v| v.abs())
    }

    /// Back substitution on the triangular factor; `None` if it is
    /// numerically singular.
    pub(crate) fn solve(&self, scale: f64) -> Option<Vec<f64>> {
        let k = self.r_cols.len();
        let threshold = f64::EPSILON * (k.max(1) as f64) * scale;
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let rii = self.r_cols[i][i];
            if rii.abs() <= threshold {
                return None;
            }
            let s: f64 = (i + 1..k).map(|j| self.r_cols[j][i] * y[j]).sum();
            y[i] = (self.g[i] - s) / rii;
        }
        Some(y)
    }
}

/// Solves `min_y ‖H·y − (β, 0, …, 0)ᵀ‖₂` by Givens rotations. A rank
/// deficient `H` falls back to the minimum-norm solution via SVD.
pub fn hessenberg_lsq(h: &Hessenberg, beta: f64) -> LsqSolution {
    let mut qr = GivensQr::new(beta);
    for j in 0..h.ncols() {
        qr.push(h.column(j));
    }
    if let Some(y) = qr.solve(h.max_abs()) {
        return LsqSolution {
            y,
            residual: qr.residual(),
            rank_deficient: false,
        };
    }
    min_norm_lsq(h, beta)
}

pub(crate) fn min_norm_lsq(h: &Hessenberg, beta: f64) -> LsqSolution {
    let k = h.ncols();
    let dense = h.to_dense();
    let mut rhs = DVector::zeros(k + 1);
    rhs[0] = beta;
    let svd = dense.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * ((k + 1) as f64) * smax.max(f64::MIN_POSITIVE);
    let y = svd
        .solve(&rhs, eps)
        .map(|v| v.iter().copied().collect::<Vec<_>>())
        .unwrap_or_else(|_| vec![0.0; k]);
    let hy = &dense * DVector::from_column_slice(&y);
    let residual = (hy - rhs).norm();
    LsqSolution {
        y,
        residual,
        rank_deficient: true,
    }
}
