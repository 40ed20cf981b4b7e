//! The forward-difference operator `a(V) = (F[U + hV, x, t] − F[U, x, t]) / h`
//! and its explicit matrix.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::ocp::{DecisionVector, OcpSpec};
use super::residual::eval_residual;
use crate::error::{Error, Result};
use crate::krylov::{DenseMatrix, LinearMap};

/// Matrix-free directional difference of `F` around a fixed base point.
///
/// `F[U, x, t]` is evaluated once at construction; each [`LinearMap::apply`]
/// costs exactly one further evaluation.
pub struct FdMap<'a, S: ?Sized> {
    spec: &'a S,
    base: DecisionVector,
    x: Vec<f64>,
    t: f64,
    h: f64,
    f_base: Vec<f64>,
    evals: AtomicUsize,
}

impl<'a, S: OcpSpec + ?Sized> FdMap<'a, S> {
    pub fn new(spec: &'a S, base: &DecisionVector, x: &[f64], t: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "difference step must be positive, got {h}"
            )));
        }
        let f_base = eval_residual(spec, base, x, t)?;
        Ok(Self {
            spec,
            base: base.clone(),
            x: x.to_vec(),
            t,
            h,
            f_base,
            evals: AtomicUsize::new(0),
        })
    }

    /// `F[U, x, t]` at the base point.
    pub fn base_residual(&self) -> &[f64] {
        &self.f_base
    }

    pub fn base(&self) -> &DecisionVector {
        &self.base
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// Number of `apply` calls so far (each one is a residual evaluation).
    pub fn evaluations(&self) -> usize {
        self.evals.load(Ordering::Relaxed)
    }
}

impl<S: OcpSpec + ?Sized> LinearMap for FdMap<'_, S> {
    fn dim(&self) -> usize {
        self.f_base.len()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.f_base.len() {
            return Err(Error::Dimension {
                what: "difference direction",
                expected: self.f_base.len(),
                got: v.len(),
            });
        }
        self.evals.fetch_add(1, Ordering::Relaxed);
        let shifted = self.base.offset(self.h, v);
        let f = eval_residual(self.spec, &shifted, &self.x, self.t)?;
        Ok(f.iter()
            .zip(&self.f_base)
            .map(|(a, b)| (a - b) / self.h)
            .collect())
    }
}

fn unit(m: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[j] = 1.0;
    e
}

fn column<M: LinearMap + ?Sized>(map: &M, j: usize) -> Result<Vec<f64>> {
    map.apply(&unit(map.dim(), j)).map_err(|e| Error::Column {
        column: j,
        source: Box::new(e),
    })
}

/// Builds `A` column by column, `A·e_j = a(e_j)`, evaluating the columns
/// in parallel. Identical to [`assemble_jacobian_sequential`] bit for bit.
pub fn assemble_jacobian<M: LinearMap + Sync + ?Sized>(map: &M) -> Result<DenseMatrix> {
    let cols = (0..map.dim())
        .into_par_iter()
        .map(|j| column(map, j))
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_columns(&cols)
}

pub fn assemble_jacobian_sequential<M: LinearMap + ?Sized>(map: &M) -> Result<DenseMatrix> {
    let cols = (0..map.dim())
        .map(|j| column(map, j))
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_columns(&cols)
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    let n = a.order();
    let mut s = DenseMatrix::zeros(n);
    for i in 0..n {
        s[(i, i)] = a[(i, i)];
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::FnMap;

    #[test]
    fn symmetrize_examples() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let s = symmetrize(&a);
        assert_eq!(
            s,
            DenseMatrix::from_rows(&[[0.0, 0.5], [0.5, 0.0]]).unwrap()
        );

        let sym =
            DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 5.0, 6.0], [3.0, 6.0, 9.0]]).unwrap();
        assert_eq!(symmetrize(&sym), sym);

        let odd =
            DenseMatrix::from_rows(&[[0.1, 0.7, 0.3], [0.2, 0.5, 1e-17], [0.9, 3.0, 2.0]]).unwrap();
        let s = symmetrize(&odd);
        assert_eq!(s, s.transpose());
    }

    #[test]
    fn linear_map_is_reproduced() {
        let m =
            DenseMatrix::from_rows(&[[1.0, -2.0, 0.5], [3.0, 4.0, 0.0], [0.0, 1.5, -1.0]]).unwrap();
        assert_eq!(assemble_jacobian(&m).unwrap(), m);
        assert_eq!(assemble_jacobian_sequential(&m).unwrap(), m);
    }

    #[test]
    fn failing_column_is_reported() {
        let map = FnMap::new(3, |v: &[f64]| {
            if v[2] == 1.0 {
                vec![0.0; 2]
            } else {
                v.to_vec()
            }
        });
        match assemble_jacobian_sequential(&map) {
            Err(Error::Column { column, .. }) => assert_eq!(column, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
