//! Small dense matrices and LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    order: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row slices. All rows must have length `rows.len()`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let order = rows.len();
        let mut data = Vec::with_capacity(order * order);
        for row in rows {
            let row = row.as_ref();
            if row.len() != order {
                return Err(Error::Dimension {
                    what: "matrix row",
                    expected: order,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { order, data })
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let order = cols.len();
        let mut m = Self::zeros(order);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != order {
                return Err(Error::Dimension {
                    what: "matrix column",
                    expected: order,
                    got: col.len(),
                });
            }
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn transpose(&self) -> Self {
        let n = self.order;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order, "matrix-vector dimension mismatch");
        (0..self.order).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.order, other.order, "matrix product dimension mismatch");
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.order, other.order);
        DenseMatrix {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Returns a copy with `shift` added to every diagonal entry.
    pub fn shifted(&self, shift: f64) -> DenseMatrix {
        let mut out = self.clone();
        for i in 0..self.order {
            out[(i, i)] += shift;
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.order + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.order + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `P·A = L·U` with `L` unit lower triangular, stored compactly.
///
/// Row `i` of `P·A` is row `perm[i]` of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactors {
    perm: Vec<usize>,
    lu: DenseMatrix,
}

impl LuFactors {
    pub fn order(&self) -> usize {
        self.lu.order
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Unit lower triangular factor.
    pub fn l(&self) -> DenseMatrix {
        let n = self.order();
        let mut l = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..i {
                l[(i, j)] = self.lu[(i, j)];
            }
        }
        l
    }

    /// Upper triangular factor.
    pub fn u(&self) -> DenseMatrix {
        let n = self.order();
        let mut u = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                u[(i, j)] = self.lu[(i, j)];
            }
        }
        u
    }

    /// Permutation matrix `P`.
    pub fn p(&self) -> DenseMatrix {
        let n = self.order();
        let mut p = DenseMatrix::zeros(n);
        for (i, &src) in self.perm.iter().enumerate() {
            p[(i, src)] = 1.0;
        }
        p
    }

    /// Solves `A·z = r` by permutation, forward and backward substitution.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(r.len(), n, "lu_solve dimension mismatch");
        let mut z: Vec<f64> = self.perm.iter().map(|&i| r[i]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s = dot(&row[..i], &z[..i]);
            z[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s = dot(&row[i + 1..], &z[i + 1..]);
            z[i] = (z[i] - s) / row[i];
        }
        z
    }
}

/// Gaussian elimination with partial pivoting (largest absolute entry in the
/// column). Fails only on an exactly zero pivot column.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    if !a.is_finite() {
        return Err(Error::InvalidArgument(
            "cannot factor a matrix with non-finite entries".into(),
        ));
    }
    let n = a.order;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if pmax == 0.0 {
            return Err(Error::Singular { column: k });
        }
        if piv != k {
            perm.swap(piv, k);
            for j in 0..n {
                lu.data.swap(piv * n + j, k * n + j);
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            if factor != 0.0 {
                for j in k + 1..n {
                    lu[(i, j)] -= factor * lu[(k, j)];
                }
            }
        }
    }
    Ok(LuFactors { perm, lu })
}

pub fn lu_solve(f: &LuFactors, r: &[f64]) -> Vec<f64> {
    f.solve(r)
}

/// Direct solve `A·x = b`.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.order() {
        return Err(Error::Dimension {
            what: "right-hand side",
            expected: a.order(),
            got: b.len(),
        });
    }
    Ok(lu_factor(a)?.solve(b))
}
