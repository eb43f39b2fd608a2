//! Small dense matrix support for per-relation metrics.
//!
//! Weight matrices are `k x k` with `k` the embedding dimension, stored
//! dense row-major. Symmetric eigenvalue problems (PSD projection and
//! checks, PCA) are delegated to nalgebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Hard cap on the embedding dimension; dense `k x k` storage is assumed.
pub const MAX_DIM: usize = 1024;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        Ok(Self {
            dim,
            data: vec![0.0; dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::zeros(dim)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            m.data[i * dim..(i + 1) * dim].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `out = self * x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            *o = row.iter().zip(x).map(|(w, v)| w * v).sum();
        }
    }

    /// Adds `scale * v v^T`.
    pub fn add_outer(&mut self, v: &[f64], scale: f64) {
        debug_assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            let vi = scale * v[i];
            let row = &mut self.data[i * self.dim..(i + 1) * self.dim];
            for (r, vj) in row.iter_mut().zip(v) {
                *r += vi * vj;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.data {
            *x *= factor;
        }
    }

    /// Clamps every negative entry to zero in place.
    pub fn clip_negative(&mut self) {
        for x in &mut self.data {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `max_ij |W_ij - W_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Eigenvalues of a symmetric matrix, unordered.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        self.to_nalgebra().symmetric_eigenvalues().iter().copied().collect()
    }

    /// Nearest PSD matrix in Frobenius norm: eigendecompose and clamp
    /// negative eigenvalues to zero.
    pub fn project_psd(&self) -> SquareMat {
        let eig = self.to_nalgebra().symmetric_eigen();
        let n = self.dim;
        let mut out = SquareMat::zeros(n).expect("dim already validated");
        let mut col = vec![0.0; n];
        for m in 0..n {
            let lambda = eig.eigenvalues[m];
            if lambda <= 0.0 {
                continue;
            }
            for (i, c) in col.iter_mut().enumerate() {
                *c = eig.eigenvectors[(i, m)];
            }
            out.add_outer(&col, lambda);
        }
        // Eigenvector round-off can leave tiny asymmetry; re-symmetrize.
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (out.get(i, j) + out.get(j, i));
                out.set(i, j, avg);
                out.set(j, i, avg);
            }
        }
        out
    }
}

/// Covariance eigenstructure used by the PCA export: the top-`2` unit
/// directions of a symmetric matrix by descending eigenvalue.
pub fn top2_eigenpairs(cov: &SquareMat) -> [(f64, Vec<f64>); 2] {
    let eig = cov.to_nalgebra().symmetric_eigen();
    let n = cov.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues of a finite symmetric matrix are finite")
    });
    let take = |m: usize| -> (f64, Vec<f64>) {
        if m >= n {
            // Fewer dimensions than components: pad with a zero direction.
            return (0.0, vec![0.0; n]);
        }
        let idx = order[m];
        let v: Vec<f64> = (0..n).map(|i| eig.eigenvectors[(i, idx)]).collect();
        (eig.eigenvalues[idx], v)
    };
    [take(0), take(1)]
}
