//! Metric diagnostics: LDL factorization of learned weight matrices, the
//! max-over-median weight-difference statistic, and 2-D PCA export of
//! embedding vectors for external plotting.

use crate::error::{Error, Result};
use crate::linalg::{top2_eigenpairs, SquareMat};

/// Pivot magnitude below which the factorization is perturbed and flagged.
pub const PIVOT_TOL: f64 = 1e-10;

/// Factors of `W = L^T D L` with `L` unit lower triangular and `D` the
/// per-transformed-dimension weights.
#[derive(Debug, Clone)]
pub struct LdlFactors {
    pub l: SquareMat,
    pub d: Vec<f64>,
    /// True when a tiny pivot was regularized; the reconstruction bound is
    /// only promised for unflagged factorizations.
    pub perturbed: bool,
}

impl LdlFactors {
    /// Multiplies the factors back together.
    pub fn reconstruct(&self) -> SquareMat {
        let n = self.d.len();
        let mut w = SquareMat::zeros(n).expect("dim validated on input");
        // (L^T D L)_ij = sum_m L_mi d_m L_mj; L row m is the outer factor.
        for m in 0..n {
            let mut row = vec![0.0; n];
            row[..=m].copy_from_slice(&self.l.row(m)[..=m]);
            w.add_outer(&row, self.d[m]);
        }
        w
    }
}

/// Factorizes a symmetric matrix as `L^T D L`, eliminating from the last
/// row upward so `L` comes out unit lower triangular. Pivots smaller than
/// `PIVOT_TOL` in magnitude are bumped by `PIVOT_TOL` and flagged.
pub fn ldl_decompose(w: &SquareMat) -> Result<LdlFactors> {
    let asym = w.asymmetry();
    if asym > 1e-9 {
        return Err(Error::AsymmetricWeight(asym));
    }
    let n = w.dim();
    let mut l = SquareMat::identity(n)?;
    let mut d = vec![0.0; n];
    let mut perturbed = false;

    for i in (0..n).rev() {
        let mut pivot = w.get(i, i);
        for (m, &dm) in d.iter().enumerate().skip(i + 1) {
            let lmi = l.get(m, i);
            pivot -= dm * lmi * lmi;
        }
        if pivot.abs() < PIVOT_TOL {
            pivot += PIVOT_TOL;
            perturbed = true;
        }
        d[i] = pivot;
        for j in 0..i {
            let mut acc = w.get(i, j);
            for (m, &dm) in d.iter().enumerate().skip(i + 1) {
                acc -= dm * l.get(m, i) * l.get(m, j);
            }
            l.set(i, j, acc / pivot);
        }
    }
    Ok(LdlFactors { l, d, perturbed })
}

/// Scaled spread of the diagonal weights: `(max - median) / median`, with
/// the even-length median taken as the mean of the two central order
/// statistics. `None` when the median is too small to scale by.
pub fn weight_difference(factors: &LdlFactors) -> Option<f64> {
    let mut sorted = factors.d.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    if median <= 1e-12 {
        return None;
    }
    let max = sorted[n - 1];
    Some((max - median) / median)
}

/// 2-D principal-component projection of a vector set.
#[derive(Debug, Clone)]
pub struct PcaProjection {
    pub coords: Vec<[f64; 2]>,
    /// Sample variance captured by each component.
    pub explained_variance: [f64; 2],
    /// True when the input had (numerically) zero variance; all coordinates
    /// are zero in that case.
    pub degenerate: bool,
}

/// Centers the vectors and projects them onto the top two principal
/// directions. Each direction's sign is fixed by making its
/// largest-magnitude coordinate positive, so the output is deterministic
/// given input order.
pub fn pca_project(vectors: &[&[f64]]) -> Result<PcaProjection> {
    if vectors.len() < 2 {
        return Err(Error::TooFewVectors {
            need: 2,
            got: vectors.len(),
        });
    }
    let dim = vectors[0].len();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
    }
    let n = vectors.len();
    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(*v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = SquareMat::zeros(dim)?;
    for c in &centered {
        cov.add_outer(c, 1.0);
    }
    cov.scale(1.0 / (n - 1) as f64);

    let total_variance: f64 = (0..dim).map(|i| cov.get(i, i)).sum();
    if total_variance <= 1e-15 {
        return Ok(PcaProjection {
            coords: vec![[0.0, 0.0]; n],
            explained_variance: [0.0, 0.0],
            degenerate: true,
        });
    }

    let mut pairs = top2_eigenpairs(&cov);
    for (_, v) in pairs.iter_mut() {
        fix_sign(v);
    }
    let coords = centered
        .iter()
        .map(|c| {
            let dot = |v: &[f64]| c.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            [dot(&pairs[0].1), dot(&pairs[1].1)]
        })
        .collect();
    Ok(PcaProjection {
        coords,
        explained_variance: [pairs[0].0.max(0.0), pairs[1].0.max(0.0)],
        degenerate: false,
    })
}

fn fix_sign(v: &mut [f64]) {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}
