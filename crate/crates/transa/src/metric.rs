//! Score functions and their gradients.
//!
//! All three variants measure the translation loss `e = h + r - t`:
//!
//! - `transe`:  ||e||_2^2
//! - `transa`:  |e|^T W_r |e|   with W_r symmetric, entry-wise non-negative
//! - `psd`:     e^T W_r e       with W_r symmetric positive semidefinite
//!
//! Validity checks on `W` are meant for construction and test paths; the
//! scoring hot loops assume matrices that already passed them.

use crate::data::Triple;
use crate::error::{Error, Result};
use crate::linalg::SquareMat;

/// Symmetry tolerance for weight-matrix validation.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue for the PSD variant.
pub const PSD_EIG_TOL: f64 = -1e-9;

/// Score-function variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    TransE,
    TransA,
    Psd,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "transe" => Some(Variant::TransE),
            "transa" => Some(Variant::TransA),
            "psd" => Some(Variant::Psd),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Variant::TransE => "transe",
            Variant::TransA => "transa",
            Variant::Psd => "psd",
        }
    }

    pub fn uses_weights(&self) -> bool {
        !matches!(self, Variant::TransE)
    }
}

/// Translation loss of one triple: `e = h + r - t` and its entry-wise
/// absolute value.
#[derive(Debug, Clone)]
pub struct LossVector {
    pub e: Vec<f64>,
    pub abs: Vec<f64>,
}

impl LossVector {
    pub fn new(h: &[f64], r: &[f64], t: &[f64]) -> Self {
        let e: Vec<f64> = h
            .iter()
            .zip(r)
            .zip(t)
            .map(|((h, r), t)| h + r - t)
            .collect();
        let abs = e.iter().map(|x| x.abs()).collect();
        Self { e, abs }
    }
}

fn check_dims(h: &[f64], r: &[f64], t: &[f64]) -> Result<()> {
    for v in [r, t] {
        if v.len() != h.len() {
            return Err(Error::DimensionMismatch {
                expected: h.len(),
                got: v.len(),
            });
        }
    }
    Ok(())
}

/// Checks that `w` is symmetric with non-negative entries.
pub fn validate_weight_transa(w: &SquareMat) -> Result<()> {
    let asym = w.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::AsymmetricWeight(asym));
    }
    for i in 0..w.dim() {
        for j in 0..w.dim() {
            let v = w.get(i, j);
            if v < 0.0 {
                return Err(Error::NegativeWeightEntry { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// Checks that `w` is symmetric positive semidefinite.
pub fn validate_weight_psd(w: &SquareMat) -> Result<()> {
    let asym = w.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::AsymmetricWeight(asym));
    }
    let min_eig = w
        .symmetric_eigenvalues()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_eig < PSD_EIG_TOL {
        return Err(Error::NotPsd(min_eig));
    }
    Ok(())
}

/// Squared Euclidean translation loss `||h + r - t||_2^2`.
pub fn score_transe(h: &[f64], r: &[f64], t: &[f64]) -> Result<f64> {
    check_dims(h, r, t)?;
    Ok(score_transe_unchecked(h, r, t))
}

#[inline]
pub(crate) fn score_transe_unchecked(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    h.iter()
        .zip(r)
        .zip(t)
        .map(|((h, r), t)| {
            let d = h + r - t;
            d * d
        })
        .sum()
}

/// Adaptive-metric loss `|e|^T W |e|` with `e = h + r - t`.
pub fn score_transa(h: &[f64], r: &[f64], t: &[f64], w: &SquareMat) -> Result<f64> {
    check_dims(h, r, t)?;
    if w.dim() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: w.dim(),
        });
    }
    validate_weight_transa(w)?;
    let lv = LossVector::new(h, r, t);
    Ok(quad_form(&lv.abs, w))
}

/// PSD-metric loss `e^T W e` without absolute values.
pub fn score_psd(h: &[f64], r: &[f64], t: &[f64], w: &SquareMat) -> Result<f64> {
    check_dims(h, r, t)?;
    if w.dim() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: w.dim(),
        });
    }
    validate_weight_psd(w)?;
    let lv = LossVector::new(h, r, t);
    Ok(quad_form(&lv.e, w))
}

/// `x^T W x`, evaluated row by row in a fixed order so that `W = I`
/// reproduces the plain squared norm bit for bit.
#[inline]
pub(crate) fn quad_form(x: &[f64], w: &SquareMat) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let row = &w.as_slice()[i * n..(i + 1) * n];
        let mut inner = 0.0;
        for (wij, &xj) in row.iter().zip(x) {
            inner += wij * xj;
        }
        acc += xi * inner;
    }
    acc
}

/// Norm induced by the adaptive metric: `sqrt(|e|^T W |e|)`.
pub fn induced_norm(e: &[f64], w: &SquareMat) -> Result<f64> {
    if w.dim() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            got: w.dim(),
        });
    }
    validate_weight_transa(w)?;
    let abs: Vec<f64> = e.iter().map(|x| x.abs()).collect();
    Ok(quad_form(&abs, w).sqrt())
}

/// Gradient of the adaptive-metric score with respect to the loss vector:
/// `2 sign(e) .* (W |e|)`, with `sign(0) = 0`.
pub(crate) fn grad_wrt_loss_transa(lv: &LossVector, w: &SquareMat, out: &mut [f64]) {
    w.matvec(&lv.abs, out);
    for (g, &ei) in out.iter_mut().zip(&lv.e) {
        *g *= 2.0 * sign(ei);
    }
}

/// Gradient of the PSD score with respect to the loss vector: `2 W e`.
pub(crate) fn grad_wrt_loss_psd(lv: &LossVector, w: &SquareMat, out: &mut [f64]) {
    w.matvec(&lv.e, out);
    for g in out.iter_mut() {
        *g *= 2.0;
    }
}

/// Gradient of the Euclidean score with respect to the loss vector: `2 e`.
pub(crate) fn grad_wrt_loss_transe(lv: &LossVector, out: &mut [f64]) {
    for (g, &ei) in out.iter_mut().zip(&lv.e) {
        *g = 2.0 * ei;
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Partial derivatives of the adaptive-metric score with respect to
/// `h`, `r` and `t`. The head and relation share the loss-vector gradient;
/// the tail carries its negation.
pub fn grad_transa(
    h: &[f64],
    r: &[f64],
    t: &[f64],
    w: &SquareMat,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_dims(h, r, t)?;
    if w.dim() != h.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            got: w.dim(),
        });
    }
    validate_weight_transa(w)?;
    let lv = LossVector::new(h, r, t);
    let mut g = vec![0.0; h.len()];
    grad_wrt_loss_transa(&lv, w, &mut g);
    let neg: Vec<f64> = g.iter().map(|x| -x).collect();
    Ok((g.clone(), g, neg))
}

/// Entity and relation embeddings plus the per-relation metric.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    pub variant: Variant,
    pub dim: usize,
    entity_count: usize,
    relation_count: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
    /// One matrix per relation; `None` for the Euclidean variant.
    pub weights: Option<Vec<SquareMat>>,
}

impl EmbeddingModel {
    pub fn zeros(
        variant: Variant,
        dim: usize,
        entity_count: usize,
        relation_count: usize,
    ) -> Result<Self> {
        if dim == 0 || dim > crate::linalg::MAX_DIM {
            return Err(Error::DimensionTooLarge(dim));
        }
        let weights = if variant.uses_weights() {
            let mut ws = Vec::with_capacity(relation_count);
            for _ in 0..relation_count {
                ws.push(SquareMat::identity(dim)?);
            }
            Some(ws)
        } else {
            None
        };
        Ok(Self {
            variant,
            dim,
            entity_count,
            relation_count,
            entities: vec![0.0; entity_count * dim],
            relations: vec![0.0; relation_count * dim],
            weights,
        })
    }

    pub fn entity_count(&self) -> usize {
        self.entity_count
    }

    pub fn relation_count(&self) -> usize {
        self.relation_count
    }

    #[inline]
    pub fn entity(&self, id: u32) -> &[f64] {
        let i = id as usize * self.dim;
        &self.entities[i..i + self.dim]
    }

    #[inline]
    pub fn entity_mut(&mut self, id: u32) -> &mut [f64] {
        let i = id as usize * self.dim;
        &mut self.entities[i..i + self.dim]
    }

    #[inline]
    pub fn relation(&self, id: u32) -> &[f64] {
        let i = id as usize * self.dim;
        &self.relations[i..i + self.dim]
    }

    #[inline]
    pub fn relation_mut(&mut self, id: u32) -> &mut [f64] {
        let i = id as usize * self.dim;
        &mut self.relations[i..i + self.dim]
    }

    pub fn weight(&self, relation: u32) -> Option<&SquareMat> {
        self.weights.as_ref().map(|w| &w[relation as usize])
    }

    pub fn set_weight(&mut self, relation: u32, w: SquareMat) {
        if let Some(ws) = self.weights.as_mut() {
            ws[relation as usize] = w;
        }
    }

    /// Dissimilarity of a triple under this model's variant; lower is more
    /// plausible. Assumes validated weights.
    pub fn score_triple(&self, t: &Triple) -> f64 {
        self.score_ids(t.head, t.relation, t.tail)
    }

    #[inline]
    pub fn score_ids(&self, head: u32, relation: u32, tail: u32) -> f64 {
        let h = self.entity(head);
        let r = self.relation(relation);
        let t = self.entity(tail);
        match self.variant {
            Variant::TransE => score_transe_unchecked(h, r, t),
            Variant::TransA => {
                let w = &self.weights.as_ref().expect("transa has weights")[relation as usize];
                let lv = LossVector::new(h, r, t);
                quad_form(&lv.abs, w)
            }
            Variant::Psd => {
                let w = &self.weights.as_ref().expect("psd has weights")[relation as usize];
                let lv = LossVector::new(h, r, t);
                quad_form(&lv.e, w)
            }
        }
    }

    /// All vectors finite plus the variant's weight-matrix invariant.
    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self
            .entities
            .iter()
            .chain(&self.relations)
            .find(|x| !x.is_finite())
        {
            return Err(Error::NonFinite {
                context: format!("embedding value {bad}"),
                epoch: 0,
            });
        }
        if let Some(ws) = &self.weights {
            for w in ws {
                match self.variant {
                    Variant::TransA => validate_weight_transa(w)?,
                    Variant::Psd => validate_weight_psd(w)?,
                    Variant::TransE => {}
                }
            }
        }
        Ok(())
    }

    pub(crate) fn entity_data(&self) -> &[f64] {
        &self.entities
    }

    pub(crate) fn relation_data(&self) -> &[f64] {
        &self.relations
    }

    pub(crate) fn entity_data_mut(&mut self) -> &mut [f64] {
        &mut self.entities
    }

    pub(crate) fn relation_data_mut(&mut self) -> &mut [f64] {
        &mut self.relations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity(n: usize) -> SquareMat {
        SquareMat::identity(n).unwrap()
    }

    #[test]
    fn transe_exact_translation_scores_zero() {
        let s = score_transe(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn transe_hand_computed() {
        let s = score_transe(&[0.0, 0.0], &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(s, 5.0);
    }

    #[test]
    fn transe_dimension_mismatch_errors() {
        assert!(matches!(
            score_transe(&[1.0, 0.0], &[0.0], &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transa_off_diagonal_couples_absolute_values() {
        // W = [[0,1],[1,0]] gives 2 |e1| |e2|.
        let w = SquareMat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let s = score_transa(&[1.0, -3.0], &[0.0, 0.0], &[0.0, 0.0], &w).unwrap();
        assert!((s - 2.0 * 1.0 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn transa_diagonal_hand_computed() {
        let w = SquareMat::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        // e = (1, -2): 1*1 + 2*4 = 9.
        let s = score_transa(&[1.0, -2.0], &[0.0, 0.0], &[0.0, 0.0], &w).unwrap();
        assert_eq!(s, 9.0);
    }

    #[test]
    fn transa_identity_equals_transe_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let k = rng.random_range(1..8usize);
            let v = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..k).map(|_| rng.random_range(-3.0..3.0)).collect()
            };
            let (h, r, t) = (v(&mut rng), v(&mut rng), v(&mut rng));
            let a = score_transa(&h, &r, &t, &identity(k)).unwrap();
            let e = score_transe(&h, &r, &t).unwrap();
            assert!((a - e).abs() <= 1e-12, "transa {a} vs transe {e}");
        }
    }

    #[test]
    fn transa_rejects_negative_entries_and_asymmetry() {
        let neg = SquareMat::from_rows(&[&[1.0, -0.1], &[-0.1, 1.0]]).unwrap();
        assert!(matches!(
            score_transa(&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], &neg),
            Err(Error::NegativeWeightEntry { .. })
        ));
        let asym = SquareMat::from_rows(&[&[1.0, 0.2], &[0.1, 1.0]]).unwrap();
        assert!(matches!(
            score_transa(&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], &asym),
            Err(Error::AsymmetricWeight(_))
        ));
    }

    #[test]
    fn psd_identity_equals_transe() {
        let (h, r, t) = ([0.3, -1.2], [0.5, 0.5], [1.0, 0.1]);
        let a = score_psd(&h, &r, &t, &identity(2)).unwrap();
        let e = score_transe(&h, &r, &t).unwrap();
        assert!((a - e).abs() < 1e-12);
    }

    #[test]
    fn psd_rank_one_annihilates_its_null_space() {
        // W = [[1,1],[1,1]], e = (1,-1): (1-1)^2 = 0.
        let w = SquareMat::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let s = score_psd(&[1.0, -1.0], &[0.0, 0.0], &[0.0, 0.0], &w).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn psd_diagonal_matches_transa_here() {
        let w = SquareMat::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        let s = score_psd(&[1.0, -2.0], &[0.0, 0.0], &[0.0, 0.0], &w).unwrap();
        assert_eq!(s, 9.0);
    }

    #[test]
    fn psd_rejects_indefinite_matrices() {
        let w = SquareMat::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(matches!(
            score_psd(&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], &w),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn induced_norm_basics() {
        let w = SquareMat::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert_eq!(induced_norm(&[0.0, 0.0], &w).unwrap(), 0.0);
        assert_eq!(induced_norm(&[1.0, -2.0], &w).unwrap(), 3.0);
    }

    #[test]
    fn induced_norm_is_absolutely_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let w = random_nonneg_sym(&mut rng, 4);
            let e: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let scaled: Vec<f64> = e.iter().map(|x| 2.0 * x).collect();
            let n1 = induced_norm(&e, &w).unwrap();
            let n2 = induced_norm(&scaled, &w).unwrap();
            assert!((n2 - 2.0 * n1).abs() < 1e-9 * (1.0 + n1));
        }
    }

    #[test]
    fn scores_are_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let k = 5;
            let v = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..k).map(|_| rng.random_range(-2.0..2.0)).collect()
            };
            let (h, r, t) = (v(&mut rng), v(&mut rng), v(&mut rng));
            let w = random_nonneg_sym(&mut rng, k);
            assert!(score_transe(&h, &r, &t).unwrap() >= 0.0);
            assert!(score_transa(&h, &r, &t, &w).unwrap() >= 0.0);
        }
    }

    #[test]
    fn transa_score_depends_only_on_absolute_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let k = 4;
            let w = random_nonneg_sym(&mut rng, k);
            let e: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let zero = vec![0.0; k];
            let base = score_transa(&e, &zero, &zero, &w).unwrap();
            for flip in 0..k {
                let mut f = e.clone();
                f[flip] = -f[flip];
                let s = score_transa(&f, &zero, &zero, &w).unwrap();
                assert!((s - base).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grad_transa_identity_gives_transe_gradient() {
        // All loss components positive: grad = 2 e.
        let (h, r, t) = ([2.0, 1.0], [1.0, 1.0], [0.5, 0.5]);
        let (gh, gr, gt) = grad_transa(&h, &r, &t, &identity(2)).unwrap();
        let e = [2.5, 1.5];
        for i in 0..2 {
            assert!((gh[i] - 2.0 * e[i]).abs() < 1e-12);
            assert!((gr[i] - 2.0 * e[i]).abs() < 1e-12);
            assert!((gt[i] + 2.0 * e[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn grad_transa_hand_computed_with_signs() {
        let w = SquareMat::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        // e = (1, -2): grad = (2*1*1, 2*(-1)*4) = (2, -8).
        let (gh, _, _) = grad_transa(&[1.0, -2.0], &[0.0, 0.0], &[0.0, 0.0], &w).unwrap();
        assert!((gh[0] - 2.0).abs() < 1e-12);
        assert!((gh[1] + 8.0).abs() < 1e-12);
    }

    #[test]
    fn grad_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let step = 1e-5;
        let mut checked = 0;
        while checked < 50 {
            let k = 6;
            let w = random_nonneg_sym(&mut rng, k);
            let v = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..k).map(|_| rng.random_range(-2.0..2.0)).collect()
            };
            let (h, r, t) = (v(&mut rng), v(&mut rng), v(&mut rng));
            let lv = LossVector::new(&h, &r, &t);
            if lv.e.iter().any(|x| x.abs() <= 1e-3) {
                continue;
            }
            checked += 1;
            let (gh, gr, gt) = grad_transa(&h, &r, &t, &w).unwrap();
            let f = |h: &[f64], r: &[f64], t: &[f64]| score_transa(h, r, t, &w).unwrap();
            for i in 0..k {
                let mut hp = h.clone();
                let mut hm = h.clone();
                hp[i] += step;
                hm[i] -= step;
                let fd = (f(&hp, &r, &t) - f(&hm, &r, &t)) / (2.0 * step);
                let rel = (gh[i] - fd).abs() / fd.abs().max(1e-8);
                assert!(rel <= 1e-4, "dh[{i}]: analytic {} vs fd {fd}", gh[i]);

                let mut rp = r.clone();
                let mut rm = r.clone();
                rp[i] += step;
                rm[i] -= step;
                let fd = (f(&h, &rp, &t) - f(&h, &rm, &t)) / (2.0 * step);
                let rel = (gr[i] - fd).abs() / fd.abs().max(1e-8);
                assert!(rel <= 1e-4);

                let mut tp = t.clone();
                let mut tm = t.clone();
                tp[i] += step;
                tm[i] -= step;
                let fd = (f(&h, &r, &tp) - f(&h, &r, &tm)) / (2.0 * step);
                let rel = (gt[i] - fd).abs() / fd.abs().max(1e-8);
                assert!(rel <= 1e-4);
            }
        }
    }

    pub(crate) fn random_nonneg_sym(rng: &mut impl Rng, k: usize) -> SquareMat {
        let mut w = SquareMat::zeros(k).unwrap();
        for i in 0..k {
            for j in i..k {
                let v = rng.random_range(0.0..2.0);
                w.set(i, j, v);
                w.set(j, i, v);
            }
        }
        w
    }

    /// Gram matrix of a non-negative factor: symmetric, entry-wise
    /// non-negative and PSD. Subadditivity of the induced norm needs the
    /// PSD half; a merely non-negative W such as [[0,1],[1,0]] violates the
    /// triangle inequality (e1 = (1,0), e2 = (0,1) gives sqrt(2) > 0 + 0).
    pub(crate) fn random_nonneg_psd(rng: &mut impl Rng, k: usize) -> SquareMat {
        let b: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..k).map(|_| rng.random_range(0.0..1.5)).collect())
            .collect();
        let mut w = SquareMat::zeros(k).unwrap();
        for row in &b {
            w.add_outer(row, 1.0);
        }
        w
    }

    #[test]
    fn triangle_inequality_holds_for_induced_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let k = rng.random_range(2..6usize);
            let w = random_nonneg_psd(&mut rng, k);
            let v = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..k).map(|_| rng.random_range(-3.0..3.0)).collect()
            };
            let e1 = v(&mut rng);
            let e2 = v(&mut rng);
            let sum: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| a + b).collect();
            let lhs = induced_norm(&sum, &w).unwrap();
            let rhs = induced_norm(&e1, &w).unwrap() + induced_norm(&e2, &w).unwrap();
            assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }
}
