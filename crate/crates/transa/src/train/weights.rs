//! Closed-form per-relation weight-matrix update.
//!
//! The stationary point of the pairwise score difference in the weight
//! matrix is a signed sum of outer products of absolute loss vectors:
//! negated over the relation's positives, positive over its sampled
//! negatives. Negative entries are then clipped to zero (non-negativity
//! constraint) and the matrix is rescaled so its largest entry is one,
//! keeping scores commensurate with the fixed margin across relations.

use crate::data::Triple;
use crate::linalg::SquareMat;
use crate::metric::{EmbeddingModel, LossVector, Variant};

/// Outcome of one relation's solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved,
    /// Clipping (or the PSD projection) annihilated the matrix; the
    /// identity was installed instead.
    IdentityFallback,
}

/// Signed sum of outer products of absolute loss vectors: `-sum |e||e|^T`
/// over positives plus `+sum |e'||e'|^T` over negatives. This is the
/// pre-clip stationary matrix.
pub fn weight_outer_sum(
    model: &EmbeddingModel,
    positives: &[Triple],
    negatives: &[Triple],
) -> SquareMat {
    let mut w = SquareMat::zeros(model.dim).expect("model dim is validated");
    let mut accumulate = |t: &Triple, sign: f64| {
        let lv = LossVector::new(
            model.entity(t.head),
            model.relation(t.relation),
            model.entity(t.tail),
        );
        w.add_outer(&lv.abs, sign);
    };
    for t in positives {
        accumulate(t, -1.0);
    }
    for t in negatives {
        accumulate(t, 1.0);
    }
    w
}

/// Entry-wise clip of negative entries to zero.
pub fn clip_negative_entries(w: &mut SquareMat) {
    w.clip_negative();
}

/// Rescales so the maximal entry is one. Returns false when the matrix has
/// no positive entry, in which case it is left untouched and the caller
/// falls back to the identity.
pub fn normalize_max_entry(w: &mut SquareMat) -> bool {
    let max = w.max_entry();
    if max <= 0.0 || !max.is_finite() {
        return false;
    }
    w.scale(1.0 / max);
    true
}

/// Computes the relation's weight matrix from its positives and one sampled
/// negative per positive. For the PSD variant the clipped matrix is replaced
/// by its projection onto the PSD cone before normalization.
pub fn solve_weight_matrix(
    model: &EmbeddingModel,
    relation: u32,
    positives: &[Triple],
    negatives: &[Triple],
    variant: Variant,
) -> (SquareMat, SolveOutcome) {
    debug_assert!(positives.iter().chain(negatives).all(|t| t.relation == relation));
    let mut w = weight_outer_sum(model, positives, negatives);
    match variant {
        Variant::Psd => {
            w = w.project_psd();
        }
        _ => clip_negative_entries(&mut w),
    }
    if normalize_max_entry(&mut w) {
        (w, SolveOutcome::Solved)
    } else {
        let identity = SquareMat::identity(model.dim).expect("model dim is validated");
        (identity, SolveOutcome::IdentityFallback)
    }
}
