//! Translation-based knowledge-graph embeddings under an adaptive
//! per-relation metric, with a Euclidean baseline and a PSD-constrained
//! ablation.
//!
//! A triple `(h, r, t)` is scored by the translation loss `e = h + r - t`.
//! The Euclidean variant uses `||e||^2`; the adaptive variant scores
//! `|e|^T W_r |e|` with a learned symmetric non-negative weight matrix per
//! relation, and the PSD variant scores `e^T W_r e` with `W_r` projected
//! onto the PSD cone. Training minimizes a margin ranking loss by SGD over
//! corrupted-triple pairs, alternating with a closed-form solve for the
//! weight matrices. Evaluation implements the standard link-prediction
//! (raw/filtered Mean Rank, HITS@10, per-category breakdown) and triple
//! classification (per-relation threshold) protocols.
//!
//! The crate is data-parallel over test triples, relations and minibatch
//! gradients via rayon (feature `parallel`, on by default); every entry
//! point takes a worker count, and `workers == 1` is the sequential,
//! deterministic reference mode.

pub mod analysis;
pub mod checkpoint;
pub mod data;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod metric;
pub mod parallel;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
