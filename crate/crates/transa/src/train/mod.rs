//! Margin-based ranking training: SGD on embeddings alternating with the
//! closed-form per-relation weight solve.

mod sgd;
mod weights;

pub use sgd::{hinge_term, init_model, objective, sgd_epoch, EpochStats};
pub use weights::{
    clip_negative_entries, normalize_max_entry, solve_weight_matrix, weight_outer_sum,
    SolveOutcome,
};

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{CorruptTarget, NegativeSampler, Strategy, TripleSet};
use crate::error::{Error, Result};
use crate::eval;
use crate::metric::{EmbeddingModel, Variant};
use crate::parallel;

/// Every knob of the ranking objective plus schedule and sampling choices.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// SGD learning rate.
    pub alpha: f64,
    /// Embedding dimension.
    pub k: usize,
    /// Ranking margin.
    pub gamma: f64,
    /// Embedding-norm penalty weight.
    pub c: f64,
    /// Weight-matrix F-norm penalty weight. Inert under max-entry
    /// normalization of the closed-form solve; kept for reporting.
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub strategy: Strategy,
    pub variant: Variant,
    /// Epochs between weight-matrix recomputations.
    pub w_update_period: usize,
    pub seed: u64,
    /// Epochs between validation passes.
    pub validation_period: usize,
    /// Validation rounds without improvement before stopping.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.001,
            k: 50,
            gamma: 2.0,
            c: 0.2,
            lambda: 0.0,
            epochs: 500,
            batch_size: 100,
            strategy: Strategy::Bern,
            variant: Variant::TransA,
            w_update_period: 1,
            seed: 42,
            validation_period: 25,
            patience: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig(msg.to_owned()))
            }
        };
        check(self.alpha > 0.0, "alpha must be > 0")?;
        check(self.gamma > 0.0, "gamma must be > 0")?;
        check(self.c >= 0.0, "C must be >= 0")?;
        check(self.lambda >= 0.0, "lambda must be >= 0")?;
        check(self.epochs >= 1, "epochs must be >= 1")?;
        check(self.batch_size >= 1, "batch_size must be >= 1")?;
        check(self.w_update_period >= 1, "w_update_period must be >= 1")?;
        check(self.validation_period >= 1, "validation_period must be >= 1")?;
        check(
            self.k >= 1 && self.k <= crate::linalg::MAX_DIM,
            "k out of range",
        )?;
        Ok(())
    }
}

/// Which validation metric drives model selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// Filtered HITS@10 on the validation split.
    LinkPrediction,
    /// Accuracy on the labeled validation split.
    Classification,
    /// No validation split; the final model is returned.
    None,
}

/// Per-run training log.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub mode: ValidationMode,
    /// (epoch, metric) for each validation pass.
    pub validations: Vec<(usize, f64)>,
    pub best_epoch: usize,
    pub best_metric: f64,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "epoch,mean_hinge,violations,mean_entity_norm,weight_fallbacks,wall_secs\n",
        );
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.epoch, e.mean_hinge, e.violations, e.mean_entity_norm, e.weight_fallbacks, e.wall_secs
            ));
        }
        out
    }
}

/// Full training loop. `workers == 1` is the deterministic reference mode;
/// larger values parallelize batch gradients, the weight solve and
/// validation scoring.
pub fn train(
    ts: &TripleSet,
    cfg: &TrainConfig,
    workers: usize,
) -> Result<(EmbeddingModel, TrainReport)> {
    train_with_callback(ts, cfg, workers, |_, _, _| {})
}

/// `train` with a hook invoked at every validation improvement, used by the
/// CLI to emit a checkpoint per improvement.
pub fn train_with_callback(
    ts: &TripleSet,
    cfg: &TrainConfig,
    workers: usize,
    mut on_improvement: impl FnMut(&EmbeddingModel, usize, f64),
) -> Result<(EmbeddingModel, TrainReport)> {
    cfg.validate()?;
    let mut model = init_model(ts, cfg)?;
    let sampler = NegativeSampler::new(ts, cfg.strategy, CorruptTarget::Either);
    let mode = if ts.valid.is_empty() {
        ValidationMode::None
    } else if ts.valid_labels.is_some() {
        ValidationMode::Classification
    } else {
        ValidationMode::LinkPrediction
    };

    let groups = ts.train_by_relation();
    let mut report = TrainReport {
        epochs: Vec::with_capacity(cfg.epochs),
        mode,
        validations: Vec::new(),
        best_epoch: 0,
        best_metric: f64::NEG_INFINITY,
        stopped_early: false,
    };
    let mut best_model: Option<EmbeddingModel> = None;
    let mut rounds_without_improvement = 0usize;

    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        let mut stats = sgd_epoch(&mut model, ts, &sampler, cfg, epoch, workers)?;

        if cfg.variant.uses_weights() && epoch % cfg.w_update_period == 0 {
            stats.weight_fallbacks =
                update_all_weights(&mut model, &sampler, cfg, epoch, &groups, workers)?;
        }
        stats.wall_secs = start.elapsed().as_secs_f64();
        report.epochs.push(stats);

        if mode != ValidationMode::None && epoch % cfg.validation_period == 0 {
            let metric = validation_metric(&model, ts, mode, workers)?;
            report.validations.push((epoch, metric));
            if metric > report.best_metric {
                report.best_metric = metric;
                report.best_epoch = epoch;
                best_model = Some(model.clone());
                rounds_without_improvement = 0;
                on_improvement(&model, epoch, metric);
            } else {
                rounds_without_improvement += 1;
                if rounds_without_improvement >= cfg.patience {
                    report.stopped_early = true;
                    break;
                }
            }
        }
    }

    let final_model = best_model.unwrap_or(model);
    final_model.validate()?;
    Ok((final_model, report))
}

/// Recomputes every relation's weight matrix from fresh sampled negatives.
/// Returns the number of identity fallbacks.
fn update_all_weights(
    model: &mut EmbeddingModel,
    sampler: &NegativeSampler,
    cfg: &TrainConfig,
    epoch: usize,
    groups: &[Vec<crate::data::Triple>],
    workers: usize,
) -> Result<usize> {
    let solved = parallel::map_range(workers, groups.len(), |rel| {
        if groups[rel].is_empty() {
            return Ok(None);
        }
        // Fresh negatives for the solve, one per positive, on a stream
        // independent of the SGD pairs.
        let mut negatives = Vec::with_capacity(groups[rel].len());
        for (i, pos) in groups[rel].iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                cfg.seed,
                epoch as u64,
                (rel as u64) << 32 | i as u64,
                STREAM_WEIGHTS,
            ));
            negatives.push(sampler.corrupt(pos, &mut rng)?);
        }
        Ok(Some(solve_weight_matrix(
            model,
            rel as u32,
            &groups[rel],
            &negatives,
            cfg.variant,
        )))
    });

    let mut fallbacks = 0usize;
    for (rel, s) in solved.into_iter().enumerate() {
        if let Some((w, outcome)) = s? {
            if outcome == SolveOutcome::IdentityFallback {
                fallbacks += 1;
            }
            model.set_weight(rel as u32, w);
        }
    }
    Ok(fallbacks)
}

fn validation_metric(
    model: &EmbeddingModel,
    ts: &TripleSet,
    mode: ValidationMode,
    workers: usize,
) -> Result<f64> {
    match mode {
        ValidationMode::LinkPrediction => {
            Ok(eval::validation_hits_at_10(model, ts, workers))
        }
        ValidationMode::Classification => {
            let thresholds = eval::tune_thresholds(model, ts, workers)?;
            let report = eval::classify_split(
                model,
                &thresholds,
                &ts.valid,
                ts.valid_labels.as_deref().ok_or(Error::MissingLabels)?,
                workers,
            );
            Ok(report.accuracy)
        }
        ValidationMode::None => Ok(f64::NAN),
    }
}

// Domain tags keeping the SGD, weight-solve and shuffle RNG streams apart.
pub(crate) const STREAM_SGD: u64 = 0x5347_4400;
pub(crate) const STREAM_WEIGHTS: u64 = 0x5747_5400;
pub(crate) const STREAM_SHUFFLE: u64 = 0x5348_5500;

/// SplitMix64-style mix of (seed, epoch, item, stream) into one RNG seed.
pub(crate) fn derive_seed(seed: u64, epoch: u64, item: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(epoch.wrapping_mul(0xbf58_476d_1ce4_e5b9))
        .wrapping_add(item.wrapping_mul(0x94d0_49bb_1331_11eb))
        .wrapping_add(stream);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
