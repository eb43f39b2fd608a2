//! Stochastic gradient descent over margin-violating triple pairs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, TrainConfig, STREAM_SGD, STREAM_SHUFFLE};
use crate::data::{NegativeSampler, Triple, TripleSet};
use crate::error::{Error, Result};
use crate::metric::{
    grad_wrt_loss_psd, grad_wrt_loss_transa, grad_wrt_loss_transe, EmbeddingModel, LossVector,
    Variant,
};
use crate::parallel;

/// One epoch of the training log.
#[derive(Debug, Clone, Copy)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean hinge term over the epoch's sampled pairs.
    pub mean_hinge: f64,
    /// Pairs with a violated margin.
    pub violations: usize,
    pub mean_entity_norm: f64,
    /// Identity fallbacks in the weight solve (zero for transe).
    pub weight_fallbacks: usize,
    pub wall_secs: f64,
}

/// Embeddings drawn uniformly from [-6/sqrt(k), 6/sqrt(k)], entity vectors
/// normalized to unit length, weight matrices at identity.
pub fn init_model(ts: &TripleSet, cfg: &TrainConfig) -> Result<EmbeddingModel> {
    cfg.validate()?;
    let mut model = EmbeddingModel::zeros(
        cfg.variant,
        cfg.k,
        ts.entity_count(),
        ts.relation_count(),
    )?;
    let bound = 6.0 / (cfg.k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for x in model.entity_data_mut() {
        *x = rng.random_range(-bound..bound);
    }
    for x in model.relation_data_mut() {
        *x = rng.random_range(-bound..bound);
    }
    for id in 0..ts.entity_count() as u32 {
        normalize(model.entity_mut(id));
    }
    Ok(model)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// Margin-ranking hinge: `max(0, pos + gamma - neg)`.
#[inline]
pub fn hinge_term(pos_score: f64, neg_score: f64, gamma: f64) -> f64 {
    (pos_score + gamma - neg_score).max(0.0)
}

/// Full objective over a fixed set of (positive, negative) pairs: hinge sum
/// plus the weight-matrix and embedding-norm penalties.
pub fn objective(
    model: &EmbeddingModel,
    cfg: &TrainConfig,
    pairs: &[(Triple, Triple)],
) -> f64 {
    let hinge: f64 = pairs
        .iter()
        .map(|(pos, neg)| {
            hinge_term(model.score_triple(pos), model.score_triple(neg), cfg.gamma)
        })
        .sum();
    let weight_penalty: f64 = match &model.weights {
        Some(ws) => ws.iter().map(|w| {
            let f = w.frobenius_norm();
            f * f
        }).sum(),
        None => 0.0,
    };
    let sq_sum = |data: &[f64]| data.iter().map(|x| x * x).sum::<f64>();
    hinge
        + cfg.lambda * weight_penalty
        + cfg.c * (sq_sum(model.entity_data()) + sq_sum(model.relation_data()))
}

/// Which embedding row an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Row {
    Entity(u32),
    Relation(u32),
}

/// Accumulated hinge gradients of one pair, one entry per distinct row.
struct PairGrads {
    rows: Vec<(Row, Vec<f64>)>,
    hinge: f64,
}

/// One pass over the shuffled train split. Draws one negative per positive,
/// steps every margin-violating pair, and applies the `2 C v` decay to every
/// touched vector. Weight matrices are held fixed.
///
/// With `workers == 1` updates apply pair by pair (the deterministic
/// reference); otherwise each minibatch's gradients are computed in parallel
/// against the batch-start model and applied afterwards.
pub fn sgd_epoch(
    model: &mut EmbeddingModel,
    ts: &TripleSet,
    sampler: &NegativeSampler,
    cfg: &TrainConfig,
    epoch: usize,
    workers: usize,
) -> Result<EpochStats> {
    if model.variant != cfg.variant {
        return Err(Error::InvalidConfig(format!(
            "model variant {} does not match config variant {}",
            model.variant.label(),
            cfg.variant.label()
        )));
    }
    let n = ts.train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng =
        ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64, 0, STREAM_SHUFFLE));
    order.shuffle(&mut shuffle_rng);

    let mut hinge_sum = 0.0;
    let mut violations = 0usize;

    for batch in order.chunks(cfg.batch_size) {
        if workers == 1 {
            for &idx in batch {
                let grads = pair_grads(model, ts, sampler, cfg, epoch, idx)?;
                hinge_sum += grads.hinge;
                if grads.hinge > 0.0 {
                    violations += 1;
                }
                apply_updates(model, &grads, cfg);
            }
        } else {
            let batch_grads = parallel::map_items(workers, batch, |&idx| {
                pair_grads(model, ts, sampler, cfg, epoch, idx)
            });
            for grads in batch_grads {
                let grads = grads?;
                hinge_sum += grads.hinge;
                if grads.hinge > 0.0 {
                    violations += 1;
                }
                apply_updates(model, &grads, cfg);
            }
        }
    }

    let mean_entity_norm = (0..ts.entity_count() as u32)
        .map(|id| model.entity(id).iter().map(|x| x * x).sum::<f64>().sqrt())
        .sum::<f64>()
        / ts.entity_count() as f64;
    if !mean_entity_norm.is_finite() {
        return Err(Error::NonFinite {
            context: "mean entity norm".to_owned(),
            epoch,
        });
    }

    Ok(EpochStats {
        epoch,
        mean_hinge: hinge_sum / n as f64,
        violations,
        mean_entity_norm,
        weight_fallbacks: 0,
        wall_secs: 0.0,
    })
}

/// Hinge gradients of the pair built from train triple `idx`, read against
/// the current model state.
fn pair_grads(
    model: &EmbeddingModel,
    ts: &TripleSet,
    sampler: &NegativeSampler,
    cfg: &TrainConfig,
    epoch: usize,
    idx: usize,
) -> Result<PairGrads> {
    let pos = ts.train[idx];
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64, idx as u64, STREAM_SGD));
    let neg = sampler.corrupt(&pos, &mut rng)?;

    let pos_score = model.score_triple(&pos);
    let neg_score = model.score_triple(&neg);
    if !pos_score.is_finite() || !neg_score.is_finite() {
        return Err(Error::NonFinite {
            context: format!(
                "pair scores ({pos_score}, {neg_score}) for train triple {idx}"
            ),
            epoch,
        });
    }
    let hinge = hinge_term(pos_score, neg_score, cfg.gamma);

    let mut rows: Vec<(Row, Vec<f64>)> = Vec::with_capacity(4);
    let add = |row: Row, grad: &[f64], scale: f64, rows: &mut Vec<(Row, Vec<f64>)>| {
        if let Some((_, acc)) = rows.iter_mut().find(|(r, _)| *r == row) {
            for (a, g) in acc.iter_mut().zip(grad) {
                *a += scale * g;
            }
        } else {
            rows.push((row, grad.iter().map(|g| scale * g).collect()));
        }
    };

    if hinge > 0.0 {
        let g_pos = loss_grad(model, &pos);
        let g_neg = loss_grad(model, &neg);
        // d f / d h = +g, d f / d r = +g, d f / d t = -g; the negative
        // triple enters the hinge with opposite sign.
        add(Row::Entity(pos.head), &g_pos, 1.0, &mut rows);
        add(Row::Entity(pos.tail), &g_pos, -1.0, &mut rows);
        add(Row::Relation(pos.relation), &g_pos, 1.0, &mut rows);
        add(Row::Entity(neg.head), &g_neg, -1.0, &mut rows);
        add(Row::Entity(neg.tail), &g_neg, 1.0, &mut rows);
        add(Row::Relation(neg.relation), &g_neg, -1.0, &mut rows);
    } else {
        // Margin satisfied: only the C decay touches the pair's vectors.
        let zero = vec![0.0; model.dim];
        for row in [
            Row::Entity(pos.head),
            Row::Entity(pos.tail),
            Row::Entity(neg.head),
            Row::Entity(neg.tail),
        ] {
            add(row, &zero, 0.0, &mut rows);
        }
        add(Row::Relation(pos.relation), &zero, 0.0, &mut rows);
    }

    Ok(PairGrads { rows, hinge })
}

/// Gradient of the triple's score with respect to its loss vector.
fn loss_grad(model: &EmbeddingModel, t: &Triple) -> Vec<f64> {
    let lv = LossVector::new(
        model.entity(t.head),
        model.relation(t.relation),
        model.entity(t.tail),
    );
    let mut g = vec![0.0; model.dim];
    match model.variant {
        Variant::TransE => grad_wrt_loss_transe(&lv, &mut g),
        Variant::TransA => {
            let w = &model.weights.as_ref().expect("transa weights")[t.relation as usize];
            grad_wrt_loss_transa(&lv, w, &mut g);
        }
        Variant::Psd => {
            let w = &model.weights.as_ref().expect("psd weights")[t.relation as usize];
            grad_wrt_loss_psd(&lv, w, &mut g);
        }
    }
    g
}

/// `v <- v - alpha (g + 2 C v)` for every row the pair touched.
fn apply_updates(model: &mut EmbeddingModel, grads: &PairGrads, cfg: &TrainConfig) {
    let decay = 2.0 * cfg.c;
    for (row, g) in &grads.rows {
        let v = match row {
            Row::Entity(id) => model.entity_mut(*id),
            Row::Relation(id) => model.relation_mut(*id),
        };
        for (x, gi) in v.iter_mut().zip(g) {
            *x -= cfg.alpha * (gi + decay * *x);
        }
    }
}
