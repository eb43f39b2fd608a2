//! Benchmark protocols: link prediction and triple classification.

mod classify;

pub use classify::{
    classify, classify_split, tune_thresholds, ClassificationReport, ClassifierThresholds,
};

use crate::data::{RelationCategory, Triple, TripleSet};
use crate::metric::EmbeddingModel;
use crate::parallel;

/// Entity slot to rank over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Head,
    Tail,
}

/// Raw and filtered ranks of one test triple in both slots.
#[derive(Debug, Clone, Copy)]
pub struct TripleRanks {
    pub relation: u32,
    pub head_raw: usize,
    pub head_filtered: usize,
    pub tail_raw: usize,
    pub tail_filtered: usize,
}

/// Aggregated link-prediction results plus the per-triple rank lists they
/// were computed from.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub per_triple: Vec<TripleRanks>,
    pub mean_rank_raw: f64,
    pub mean_rank_filtered: f64,
    /// Percentages in [0, 100].
    pub hits_at_10_raw: f64,
    pub hits_at_10_filtered: f64,
    /// Filtered HITS@10 (%) per relation category, head slot then tail
    /// slot, indexed by `RelationCategory::ALL` order. `None` when the
    /// category has no test triples.
    pub category_head: [Option<f64>; 4],
    pub category_tail: [Option<f64>; 4],
}

/// Rank of the true entity among all candidate completions of the chosen
/// slot: one plus the number of candidates scoring strictly lower. In
/// filtered mode candidates forming a known positive triple (other than the
/// test triple itself) are skipped.
pub fn rank_entity(
    model: &EmbeddingModel,
    ts: &TripleSet,
    triple: &Triple,
    slot: Slot,
    filtered: bool,
) -> usize {
    let (raw, filt) = rank_both_settings(model, ts, triple, slot);
    if filtered {
        filt
    } else {
        raw
    }
}

/// Computes raw and filtered ranks in one pass over the candidates.
fn rank_both_settings(
    model: &EmbeddingModel,
    ts: &TripleSet,
    triple: &Triple,
    slot: Slot,
) -> (usize, usize) {
    let true_score = model.score_triple(triple);
    let mut raw = 1usize;
    let mut filtered = 1usize;
    let n = ts.entity_count() as u32;
    for e in 0..n {
        let candidate = match slot {
            Slot::Head => Triple::new(e, triple.relation, triple.tail),
            Slot::Tail => Triple::new(triple.head, triple.relation, e),
        };
        if candidate == *triple {
            continue;
        }
        let s = model.score_triple(&candidate);
        if s < true_score {
            raw += 1;
            if !ts.is_positive(&candidate) {
                filtered += 1;
            }
        }
    }
    (raw, filtered)
}

/// Ranks every test triple in both slots and aggregates Mean Rank, HITS@10
/// and the per-category breakdown.
pub fn link_prediction(model: &EmbeddingModel, ts: &TripleSet, workers: usize) -> RankReport {
    let positives: Vec<Triple> = match &ts.test_labels {
        Some(labels) => ts
            .test
            .iter()
            .zip(labels)
            .filter(|(_, &p)| p)
            .map(|(t, _)| *t)
            .collect(),
        None => ts.test.clone(),
    };
    let per_triple = parallel::map_items(workers, &positives, |t| {
        let (head_raw, head_filtered) = rank_both_settings(model, ts, t, Slot::Head);
        let (tail_raw, tail_filtered) = rank_both_settings(model, ts, t, Slot::Tail);
        TripleRanks {
            relation: t.relation,
            head_raw,
            head_filtered,
            tail_raw,
            tail_filtered,
        }
    });
    aggregate_ranks(ts, per_triple)
}

/// Builds the aggregate report from per-triple ranks.
pub fn aggregate_ranks(ts: &TripleSet, per_triple: Vec<TripleRanks>) -> RankReport {
    let n = per_triple.len();
    let denom = (2 * n) as f64;
    let mut sum_raw = 0usize;
    let mut sum_filt = 0usize;
    let mut hits_raw = 0usize;
    let mut hits_filt = 0usize;
    let mut cat_hits_head = [0usize; 4];
    let mut cat_total_head = [0usize; 4];
    let mut cat_hits_tail = [0usize; 4];
    let mut cat_total_tail = [0usize; 4];

    for r in &per_triple {
        sum_raw += r.head_raw + r.tail_raw;
        sum_filt += r.head_filtered + r.tail_filtered;
        hits_raw += (r.head_raw <= 10) as usize + (r.tail_raw <= 10) as usize;
        hits_filt += (r.head_filtered <= 10) as usize + (r.tail_filtered <= 10) as usize;
        if let Ok(stats) = ts.relation_stats(r.relation) {
            let c = RelationCategory::ALL
                .iter()
                .position(|&cat| cat == stats.category)
                .expect("category is total");
            cat_total_head[c] += 1;
            cat_total_tail[c] += 1;
            cat_hits_head[c] += (r.head_filtered <= 10) as usize;
            cat_hits_tail[c] += (r.tail_filtered <= 10) as usize;
        }
    }

    let pct = |hits: usize, total: usize| {
        if total == 0 {
            None
        } else {
            Some(100.0 * hits as f64 / total as f64)
        }
    };
    let mut category_head = [None; 4];
    let mut category_tail = [None; 4];
    for c in 0..4 {
        category_head[c] = pct(cat_hits_head[c], cat_total_head[c]);
        category_tail[c] = pct(cat_hits_tail[c], cat_total_tail[c]);
    }

    RankReport {
        per_triple,
        mean_rank_raw: sum_raw as f64 / denom,
        mean_rank_filtered: sum_filt as f64 / denom,
        hits_at_10_raw: 100.0 * hits_raw as f64 / denom,
        hits_at_10_filtered: 100.0 * hits_filt as f64 / denom,
        category_head,
        category_tail,
    }
}

/// Filtered HITS@10 over the validation split, used for model selection.
pub fn validation_hits_at_10(model: &EmbeddingModel, ts: &TripleSet, workers: usize) -> f64 {
    let hits = parallel::map_items(workers, &ts.valid, |t| {
        let (_, head) = rank_both_settings(model, ts, t, Slot::Head);
        let (_, tail) = rank_both_settings(model, ts, t, Slot::Tail);
        (head <= 10) as usize + (tail <= 10) as usize
    });
    let total = 2 * ts.valid.len();
    if total == 0 {
        return f64::NAN;
    }
    100.0 * hits.into_iter().sum::<usize>() as f64 / total as f64
}
