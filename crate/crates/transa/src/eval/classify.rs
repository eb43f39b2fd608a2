//! Triple classification: per-relation score thresholds tuned on the
//! validation split, accuracy measured on the test split.

use crate::data::{Triple, TripleSet};
use crate::error::{Error, Result};
use crate::metric::EmbeddingModel;
use crate::parallel;

/// Per-relation decision thresholds plus a pooled fallback for relations
/// unseen in validation. A triple is predicted positive when its score is
/// strictly below the threshold.
#[derive(Debug, Clone)]
pub struct ClassifierThresholds {
    /// Indexed by relation id; `None` when the relation had no validation
    /// triples.
    pub per_relation: Vec<Option<f64>>,
    pub global: f64,
}

impl ClassifierThresholds {
    pub fn threshold_for(&self, relation: u32) -> f64 {
        self.per_relation
            .get(relation as usize)
            .copied()
            .flatten()
            .unwrap_or(self.global)
    }
}

/// Classification accuracy plus per-relation tallies.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    /// Percent correct in [0, 100].
    pub accuracy: f64,
    /// Indexed by relation id: (correct, total) over the evaluated split.
    pub per_relation: Vec<(usize, usize)>,
}

/// Exact threshold search over score midpoints: candidates are one value
/// below the minimum, the midpoint between every pair of consecutive
/// distinct scores, and one value above the maximum. A triple is predicted
/// positive when its score is strictly below the candidate; the candidate
/// maximizing accuracy wins and ties break toward the smaller threshold.
fn best_threshold(mut scored: Vec<(f64, bool)>) -> f64 {
    debug_assert!(!scored.is_empty());
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));
    let n = scored.len();
    let positives = scored.iter().filter(|(_, p)| *p).count();

    // Below-minimum candidate: everything predicted negative.
    let mut best_correct = n - positives;
    let mut best_sigma = scored[0].0 - 1.0;

    // Walk candidates in ascending order, carrying the counts of scores
    // (and positives) strictly below the boundary.
    let mut below_total = 0usize;
    let mut below_positive = 0usize;
    let mut i = 0usize;
    while i < n {
        let s = scored[i].0;
        while i < n && scored[i].0 == s {
            below_total += 1;
            below_positive += scored[i].1 as usize;
            i += 1;
        }
        let sigma = if i < n {
            0.5 * (s + scored[i].0)
        } else {
            s + 1.0
        };
        // Correct = positives below + negatives at or above.
        let negatives_above = (n - below_total) - (positives - below_positive);
        let correct = below_positive + negatives_above;
        if correct > best_correct {
            best_correct = correct;
            best_sigma = sigma;
        }
    }
    best_sigma
}

/// Tunes one threshold per relation on the labeled validation split, and a
/// pooled fallback over all validation triples.
pub fn tune_thresholds(
    model: &EmbeddingModel,
    ts: &TripleSet,
    workers: usize,
) -> Result<ClassifierThresholds> {
    let labels = ts.valid_labels.as_ref().ok_or(Error::MissingLabels)?;
    let scores = parallel::map_items(workers, &ts.valid, |t| model.score_triple(t));

    let mut by_relation: Vec<Vec<(f64, bool)>> = vec![Vec::new(); ts.relation_count()];
    let mut pooled = Vec::with_capacity(ts.valid.len());
    for ((t, &s), &label) in ts.valid.iter().zip(&scores).zip(labels) {
        by_relation[t.relation as usize].push((s, label));
        pooled.push((s, label));
    }
    if pooled.is_empty() {
        return Err(Error::MissingLabels);
    }

    let per_relation = by_relation
        .into_iter()
        .map(|scored| {
            if scored.is_empty() {
                None
            } else {
                Some(best_threshold(scored))
            }
        })
        .collect();
    Ok(ClassifierThresholds {
        per_relation,
        global: best_threshold(pooled),
    })
}

/// Accuracy of threshold classification over a labeled split.
pub fn classify_split(
    model: &EmbeddingModel,
    thresholds: &ClassifierThresholds,
    triples: &[Triple],
    labels: &[bool],
    workers: usize,
) -> ClassificationReport {
    debug_assert_eq!(triples.len(), labels.len());
    let predictions = parallel::map_items(workers, triples, |t| {
        model.score_triple(t) < thresholds.threshold_for(t.relation)
    });
    let mut per_relation = vec![(0usize, 0usize); model.relation_count()];
    let mut correct = 0usize;
    for ((t, pred), &label) in triples.iter().zip(predictions).zip(labels) {
        let tally = &mut per_relation[t.relation as usize];
        tally.1 += 1;
        if pred == label {
            tally.0 += 1;
            correct += 1;
        }
    }
    ClassificationReport {
        accuracy: 100.0 * correct as f64 / triples.len().max(1) as f64,
        per_relation,
    }
}

/// Tunes on validation and classifies the labeled test split.
pub fn classify(
    model: &EmbeddingModel,
    ts: &TripleSet,
    workers: usize,
) -> Result<(ClassifierThresholds, ClassificationReport)> {
    let thresholds = tune_thresholds(model, ts, workers)?;
    let labels = ts.test_labels.as_ref().ok_or(Error::MissingLabels)?;
    let report = classify_split(model, &thresholds, &ts.test, labels, workers);
    Ok((thresholds, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::RawTriple;
    use crate::metric::Variant;

    fn labeled(h: &str, r: &str, t: &str, label: bool) -> RawTriple {
        RawTriple {
            head: h.into(),
            relation: r.into(),
            tail: t.into(),
            label: Some(label),
        }
    }

    #[test]
    fn separable_scores_pick_the_midpoint() {
        // Positives at 1 and 2, negatives at 5 and 6: best accuracy 1.0 on
        // any sigma in (2, 5); the midpoint 3.5 is chosen.
        let scored = vec![(1.0, true), (2.0, true), (5.0, false), (6.0, false)];
        assert_eq!(best_threshold(scored), 3.5);
    }

    #[test]
    fn all_positive_scores_push_sigma_above_the_max() {
        let scored = vec![(1.0, true), (4.0, true)];
        let sigma = best_threshold(scored);
        assert!(sigma > 4.0);
    }

    #[test]
    fn interleaved_scores_break_ties_toward_smaller_sigma() {
        // pos {1, 4}, neg {2, 5}: accuracy 0.75 at sigma in (1,2) and in
        // (4,5); the smaller midpoint 1.5 wins.
        let scored = vec![(1.0, true), (4.0, true), (2.0, false), (5.0, false)];
        assert_eq!(best_threshold(scored), 1.5);
    }

    /// Fixture where entity positions give every triple the score of its
    /// tail entity's coordinate.
    fn scored_kg(
        valid: Vec<(f64, bool)>,
        test: Vec<(f64, bool)>,
    ) -> (EmbeddingModel, TripleSet) {
        let mut valid_raw = Vec::new();
        let mut test_raw = Vec::new();
        let mut coords = vec![0.0f64];
        let mut push = |(s, label): (f64, bool), out: &mut Vec<RawTriple>| {
            let name = format!("T{}", coords.len());
            coords.push(s);
            out.push(labeled("H", "r", &name, label));
        };
        for v in valid {
            push(v, &mut valid_raw);
        }
        for t in test {
            push(t, &mut test_raw);
        }
        let train = vec![RawTriple {
            head: "H".into(),
            relation: "r".into(),
            tail: "T1".into(),
            label: None,
        }];
        let ts = TripleSet::build(&train, &valid_raw, &test_raw).unwrap();
        let mut model =
            EmbeddingModel::zeros(Variant::TransE, 1, ts.entity_count(), 1).unwrap();
        // Head at 0, relation 0; tail Ti at sqrt(score) so score = coord^2.
        for (i, s) in coords.iter().enumerate().skip(1) {
            let id = ts.entities.id(&format!("T{i}")).unwrap();
            model.entity_mut(id)[0] = -s.sqrt();
        }
        (model, ts)
    }

    #[test]
    fn tuned_thresholds_separate_perfectly_separable_relations() {
        let (model, ts) = scored_kg(
            vec![(1.0, true), (2.0, true), (5.0, false), (6.0, false)],
            vec![(1.5, true), (5.5, false)],
        );
        let (thresholds, report) = classify(&model, &ts, 1).unwrap();
        assert!((thresholds.threshold_for(0) - 3.5).abs() < 1e-9);
        assert_eq!(report.accuracy, 100.0);
    }

    #[test]
    fn thresholds_at_infinity_predict_everything_positive() {
        let (model, ts) = scored_kg(
            vec![(1.0, true), (2.0, false)],
            vec![(1.0, true), (3.0, false), (4.0, true), (5.0, false)],
        );
        let thresholds = ClassifierThresholds {
            per_relation: vec![Some(f64::INFINITY)],
            global: f64::INFINITY,
        };
        let report = classify_split(
            &model,
            &thresholds,
            &ts.test,
            ts.test_labels.as_deref().unwrap(),
            1,
        );
        // Everything predicted positive: accuracy equals the positive rate.
        assert_eq!(report.accuracy, 50.0);
    }

    #[test]
    fn missing_labels_error_paths() {
        let train = vec![RawTriple {
            head: "A".into(),
            relation: "r".into(),
            tail: "B".into(),
            label: None,
        }];
        let ts = TripleSet::build(&train, &train.clone(), &[]).unwrap();
        let model = EmbeddingModel::zeros(Variant::TransE, 2, 2, 1).unwrap();
        assert!(matches!(
            tune_thresholds(&model, &ts, 1),
            Err(Error::MissingLabels)
        ));
    }

    #[test]
    fn fallback_threshold_covers_relations_missing_from_validation() {
        // Relation r2 appears only in test; its prediction must use the
        // pooled threshold.
        let train = vec![
            RawTriple { head: "A".into(), relation: "r".into(), tail: "B".into(), label: None },
            RawTriple { head: "A".into(), relation: "r2".into(), tail: "B".into(), label: None },
        ];
        let valid = vec![labeled("A", "r", "B", true)];
        let test = vec![labeled("A", "r2", "B", true)];
        let ts = TripleSet::build(&train, &valid, &test).unwrap();
        let model = EmbeddingModel::zeros(Variant::TransE, 2, 2, 2).unwrap();
        let thresholds = tune_thresholds(&model, &ts, 1).unwrap();
        assert!(thresholds.per_relation[1].is_none());
        assert_eq!(
            thresholds.threshold_for(1),
            thresholds.global
        );
        let labels = ts.test_labels.as_deref().unwrap();
        let report = classify_split(&model, &thresholds, &ts.test, labels, 1);
        // Score 0 below the pooled sigma (tuned on an all-positive
        // validation, so above the max score): predicted positive.
        assert_eq!(report.accuracy, 100.0);
    }

    #[test]
    fn per_relation_tuning_dominates_any_single_global_threshold() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            // Random scores and labels across 3 relations.
            let mut valid = Vec::new();
            let mut ids = Vec::new();
            for i in 0..30 {
                let rel = rng.random_range(0..3u32);
                let score: f64 = rng.random_range(0.0..10.0);
                let label = rng.random_bool(0.5);
                valid.push((rel, score, label));
                ids.push(i);
            }
            let mut by_rel: Vec<Vec<(f64, bool)>> = vec![Vec::new(); 3];
            for &(rel, s, l) in &valid {
                by_rel[rel as usize].push((s, l));
            }
            let sigmas: Vec<Option<f64>> = by_rel
                .iter()
                .map(|v| {
                    if v.is_empty() {
                        None
                    } else {
                        Some(best_threshold(v.clone()))
                    }
                })
                .collect();
            let accuracy_with = |sigma_of: &dyn Fn(u32) -> f64| -> usize {
                valid
                    .iter()
                    .filter(|&&(rel, s, l)| (s < sigma_of(rel)) == l)
                    .count()
            };
            let per_rel_acc = accuracy_with(&|rel| sigmas[rel as usize].unwrap());
            // Any single global threshold, swept over all candidates.
            let all: Vec<(f64, bool)> = valid.iter().map(|&(_, s, l)| (s, l)).collect();
            let global = best_threshold(all);
            let global_acc = accuracy_with(&|_| global);
            assert!(per_rel_acc >= global_acc);
        }
    }
}
