//! Property tests over the data layer and metric invariants.

use proptest::prelude::*;

use transa::data::{CorruptTarget, NegativeSampler, RawTriple, Strategy, TripleSet};
use transa::linalg::SquareMat;
use transa::metric::{induced_norm, score_transa, score_transe};

fn raw(h: &str, r: &str, t: &str) -> RawTriple {
    RawTriple {
        head: h.into(),
        relation: r.into(),
        tail: t.into(),
        label: None,
    }
}

proptest! {
    #[test]
    fn vocab_roundtrips_arbitrary_names(names in proptest::collection::hash_set("[a-zA-Z0-9ـ/_.]{1,12}", 2..20)) {
        let names: Vec<String> = names.into_iter().collect();
        let train: Vec<RawTriple> = names
            .windows(2)
            .map(|w| raw(&w[0], "r", &w[1]))
            .collect();
        let ts = TripleSet::build(&train, &[], &[]).unwrap();
        for name in &names {
            let id = ts.entities.id(name).unwrap();
            prop_assert_eq!(ts.entities.name(id), name.as_str());
        }
    }

    #[test]
    fn corrupt_always_leaves_exactly_one_slot_changed(
        seed in any::<u64>(),
        n_entities in 4usize..12,
        n_triples in 3usize..10,
    ) {
        use rand::SeedableRng;
        let ds = transa::synth::random_kg(n_entities, 2, n_triples, 0, 0, seed);
        let ts = ds.to_tripleset().unwrap();
        let sampler = NegativeSampler::new(&ts, Strategy::Unif, CorruptTarget::Either);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        for pos in &ts.train {
            if let Ok(neg) = sampler.corrupt(pos, &mut rng) {
                prop_assert!(!ts.is_train_positive(&neg));
                let head_changed = neg.head != pos.head;
                let tail_changed = neg.tail != pos.tail;
                prop_assert!(head_changed ^ tail_changed);
                prop_assert_eq!(neg.relation, pos.relation);
            }
        }
    }

    #[test]
    fn transa_score_is_invariant_to_loss_sign_flips(
        e in proptest::collection::vec(-3.0f64..3.0, 2..6),
        flips in proptest::collection::vec(any::<bool>(), 2..6),
        diag in proptest::collection::vec(0.0f64..2.0, 2..6),
    ) {
        let k = e.len().min(flips.len()).min(diag.len());
        let e = &e[..k];
        let mut w = SquareMat::zeros(k).unwrap();
        for (i, &dv) in diag.iter().take(k).enumerate() {
            w.set(i, i, dv);
            if i + 1 < k {
                w.set(i, i + 1, 0.5);
                w.set(i + 1, i, 0.5);
            }
        }
        let zero = vec![0.0; k];
        let base = score_transa(e, &zero, &zero, &w).unwrap();
        let flipped: Vec<f64> = e
            .iter()
            .zip(&flips[..k])
            .map(|(x, &f)| if f { -x } else { *x })
            .collect();
        let s = score_transa(&flipped, &zero, &zero, &w).unwrap();
        prop_assert!((s - base).abs() <= 1e-12 * (1.0 + base.abs()));
    }

    #[test]
    fn induced_norm_is_homogeneous_and_identity_matches_euclidean(
        e in proptest::collection::vec(-4.0f64..4.0, 2..8),
        scale in 0.0f64..5.0,
    ) {
        let k = e.len();
        let w = SquareMat::identity(k).unwrap();
        let n = induced_norm(&e, &w).unwrap();
        let euclid = score_transe(&e, &vec![0.0; k], &vec![0.0; k]).unwrap().sqrt();
        prop_assert!((n - euclid).abs() <= 1e-12 * (1.0 + euclid));
        let scaled: Vec<f64> = e.iter().map(|x| scale * x).collect();
        let ns = induced_norm(&scaled, &w).unwrap();
        prop_assert!((ns - scale * n).abs() <= 1e-9 * (1.0 + ns.abs()));
    }
}
