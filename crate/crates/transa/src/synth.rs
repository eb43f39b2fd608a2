//! Synthetic knowledge graphs for tests and benchmarks.
//!
//! `product_kg` builds a two-aspect graph: every entity is a pair `(a, b)`
//! and each relation constrains exactly one aspect, leaving the other free.
//! Embeddings must encode both aspects, so for any single relation the
//! unconstrained aspect's subspace is pure noise in the translation loss.
//! That is precisely the setting where a per-relation metric can suppress
//! the noisy subspace and an isotropic one cannot, which makes the dataset
//! a sharp desk-scale discriminator between the variants.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{RawTriple, TripleSet};
use crate::error::{Error, Result};

/// Raw splits of a generated dataset.
#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub train: Vec<RawTriple>,
    pub valid: Vec<RawTriple>,
    pub test: Vec<RawTriple>,
}

impl SynthDataset {
    pub fn to_tripleset(&self) -> Result<TripleSet> {
        TripleSet::build(&self.train, &self.valid, &self.test)
    }

    /// Writes `train.txt`, `valid.txt` and `test.txt` in the benchmark
    /// format (tab separated, head-relation-tail, optional label).
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_owned(),
            source,
        })?;
        for (name, split) in [
            ("train.txt", &self.train),
            ("valid.txt", &self.valid),
            ("test.txt", &self.test),
        ] {
            let mut out = String::new();
            for t in split {
                out.push_str(&t.head);
                out.push('\t');
                out.push_str(&t.relation);
                out.push('\t');
                out.push_str(&t.tail);
                if let Some(label) = t.label {
                    out.push('\t');
                    out.push_str(if label { "1" } else { "-1" });
                }
                out.push('\n');
            }
            let path = dir.join(name);
            fs::write(&path, out).map_err(|source| Error::Io { path, source })?;
        }
        Ok(())
    }
}

/// A linear chain `E0 -r-> E1 -r-> ... -r-> E(n-1)`, all in train.
pub fn chain_kg(n_entities: usize) -> SynthDataset {
    let train = (0..n_entities.saturating_sub(1))
        .map(|i| RawTriple {
            head: format!("E{i}"),
            relation: "next".to_owned(),
            tail: format!("E{}", i + 1),
            label: None,
        })
        .collect();
    SynthDataset {
        train,
        valid: Vec::new(),
        test: Vec::new(),
    }
}

/// Uniformly random distinct triples split into train/valid/test, for
/// oracle checks. Unlabeled (link-prediction style).
pub fn random_kg(
    n_entities: usize,
    n_relations: usize,
    n_train: usize,
    n_valid: usize,
    n_test: usize,
    seed: u64,
) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n_train + n_valid + n_test;
    let mut seen = std::collections::HashSet::new();
    let mut triples = Vec::with_capacity(total);
    while triples.len() < total {
        let h = rng.random_range(0..n_entities);
        let r = rng.random_range(0..n_relations);
        let t = rng.random_range(0..n_entities);
        if h != t && seen.insert((h, r, t)) {
            triples.push(RawTriple {
                head: format!("E{h}"),
                relation: format!("R{r}"),
                tail: format!("E{t}"),
                label: None,
            });
        }
    }
    let test = triples.split_off(n_train + n_valid);
    let valid = triples.split_off(n_train);
    SynthDataset {
        train: triples,
        valid,
        test,
    }
}

/// Knobs of the two-aspect product graph.
#[derive(Debug, Clone)]
pub struct ProductKgConfig {
    /// Values of the first aspect.
    pub n_a: usize,
    /// Values of the second aspect.
    pub n_b: usize,
    /// Relations shifting aspect A (offsets 1..=relations_a), aspect B free.
    pub relations_a: usize,
    /// Relations shifting aspect B, aspect A free.
    pub relations_b: usize,
    /// Fraction of each relation's full fact set that enters the dataset.
    pub fact_fraction: f64,
    /// Fraction of sampled facts routed to validation (labeled).
    pub valid_fraction: f64,
    /// Fraction routed to test (labeled).
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for ProductKgConfig {
    fn default() -> Self {
        Self {
            n_a: 12,
            n_b: 12,
            relations_a: 2,
            relations_b: 2,
            fact_fraction: 0.25,
            valid_fraction: 0.1,
            test_fraction: 0.2,
            seed: 2024,
        }
    }
}

/// Aspect-wise ground truth of one relation. Shifts do not wrap around, so
/// the facts have an exact additive embedding (aspect value times a fixed
/// direction) and translation models can in principle represent them.
#[derive(Debug, Clone, Copy)]
enum Rule {
    /// Tail's `a` must be head's `a` plus the offset.
    ShiftA(usize),
    /// Tail's `b` must be head's `b` plus the offset.
    ShiftB(usize),
}

/// Builds the labeled classification benchmark. Valid and test carry one
/// corrupted negative per positive, checked against the generating rule so
/// no negative is accidentally true.
pub fn product_kg(cfg: &ProductKgConfig) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let entity = |a: usize, b: usize| format!("x{a}y{b}");
    let mut rules: Vec<(String, Rule)> = Vec::new();
    for s in 1..=cfg.relations_a {
        rules.push((format!("ra{s}"), Rule::ShiftA(s)));
    }
    for s in 1..=cfg.relations_b {
        rules.push((format!("rb{s}"), Rule::ShiftB(s)));
    }

    let holds = |rule: Rule, head: (usize, usize), tail: (usize, usize)| -> bool {
        match rule {
            Rule::ShiftA(s) => tail.0 == head.0 + s,
            Rule::ShiftB(s) => tail.1 == head.1 + s,
        }
    };

    let mut train = Vec::new();
    let mut valid = Vec::new();
    let mut test = Vec::new();

    for (name, rule) in &rules {
        // Enumerate the relation's full fact set.
        let mut facts: Vec<((usize, usize), (usize, usize))> = Vec::new();
        for a in 0..cfg.n_a {
            for b in 0..cfg.n_b {
                match *rule {
                    Rule::ShiftA(s) => {
                        if a + s < cfg.n_a {
                            for b2 in 0..cfg.n_b {
                                facts.push(((a, b), (a + s, b2)));
                            }
                        }
                    }
                    Rule::ShiftB(s) => {
                        if b + s < cfg.n_b {
                            for a2 in 0..cfg.n_a {
                                facts.push(((a, b), (a2, b + s)));
                            }
                        }
                    }
                }
            }
        }
        facts.shuffle(&mut rng);
        let keep = ((facts.len() as f64) * cfg.fact_fraction).round() as usize;
        facts.truncate(keep.max(1));

        let n_valid = ((facts.len() as f64) * cfg.valid_fraction).round() as usize;
        let n_test = ((facts.len() as f64) * cfg.test_fraction).round() as usize;

        for (i, &(h, t)) in facts.iter().enumerate() {
            let positive = RawTriple {
                head: entity(h.0, h.1),
                relation: name.clone(),
                tail: entity(t.0, t.1),
                label: None,
            };
            if i < n_valid + n_test {
                // Labeled split: the positive plus one rule-violating
                // corruption.
                let negative = loop {
                    let corrupt_head = rng.random_bool(0.5);
                    let cand = (rng.random_range(0..cfg.n_a), rng.random_range(0..cfg.n_b));
                    let (nh, nt) = if corrupt_head { (cand, t) } else { (h, cand) };
                    if !holds(*rule, nh, nt) {
                        break RawTriple {
                            head: entity(nh.0, nh.1),
                            relation: name.clone(),
                            tail: entity(nt.0, nt.1),
                            label: Some(false),
                        };
                    }
                };
                let positive = RawTriple {
                    label: Some(true),
                    ..positive
                };
                let split = if i < n_valid { &mut valid } else { &mut test };
                split.push(positive);
                split.push(negative);
            } else {
                train.push(positive);
            }
        }
    }

    // Keep the splits deterministic but interleaved across relations.
    train.shuffle(&mut rng);
    SynthDataset { train, valid, test }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_has_expected_shape() {
        let ds = chain_kg(5);
        assert_eq!(ds.train.len(), 4);
        let ts = ds.to_tripleset().unwrap();
        assert_eq!(ts.entity_count(), 5);
        assert_eq!(ts.relation_count(), 1);
    }

    #[test]
    fn random_kg_is_deterministic_and_distinct() {
        let a = random_kg(20, 3, 50, 10, 10, 5);
        let b = random_kg(20, 3, 50, 10, 10, 5);
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let ts = a.to_tripleset().unwrap();
        assert_eq!(ts.train.len(), 50);
        assert_eq!(ts.test.len(), 10);
    }

    #[test]
    fn product_kg_negatives_are_rule_violations() {
        let ds = product_kg(&ProductKgConfig::default());
        let parse = |name: &str| -> (usize, usize) {
            let rest = &name[1..];
            let (a, b) = rest.split_once('y').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        };
        for split in [&ds.valid, &ds.test] {
            for t in split.iter() {
                let h = parse(&t.head);
                let tl = parse(&t.tail);
                let (kind, offset) = t.relation.split_at(2);
                let s: usize = offset.parse().unwrap();
                let holds = match kind {
                    "ra" => tl.0 == h.0 + s,
                    "rb" => tl.1 == h.1 + s,
                    _ => panic!("unknown relation {}", t.relation),
                };
                assert_eq!(holds, t.label.unwrap(), "triple {t:?}");
            }
        }
        // One negative per positive.
        let positives = ds.test.iter().filter(|t| t.label == Some(true)).count();
        assert_eq!(ds.test.len(), 2 * positives);
    }

    #[test]
    fn product_kg_roundtrips_through_files() {
        let ds = product_kg(&ProductKgConfig {
            n_a: 4,
            n_b: 4,
            relations_a: 1,
            relations_b: 1,
            ..ProductKgConfig::default()
        });
        let dir = tempfile::tempdir().unwrap();
        ds.write_to_dir(dir.path()).unwrap();
        let train =
            crate::data::load_triples(&dir.path().join("train.txt"), crate::data::ColumnOrder::Hrt)
                .unwrap();
        let valid =
            crate::data::load_triples(&dir.path().join("valid.txt"), crate::data::ColumnOrder::Hrt)
                .unwrap();
        let test =
            crate::data::load_triples(&dir.path().join("test.txt"), crate::data::ColumnOrder::Hrt)
                .unwrap();
        assert_eq!(train, ds.train);
        assert_eq!(valid, ds.valid);
        assert_eq!(test, ds.test);
        let ts = TripleSet::build(&train, &valid, &test).unwrap();
        assert!(ts.valid_labels.is_some());
        assert!(ts.test_labels.is_some());
    }
}
