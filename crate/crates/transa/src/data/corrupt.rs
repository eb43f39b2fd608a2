//! Corrupted-triple generation for training and classification negatives.

use rand::Rng;

use super::{Triple, TripleSet};
use crate::error::{Error, Result};

/// How the entity slot to corrupt is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Head or tail with probability 1/2.
    Unif,
    /// Head with probability tph / (tph + hpt) of the triple's relation.
    Bern,
}

impl Strategy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unif" => Some(Strategy::Unif),
            "bern" => Some(Strategy::Bern),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Unif => "unif",
            Strategy::Bern => "bern",
        }
    }
}

/// Which slot corruption may touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptTarget {
    Head,
    Tail,
    Either,
}

/// Sampling configuration for negative generation.
#[derive(Debug, Clone, Copy)]
pub struct CorruptionSpec {
    pub strategy: Strategy,
    pub target: CorruptTarget,
    pub rng_seed: u64,
}

impl CorruptionSpec {
    pub fn sampler<'a>(&self, ts: &'a TripleSet) -> NegativeSampler<'a> {
        NegativeSampler::new(ts, self.strategy, self.target)
    }

    /// The random stream this spec seeds. Concurrent corruption should
    /// derive one independent stream per worker instead of sharing this
    /// one.
    pub fn rng(&self) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(self.rng_seed)
    }
}

/// Draws corrupted triples that are guaranteed absent from the training
/// positives. Bern slot probabilities come from train-split statistics
/// only; relations unseen in training fall back to 1/2.
pub struct NegativeSampler<'a> {
    ts: &'a TripleSet,
    target: CorruptTarget,
    /// Per relation: probability of replacing the head.
    p_head: Vec<f64>,
}

impl<'a> NegativeSampler<'a> {
    pub fn new(ts: &'a TripleSet, strategy: Strategy, target: CorruptTarget) -> Self {
        let p_head = (0..ts.relation_count() as u32)
            .map(|r| match strategy {
                Strategy::Unif => 0.5,
                Strategy::Bern => match ts.relation_stats(r) {
                    Ok(s) => s.tph / (s.tph + s.hpt),
                    Err(_) => 0.5,
                },
            })
            .collect();
        Self { ts, target, p_head }
    }

    /// Probability that corruption of a triple with this relation replaces
    /// the head slot.
    pub fn head_probability(&self, relation: u32) -> f64 {
        self.p_head[relation as usize]
    }

    /// Returns a triple differing from `triple` in exactly one entity slot
    /// and absent from the training positives.
    pub fn corrupt(&self, triple: &Triple, rng: &mut impl Rng) -> Result<Triple> {
        let corrupt_head = match self.target {
            CorruptTarget::Head => true,
            CorruptTarget::Tail => false,
            CorruptTarget::Either => rng.random::<f64>() < self.p_head[triple.relation as usize],
        };
        let n = self.ts.entity_count();

        let candidate = |e: u32| -> Triple {
            if corrupt_head {
                Triple::new(e, triple.relation, triple.tail)
            } else {
                Triple::new(triple.head, triple.relation, e)
            }
        };
        let admissible =
            |c: &Triple| -> bool { c != triple && !self.ts.is_train_positive(c) };

        for _ in 0..n {
            let c = candidate(rng.random_range(0..n as u32));
            if admissible(&c) {
                return Ok(c);
            }
        }
        // Random draws exhausted their attempt budget; only an exhaustive
        // scan can distinguish bad luck from a degenerate KG.
        let valid: Vec<u32> = (0..n as u32)
            .filter(|&e| admissible(&candidate(e)))
            .collect();
        if valid.is_empty() {
            return Err(Error::DegenerateCorruption {
                slot: if corrupt_head { "head" } else { "tail" },
                candidates: n,
            });
        }
        Ok(candidate(valid[rng.random_range(0..valid.len())]))
    }
}
