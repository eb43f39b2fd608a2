//! Benchmark triple ingestion, vocabularies, dataset statistics and
//! negative sampling.

mod corrupt;
mod load;

pub use corrupt::{CorruptTarget, CorruptionSpec, NegativeSampler, Strategy};
pub use load::{load_triples, ColumnOrder, RawTriple};

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// One integer-encoded fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub head: u32,
    pub relation: u32,
    pub tail: u32,
}

impl Triple {
    pub fn new(head: u32, relation: u32, tail: u32) -> Self {
        Self { head, relation, tail }
    }

    fn key(&self) -> (u32, u32, u32) {
        (self.head, self.relation, self.tail)
    }
}

/// Ordered name <-> dense id mapping.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Multiplicity class of a relation at the conventional 1.5 threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationCategory {
    OneToOne,
    OneToMany,
    ManyToOne,
    ManyToMany,
}

impl RelationCategory {
    pub const ALL: [RelationCategory; 4] = [
        RelationCategory::OneToOne,
        RelationCategory::OneToMany,
        RelationCategory::ManyToOne,
        RelationCategory::ManyToMany,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            RelationCategory::OneToOne => "1-1",
            RelationCategory::OneToMany => "1-N",
            RelationCategory::ManyToOne => "N-1",
            RelationCategory::ManyToMany => "N-N",
        }
    }
}

/// Head/tail multiplicity statistics of one relation over the train split.
#[derive(Debug, Clone, Copy)]
pub struct RelationStats {
    pub relation: u32,
    pub triples: usize,
    pub distinct_heads: usize,
    pub distinct_tails: usize,
    /// Mean tails per head.
    pub tph: f64,
    /// Mean heads per tail.
    pub hpt: f64,
    pub category: RelationCategory,
}

impl RelationStats {
    fn from_counts(relation: u32, triples: usize, heads: usize, tails: usize) -> Self {
        // tph < 1.5 iff 2 * triples < 3 * heads; cross-multiplied so the
        // threshold is exact for rational counts.
        let tph_small = 2 * triples < 3 * heads;
        let hpt_small = 2 * triples < 3 * tails;
        let category = match (tph_small, hpt_small) {
            (true, true) => RelationCategory::OneToOne,
            (false, true) => RelationCategory::OneToMany,
            (true, false) => RelationCategory::ManyToOne,
            (false, false) => RelationCategory::ManyToMany,
        };
        Self {
            relation,
            triples,
            distinct_heads: heads,
            distinct_tails: tails,
            tph: triples as f64 / heads as f64,
            hpt: triples as f64 / tails as f64,
            category,
        }
    }
}

/// Integer-encoded dataset: vocabularies, splits, labels and the index of
/// every positive triple across all splits.
#[derive(Debug, Clone)]
pub struct TripleSet {
    pub entities: Vocab,
    pub relations: Vocab,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub valid_labels: Option<Vec<bool>>,
    pub test: Vec<Triple>,
    pub test_labels: Option<Vec<bool>>,
    all_positive: HashSet<(u32, u32, u32)>,
    train_positive: HashSet<(u32, u32, u32)>,
    stats: Vec<Option<RelationStats>>,
}

impl TripleSet {
    /// Interns all names and indexes the positives. Vocabulary ids follow
    /// first occurrence in train, then valid, then test order.
    pub fn build(train: &[RawTriple], valid: &[RawTriple], test: &[RawTriple]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainSplit);
        }
        if train.iter().any(|t| t.label == Some(false)) {
            return Err(Error::NegativeTrainTriple);
        }

        let mut entities = Vocab::default();
        let mut relations = Vocab::default();
        let encode = |raw: &RawTriple, entities: &mut Vocab, relations: &mut Vocab| Triple {
            head: entities.intern(&raw.head),
            relation: relations.intern(&raw.relation),
            tail: entities.intern(&raw.tail),
        };

        let train_t: Vec<Triple> = train
            .iter()
            .map(|r| encode(r, &mut entities, &mut relations))
            .collect();
        let valid_t: Vec<Triple> = valid
            .iter()
            .map(|r| encode(r, &mut entities, &mut relations))
            .collect();
        let test_t: Vec<Triple> = test
            .iter()
            .map(|r| encode(r, &mut entities, &mut relations))
            .collect();

        let labels_of = |raw: &[RawTriple]| -> Option<Vec<bool>> {
            if raw.iter().any(|r| r.label.is_some()) {
                Some(raw.iter().map(|r| r.label.unwrap_or(true)).collect())
            } else {
                None
            }
        };
        let valid_labels = labels_of(valid);
        let test_labels = labels_of(test);

        let mut all_positive = HashSet::with_capacity(train_t.len() + valid_t.len() + test_t.len());
        all_positive.extend(train_t.iter().map(Triple::key));
        for (i, t) in valid_t.iter().enumerate() {
            if valid_labels.as_ref().is_none_or(|l| l[i]) {
                all_positive.insert(t.key());
            }
        }
        for (i, t) in test_t.iter().enumerate() {
            if test_labels.as_ref().is_none_or(|l| l[i]) {
                all_positive.insert(t.key());
            }
        }
        let train_positive: HashSet<_> = train_t.iter().map(Triple::key).collect();

        let stats = compute_relation_stats(&train_t, relations.len());

        Ok(Self {
            entities,
            relations,
            train: train_t,
            valid: valid_t,
            valid_labels,
            test: test_t,
            test_labels,
            all_positive,
            train_positive,
            stats,
        })
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// True if the triple is a positive in any split.
    pub fn is_positive(&self, t: &Triple) -> bool {
        self.all_positive.contains(&t.key())
    }

    pub fn is_train_positive(&self, t: &Triple) -> bool {
        self.train_positive.contains(&t.key())
    }

    /// Positive triples per split; for labeled splits only the positives
    /// count, matching the published dataset totals.
    pub fn split_counts(&self) -> (usize, usize, usize) {
        let count = |triples: &[Triple], labels: &Option<Vec<bool>>| match labels {
            Some(l) => l.iter().filter(|&&p| p).count(),
            None => triples.len(),
        };
        (
            self.train.len(),
            count(&self.valid, &self.valid_labels),
            count(&self.test, &self.test_labels),
        )
    }

    /// Averaged triple number per entity over all splits (positives only).
    pub fn atpe(&self) -> f64 {
        let (tr, va, te) = self.split_counts();
        (tr + va + te) as f64 / self.entity_count() as f64
    }

    /// Train-split multiplicity statistics; errors for relations that never
    /// occur in training.
    pub fn relation_stats(&self, relation: u32) -> Result<RelationStats> {
        self.stats
            .get(relation as usize)
            .copied()
            .flatten()
            .ok_or(Error::UnknownRelation(relation))
    }

    /// Stats for every relation that occurs in the train split.
    pub fn all_relation_stats(&self) -> Vec<RelationStats> {
        self.stats.iter().filter_map(|s| *s).collect()
    }

    /// Train triples grouped by relation id.
    pub fn train_by_relation(&self) -> Vec<Vec<Triple>> {
        let mut groups = vec![Vec::new(); self.relation_count()];
        for t in &self.train {
            groups[t.relation as usize].push(*t);
        }
        groups
    }
}

fn compute_relation_stats(train: &[Triple], n_relations: usize) -> Vec<Option<RelationStats>> {
    let mut triples = vec![0usize; n_relations];
    let mut heads: Vec<HashSet<u32>> = vec![HashSet::new(); n_relations];
    let mut tails: Vec<HashSet<u32>> = vec![HashSet::new(); n_relations];
    for t in train {
        let r = t.relation as usize;
        triples[r] += 1;
        heads[r].insert(t.head);
        tails[r].insert(t.tail);
    }
    (0..n_relations)
        .map(|r| {
            if triples[r] == 0 {
                None
            } else {
                Some(RelationStats::from_counts(
                    r as u32,
                    triples[r],
                    heads[r].len(),
                    tails[r].len(),
                ))
            }
        })
        .collect()
}
