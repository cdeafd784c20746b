//! Exact anchor counting.
//!
//! Counting happens in two steps. [`RawCounts`] tallies (surface, target)
//! pairs while a dump streams past, before the snapshot's redirects and
//! article set are known. [`RawCounts::resolve`] then folds targets through
//! the redirect map and drops dangling ones, producing a [`CountTable`].
//! Both tables merge associatively and commutatively, so shards can be
//! counted independently and combined in any order.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;

use crate::redirect::RedirectMap;
use crate::wikitext::Anchor;

/// surface -> raw canonical target -> occurrences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCounts {
    pairs: HashMap<String, HashMap<String, u64>>,
}

impl RawCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, surface: &str, target: &str, n: u64) {
        let targets = match self.pairs.get_mut(surface) {
            Some(t) => t,
            None => self.pairs.entry(surface.to_string()).or_default(),
        };
        match targets.get_mut(target) {
            Some(c) => *c += n,
            None => {
                targets.insert(target.to_string(), n);
            }
        }
    }

    pub fn add_anchor(&mut self, anchor: &Anchor) {
        self.add(&anchor.surface, &anchor.target, 1);
    }

    pub fn merge(&mut self, other: RawCounts) {
        for (surface, targets) in other.pairs {
            let mine = self.pairs.entry(surface).or_default();
            for (target, n) in targets {
                *mine.entry(target).or_insert(0) += n;
            }
        }
    }

    pub fn mention_count(&self) -> usize {
        self.pairs.len()
    }

    /// Resolves every target and keeps only those landing on an article.
    /// Targets whose redirect chain is broken count as dangling.
    pub fn resolve(&self, redirects: &RedirectMap, articles: &HashSet<String>) -> CountTable {
        let mut table = CountTable::default();
        for (surface, targets) in &self.pairs {
            let mut anchor_total = 0u64;
            let mut linked: HashMap<String, u64> = HashMap::new();
            for (target, &n) in targets {
                anchor_total += n;
                let Ok(resolved) = redirects.resolve(target) else {
                    continue;
                };
                if articles.contains(resolved) {
                    *linked.entry(resolved.to_string()).or_insert(0) += n;
                }
            }
            let linked_total = linked.values().sum();
            table.mentions.insert(
                surface.clone(),
                MentionCounts {
                    anchor_total,
                    linked_total,
                    entities: linked.into_iter().collect(),
                },
            );
        }
        table
    }
}

/// Counts for one mention after resolution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MentionCounts {
    /// Every anchor occurrence of the mention, dangling ones included.
    pub anchor_total: u64,
    /// Occurrences whose resolved target is an article; the prior denominator.
    pub linked_total: u64,
    /// Resolved entity -> occurrences.
    pub entities: BTreeMap<String, u64>,
}

impl MentionCounts {
    fn merge(&mut self, other: MentionCounts) {
        self.anchor_total += other.anchor_total;
        self.linked_total += other.linked_total;
        for (entity, n) in other.entities {
            *self.entities.entry(entity).or_insert(0) += n;
        }
    }
}

/// Resolved mention -> entity counts of one snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    pub mentions: BTreeMap<String, MentionCounts>,
}

impl CountTable {
    pub fn get(&self, mention: &str) -> Option<&MentionCounts> {
        self.mentions.get(mention)
    }

    pub fn merge(&mut self, other: CountTable) {
        for (mention, counts) in other.mentions {
            self.mentions.entry(mention).or_default().merge(counts);
        }
    }
}

/// Counts a batch of anchors against one snapshot's redirects and articles.
pub fn accumulate_counts<'a, I>(anchors: I, redirects: &RedirectMap, articles: &HashSet<String>) -> CountTable
where
    I: IntoIterator<Item = &'a Anchor>,
{
    let mut raw = RawCounts::new();
    for anchor in anchors {
        raw.add_anchor(anchor);
    }
    raw.resolve(redirects, articles)
}

/// [`accumulate_counts`] over rayon shards of `shard_size` anchors.
pub fn par_accumulate_counts(
    anchors: &[Anchor],
    redirects: &RedirectMap,
    articles: &HashSet<String>,
    shard_size: usize,
) -> CountTable {
    anchors
        .par_chunks(shard_size.max(1))
        .map(|shard| accumulate_counts(shard, redirects, articles))
        .reduce(CountTable::default, |mut a, b| {
            a.merge(b);
            a
        })
}
