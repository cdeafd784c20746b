//! Prior drift between two snapshot indices.
//!
//! Two views of change are reported for the mentions both indices share:
//! how often the top-ranked entity differs, and how far apart the top-k
//! candidate rankings are under the footrule distance for top-k lists, where
//! an element missing from one list is placed at position k + 1. Distances
//! are divided by k(k + 1), the value reached by two disjoint full lists, so
//! they lie in [0, 1].

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::PriorIndex;
use crate::redirect::RedirectMap;

pub const DEFAULT_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DriftError {
    #[error("top-k depth must be at least 1")]
    ZeroDepth,
    #[error("list of {len} items exceeds depth {k}")]
    TooLong { len: usize, k: usize },
    #[error("duplicate item at rank {rank}")]
    Duplicate { rank: usize },
    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },
}

/// A ranked list of at most `k` distinct items with nominal depth `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKList<T = String> {
    items: Vec<T>,
    k: usize,
}

impl<T: PartialEq> TopKList<T> {
    pub fn new(items: Vec<T>, k: usize) -> Result<Self, DriftError> {
        if k == 0 {
            return Err(DriftError::ZeroDepth);
        }
        if items.len() > k {
            return Err(DriftError::TooLong { len: items.len(), k });
        }
        for (i, item) in items.iter().enumerate() {
            if items[..i].contains(item) {
                return Err(DriftError::Duplicate { rank: i + 1 });
            }
        }
        Ok(TopKList { items, k })
    }

    /// The first `k` items of an already-distinct ranking.
    pub fn truncate_from<I: IntoIterator<Item = T>>(ranking: I, k: usize) -> Result<Self, DriftError> {
        TopKList::new(ranking.into_iter().take(k).collect(), k)
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// 1-based rank of `item`, or `k + 1` when absent.
    fn position(&self, item: &T) -> usize {
        self.items.iter().position(|x| x == item).map_or(self.k + 1, |p| p + 1)
    }
}

/// Unnormalized footrule: sum of rank displacements over the union of both
/// lists.
pub fn footrule_raw<T: PartialEq>(l1: &TopKList<T>, l2: &TopKList<T>) -> Result<usize, DriftError> {
    if l1.k != l2.k {
        return Err(DriftError::DepthMismatch {
            left: l1.k,
            right: l2.k,
        });
    }
    let from_l1: usize = l1
        .items
        .iter()
        .enumerate()
        .map(|(i, item)| (i + 1).abs_diff(l2.position(item)))
        .sum();
    let only_l2: usize = l2
        .items
        .iter()
        .enumerate()
        .filter(|(_, item)| !l1.items.contains(item))
        .map(|(i, _)| (i + 1).abs_diff(l1.k + 1))
        .sum();
    Ok(from_l1 + only_l2)
}

/// Footrule distance normalized to [0, 1]: 0 for identical lists, 1 for
/// disjoint full-depth lists.
pub fn footrule_topk<T: PartialEq>(l1: &TopKList<T>, l2: &TopKList<T>) -> Result<f64, DriftError> {
    let raw = footrule_raw(l1, l2)?;
    let k = l1.k;
    Ok(raw as f64 / (k * (k + 1)) as f64)
}

/// Mentions present in both indices, in lexicographic order.
pub fn shared_mentions<'a>(a: &'a PriorIndex, b: &PriorIndex) -> BTreeSet<&'a str> {
    a.mentions().filter(|m| b.contains(m)).map(String::as_str).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeRate {
    pub changed: usize,
    pub considered: usize,
    /// `None` when no mention was considered.
    pub rate: Option<f64>,
}

/// Share of shared mentions whose top entity in `a`, resolved through `b`'s
/// redirects, differs from the top entity in `b`. With `ambiguous_only`, only
/// mentions with two or more candidates in both indices are considered.
pub fn top1_change_rate(a: &PriorIndex, b: &PriorIndex, ambiguous_only: bool, redirects_b: &RedirectMap) -> ChangeRate {
    let mut changed = 0;
    let mut considered = 0;
    for mention in shared_mentions(a, b) {
        let (ea, eb) = (a.entry(mention).unwrap(), b.entry(mention).unwrap());
        if ambiguous_only && !(ea.is_ambiguous() && eb.is_ambiguous()) {
            continue;
        }
        considered += 1;
        if redirects_b.resolve_or_self(&ea.top().entity) != eb.top().entity {
            changed += 1;
        }
    }
    ChangeRate {
        changed,
        considered,
        rate: (considered > 0).then(|| changed as f64 / considered as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub snapshot_a: String,
    pub snapshot_b: String,
    pub k: usize,
    pub shared_mentions: usize,
    pub top1_all: ChangeRate,
    pub top1_ambiguous: ChangeRate,
    pub top1_change_rate_all: Option<f64>,
    pub top1_change_rate_ambiguous: Option<f64>,
    /// Mentions the footrule statistics were computed over (shared and
    /// ambiguous in both indices).
    pub footrule_mentions: usize,
    pub footrule_mean: Option<f64>,
    /// Population variance.
    pub footrule_variance: Option<f64>,
    pub footrule_stddev: Option<f64>,
    /// Share of distances strictly above 0.5.
    pub fraction_above_half: Option<f64>,
    /// Per-mention distances in mention order.
    #[serde(skip)]
    pub distances: Vec<(String, f64)>,
}

impl DriftReport {
    /// `mention<TAB>distance` lines.
    pub fn per_mention_tsv(&self) -> String {
        let mut out = String::new();
        for (mention, d) in &self.distances {
            out.push_str(&crate::tsv::escape(mention));
            out.push('\t');
            out.push_str(&format!("{d}"));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Full drift comparison of `a` against `b` at depth `k`.
pub fn drift_stats(
    a: &PriorIndex,
    b: &PriorIndex,
    k: usize,
    redirects_b: &RedirectMap,
) -> Result<DriftReport, DriftError> {
    if k == 0 {
        return Err(DriftError::ZeroDepth);
    }
    let shared = shared_mentions(a, b);
    let ambiguous: Vec<&str> = shared
        .iter()
        .copied()
        .filter(|m| a.entry(m).unwrap().is_ambiguous() && b.entry(m).unwrap().is_ambiguous())
        .collect();

    let distances: Vec<(String, f64)> = ambiguous
        .par_iter()
        .map(|m| {
            let la = TopKList::truncate_from(a.entry(m).unwrap().top_k(k), k)?;
            let lb = TopKList::truncate_from(b.entry(m).unwrap().top_k(k), k)?;
            Ok((m.to_string(), footrule_topk(&la, &lb)?))
        })
        .collect::<Result<_, DriftError>>()?;

    let values: Vec<f64> = distances.iter().map(|(_, d)| *d).collect();
    let summary = Summary::of(&values);
    let top1_all = top1_change_rate(a, b, false, redirects_b);
    let top1_ambiguous = top1_change_rate(a, b, true, redirects_b);
    Ok(DriftReport {
        snapshot_a: a.meta.label.clone(),
        snapshot_b: b.meta.label.clone(),
        k,
        shared_mentions: shared.len(),
        top1_change_rate_all: top1_all.rate,
        top1_change_rate_ambiguous: top1_ambiguous.rate,
        top1_all,
        top1_ambiguous,
        footrule_mentions: values.len(),
        footrule_mean: summary.map(|s| s.mean),
        footrule_variance: summary.map(|s| s.variance),
        footrule_stddev: summary.map(|s| s.variance.sqrt()),
        fraction_above_half: summary.map(|s| s.above_half),
        distances,
    })
}

#[derive(Debug, Clone, Copy)]
struct Summary {
    mean: f64,
    variance: f64,
    above_half: f64,
}

impl Summary {
    /// Sums run sequentially in input order so results do not depend on
    /// thread scheduling.
    fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let above_half = values.iter().filter(|&&v| v > 0.5).count() as f64 / n;
        Some(Summary {
            mean,
            variance,
            above_half,
        })
    }
}
