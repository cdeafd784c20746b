//! One streaming pass from a dump to a prior index.

use std::collections::{BTreeSet, HashSet};
use std::io::BufRead;

use chrono::NaiveDate;

use crate::catalog::SnapshotCatalog;
use crate::counts::RawCounts;
use crate::dump::{default_namespaces, parse_dump, DumpError, PageRecord, SnapshotMeta};
use crate::index::{build_index, PriorIndex, DEFAULT_MIN_COUNT};
use crate::redirect::{add_redirect_page, RedirectMap};
use crate::wikitext::{visit_anchors, Diagnostics};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOptions {
    pub keep_namespaces: BTreeSet<i32>,
    pub min_count: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            keep_namespaces: default_namespaces(),
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SnapshotBuild {
    pub index: PriorIndex,
    pub catalog: SnapshotCatalog,
    pub diagnostics: Diagnostics,
    /// Anchors mined, before any filtering.
    pub anchor_count: u64,
    /// Text length of the largest retained page, in bytes.
    pub largest_page: usize,
}

/// Everything a streaming pass keeps between pages: the raw tallies, the
/// redirect map and the article set.
#[derive(Debug, Default)]
pub struct SnapshotAccumulator {
    raw: RawCounts,
    redirects: RedirectMap,
    articles: HashSet<String>,
    diagnostics: Diagnostics,
    anchor_count: u64,
}

impl SnapshotAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_page(&mut self, page: PageRecord) {
        if page.is_redirect() {
            add_redirect_page(&mut self.redirects, &page);
            return;
        }
        let (raw, count) = (&mut self.raw, &mut self.anchor_count);
        visit_anchors(&page.text, &mut self.diagnostics, |surface, target| {
            raw.add(surface, &target, 1);
            *count += 1;
        });
        if page.is_article() {
            self.articles.insert(page.title);
        }
    }

    pub fn anchor_count(&self) -> u64 {
        self.anchor_count
    }

    /// Resolves every tallied target against the now complete redirect map and
    /// article set, then builds the index.
    pub fn finish(self, meta: SnapshotMeta, largest_page: usize, min_count: u64) -> SnapshotBuild {
        let counts = self.raw.resolve(&self.redirects, &self.articles);
        drop(self.raw);
        let index = build_index(&counts, meta.clone(), min_count);
        SnapshotBuild {
            index,
            catalog: SnapshotCatalog {
                meta,
                articles: self.articles,
                redirects: self.redirects,
            },
            diagnostics: self.diagnostics,
            anchor_count: self.anchor_count,
            largest_page,
        }
    }
}

/// Streams `dump` once. Anchors are tallied per (surface, raw target) as pages
/// go by; targets are resolved only after the last page. Peak memory is one
/// page plus the tallies, never the whole dump.
pub fn build_snapshot<R: BufRead>(
    dump: R,
    label: &str,
    dump_date: NaiveDate,
    options: &BuildOptions,
) -> Result<SnapshotBuild, DumpError> {
    let mut reader = parse_dump(dump, &options.keep_namespaces)?;
    let mut acc = SnapshotAccumulator::new();
    for page in reader.by_ref() {
        acc.add_page(page?);
    }
    let meta = reader.meta(label, dump_date);
    Ok(acc.finish(meta, reader.largest_page(), options.min_count))
}
