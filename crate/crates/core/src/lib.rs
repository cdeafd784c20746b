//! Temporal mention-to-entity priors.
//!
//! The crate mines `[[target|surface]]` anchors out of knowledge-base
//! snapshot dumps, turns them into ranked prior dictionaries (one per
//! snapshot), links mentions with the highest-prior candidate, scores that
//! linker against benchmark ground truth restricted to annotations that
//! persist across every snapshot, and measures how priors drift between two
//! snapshots (top-1 changes and top-k footrule distances).
//!
//! The typical flow for one snapshot is
//!
//! ```no_run
//! use std::io::BufReader;
//! use priorshift::{build_snapshot, BuildOptions};
//!
//! let dump = BufReader::new(std::fs::File::open("enwiki-2006.xml").unwrap());
//! let date = chrono::NaiveDate::from_ymd_opt(2006, 11, 30).unwrap();
//! let built = build_snapshot(dump, "2006", date, &BuildOptions::default()).unwrap();
//! let stats = built.index.stats();
//! println!("{} mentions, {} ambiguous", stats.mention_count, stats.ambiguous_mention_count);
//! ```

pub mod catalog;
pub mod counts;
pub mod drift;
pub mod dump;
pub mod eval;
pub mod index;
pub mod linker;
pub mod pipeline;
pub mod redirect;
pub mod title;
mod tsv;
pub mod wikitext;

pub use catalog::SnapshotCatalog;
pub use counts::{accumulate_counts, CountTable, RawCounts};
pub use drift::{drift_stats, footrule_topk, shared_mentions, top1_change_rate, DriftReport, TopKList};
pub use dump::{parse_dump, DumpError, PageRecord, SnapshotMeta};
pub use eval::{
    accuracy, evaluate_matrix, load_ground_truth, persistent_annotations, Annotation, EvalReport, GroundTruthDoc,
    GroundTruthSet, SnapshotView,
};
pub use index::{build_index, CandidateEntity, MentionEntry, PriorIndex, SnapshotStats};
pub use linker::{link, link_document, LinkResult, LinkStatus};
pub use pipeline::{build_snapshot, BuildOptions, SnapshotAccumulator, SnapshotBuild};
pub use redirect::{build_redirect_map, RedirectMap, ResolveError};
pub use title::{normalize_title, TitleError};
pub use wikitext::{extract_anchors, visit_anchors, Anchor};
