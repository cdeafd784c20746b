//! The entity side of a snapshot: which titles are articles and how
//! redirects resolve. Stored next to the prior index so evaluation and drift
//! analysis never need to re-read a dump.
//!
//! File layout (UTF-8, LF): `#snapshot`, `#date`, `#pages` headers, then
//! `A<TAB>title` rows for articles and `R<TAB>from<TAB>to` rows for
//! redirects, each group sorted, then a `#sha256` trailer.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;

use crate::dump::SnapshotMeta;
use crate::index::IndexError;
use crate::redirect::RedirectMap;
use crate::tsv::{self, Unsealed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotCatalog {
    pub meta: SnapshotMeta,
    pub articles: HashSet<String>,
    pub redirects: RedirectMap,
}

impl SnapshotCatalog {
    /// True when `title` resolves to an article of this snapshot.
    pub fn has_entity(&self, title: &str) -> bool {
        self.redirects
            .resolve(title)
            .is_ok_and(|resolved| self.articles.contains(resolved))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#snapshot {}", tsv::escape(&self.meta.label)).unwrap();
        writeln!(out, "#date {}", self.meta.dump_date.format("%Y-%m-%d")).unwrap();
        writeln!(out, "#pages {}", self.meta.page_count).unwrap();
        let mut articles: Vec<&String> = self.articles.iter().collect();
        articles.sort();
        for title in articles {
            writeln!(out, "A\t{}", tsv::escape(title)).unwrap();
        }
        let mut redirects: Vec<(&str, &str)> = self.redirects.iter().collect();
        redirects.sort();
        for (from, to) in redirects {
            writeln!(out, "R\t{}\t{}", tsv::escape(from), tsv::escape(to)).unwrap();
        }
        tsv::seal(&mut out);
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SnapshotCatalog, IndexError> {
        SnapshotCatalog::from_tsv(&std::fs::read_to_string(path)?)
    }

    pub fn from_tsv(content: &str) -> Result<SnapshotCatalog, IndexError> {
        let body = match tsv::unseal(content) {
            Unsealed::Ok { body } => body,
            Unsealed::MissingTrailer { last_line } => {
                return Err(IndexError::Format {
                    line: last_line,
                    message: "missing #sha256 trailer".into(),
                })
            }
            Unsealed::Mismatch { expected, actual } => return Err(IndexError::Checksum { expected, actual }),
        };
        let mut label = None;
        let mut date = None;
        let mut pages = None;
        let mut articles = HashSet::new();
        let mut redirects = RedirectMap::new();
        for (i, text) in body.lines().enumerate() {
            let line = i + 1;
            let format = |message: String| IndexError::Format { line, message };
            if let Some(v) = text.strip_prefix("#snapshot ") {
                label = Some(tsv::unescape(v).map_err(format)?);
            } else if let Some(v) = text.strip_prefix("#date ") {
                date = Some(NaiveDate::parse_from_str(v, "%Y-%m-%d").map_err(|e| format(format!("bad date: {e}")))?);
            } else if let Some(v) = text.strip_prefix("#pages ") {
                pages = Some(v.parse::<u64>().map_err(|_| format(format!("bad page count {v:?}")))?);
            } else {
                let fields: Vec<&str> = text.split('\t').collect();
                match fields.as_slice() {
                    ["A", title] => {
                        articles.insert(tsv::unescape(title).map_err(format)?);
                    }
                    ["R", from, to] => {
                        redirects.insert(tsv::unescape(from).map_err(format)?, tsv::unescape(to).map_err(format)?);
                    }
                    _ => return Err(format(format!("unrecognized row {text:?}"))),
                }
            }
        }
        let missing = |name: &str| IndexError::Format {
            line: 0,
            message: format!("missing `#{name}` header"),
        };
        Ok(SnapshotCatalog {
            meta: SnapshotMeta {
                label: label.ok_or_else(|| missing("snapshot"))?,
                dump_date: date.ok_or_else(|| missing("date"))?,
                page_count: pages.ok_or_else(|| missing("pages"))?,
            },
            articles,
            redirects,
        })
    }
}
