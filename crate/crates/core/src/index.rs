//! Per-snapshot prior dictionaries and their TSV form.

use std::cmp::Ordering;
use std::collections::{btree_map, BTreeMap};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counts::CountTable;
use crate::dump::SnapshotMeta;
use crate::tsv::{self, Unsealed};

/// Default minimum number of anchor occurrences for a mention to be indexed.
pub const DEFAULT_MIN_COUNT: u64 = 100;

/// Allowed deviation of a mention's prior sum from 1.
pub const PRIOR_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntity {
    pub entity: String,
    pub count: u64,
    pub prior: f64,
}

/// Ranking order: prior descending, then count descending, then title.
pub fn rank_order(a: &CandidateEntity, b: &CandidateEntity) -> Ordering {
    b.prior
        .total_cmp(&a.prior)
        .then_with(|| b.count.cmp(&a.count))
        .then_with(|| a.entity.cmp(&b.entity))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionEntry {
    pub mention: String,
    /// Occurrences whose target resolved to an article. Equals the sum of the
    /// candidate counts and is the prior denominator.
    pub total_count: u64,
    pub candidates: Vec<CandidateEntity>,
}

impl MentionEntry {
    /// Builds an entry from per-entity counts. Zero counts are skipped; returns
    /// `None` when nothing is left.
    pub fn from_counts<'a, I>(mention: &str, counts: I) -> Option<MentionEntry>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let counts: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, n)| n > 0).collect();
        let total: u64 = counts.iter().map(|&(_, n)| n).sum();
        if total == 0 {
            return None;
        }
        let mut candidates: Vec<CandidateEntity> = counts
            .into_iter()
            .map(|(entity, count)| CandidateEntity {
                entity: entity.to_string(),
                count,
                prior: count as f64 / total as f64,
            })
            .collect();
        candidates.sort_by(rank_order);
        Some(MentionEntry {
            mention: mention.to_string(),
            total_count: total,
            candidates,
        })
    }

    pub fn is_ambiguous(&self) -> bool {
        self.candidates.len() >= 2
    }

    pub fn top(&self) -> &CandidateEntity {
        &self.candidates[0]
    }

    /// Entity titles of the first `k` candidates.
    pub fn top_k(&self, k: usize) -> impl Iterator<Item = &str> {
        self.candidates.iter().take(k).map(|c| c.entity.as_str())
    }

    /// Checks the entry's internal consistency.
    pub fn validate(&self) -> Result<(), String> {
        if self.candidates.is_empty() {
            return Err("no candidates".into());
        }
        let mut count_sum = 0u64;
        let mut prior_sum = 0.0f64;
        for c in &self.candidates {
            if c.count == 0 {
                return Err(format!("candidate {:?} has zero count", c.entity));
            }
            if !(c.prior > 0.0 && c.prior <= 1.0) {
                return Err(format!("candidate {:?} has prior {} outside (0, 1]", c.entity, c.prior));
            }
            count_sum += c.count;
            prior_sum += c.prior;
        }
        if count_sum != self.total_count {
            return Err(format!(
                "candidate counts sum to {count_sum}, total is {}",
                self.total_count
            ));
        }
        if (prior_sum - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(format!("priors sum to {prior_sum}"));
        }
        for pair in self.candidates.windows(2) {
            match rank_order(&pair[0], &pair[1]) {
                Ordering::Less => {}
                Ordering::Equal => return Err(format!("duplicate candidate {:?}", pair[0].entity)),
                Ordering::Greater => return Err(format!("{:?} ranked above {:?}", pair[0].entity, pair[1].entity)),
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub mention_count: usize,
    /// Mentions with at least two candidates.
    pub ambiguous_mention_count: usize,
}

/// Mention -> ranked candidates for one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorIndex {
    pub meta: SnapshotMeta,
    pub min_count: u64,
    entries: BTreeMap<String, MentionEntry>,
}

impl PriorIndex {
    pub fn new(meta: SnapshotMeta, min_count: u64) -> Self {
        PriorIndex {
            meta,
            min_count,
            entries: BTreeMap::new(),
        }
    }

    /// Adds a validated entry, replacing any previous one for the mention.
    pub fn insert(&mut self, entry: MentionEntry) -> Result<(), IndexError> {
        entry.validate().map_err(|message| IndexError::Validation {
            mention: entry.mention.clone(),
            message,
        })?;
        self.entries.insert(entry.mention.clone(), entry);
        Ok(())
    }

    pub fn entry(&self, mention: &str) -> Option<&MentionEntry> {
        self.entries.get(mention)
    }

    /// The stored ranked candidates, or `None` for an unknown mention.
    pub fn candidates(&self, mention: &str) -> Option<&[CandidateEntity]> {
        self.entries.get(mention).map(|e| e.candidates.as_slice())
    }

    pub fn contains(&self, mention: &str) -> bool {
        self.entries.contains_key(mention)
    }

    /// Entries in lexicographic mention order.
    pub fn entries(&self) -> btree_map::Values<'_, String, MentionEntry> {
        self.entries.values()
    }

    pub fn mentions(&self) -> btree_map::Keys<'_, String, MentionEntry> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stats(&self) -> SnapshotStats {
        SnapshotStats {
            mention_count: self.entries.len(),
            ambiguous_mention_count: self.entries.values().filter(|e| e.is_ambiguous()).count(),
        }
    }

    /// Serializes the index in its TSV form, checksum trailer included.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#snapshot {}", tsv::escape(&self.meta.label)).unwrap();
        writeln!(out, "#date {}", self.meta.dump_date.format("%Y-%m-%d")).unwrap();
        writeln!(out, "#pages {}", self.meta.page_count).unwrap();
        writeln!(out, "#min_count {}", self.min_count).unwrap();
        for entry in self.entries.values() {
            let mention = tsv::escape(&entry.mention);
            for c in &entry.candidates {
                writeln!(
                    out,
                    "{mention}\t{}\t{}\t{}",
                    tsv::escape(&c.entity),
                    c.count,
                    tsv::format_prior(c.prior)
                )
                .unwrap();
            }
        }
        tsv::seal(&mut out);
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        file.write_all(self.to_tsv().as_bytes())?;
        file.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PriorIndex, IndexError> {
        let content = std::fs::read_to_string(path)?;
        PriorIndex::from_tsv(&content)
    }

    /// Parses and validates the TSV form. Stored priors are checked against
    /// count/total and then replaced by that exact quotient, so a save/load
    /// round trip reproduces the index bit for bit.
    pub fn from_tsv(content: &str) -> Result<PriorIndex, IndexError> {
        let body = match tsv::unseal(content) {
            Unsealed::Ok { body } => body,
            Unsealed::MissingTrailer { last_line } => {
                return Err(IndexError::Format {
                    line: last_line,
                    message: "missing #sha256 trailer (truncated file?)".into(),
                })
            }
            Unsealed::Mismatch { expected, actual } => return Err(IndexError::Checksum { expected, actual }),
        };

        let mut lines = body.lines().enumerate().map(|(i, l)| (i + 1, l));
        let label = header(&mut lines, "snapshot")?;
        let label = tsv::unescape(&label.1).map_err(|m| IndexError::Format {
            line: label.0,
            message: m,
        })?;
        let (line, date) = header(&mut lines, "date")?;
        let dump_date = NaiveDate::parse_from_str(&date, "%Y-%m-%d").map_err(|e| IndexError::Format {
            line,
            message: format!("bad date {date:?}: {e}"),
        })?;
        let page_count = numeric_header(&mut lines, "pages")?;
        let min_count = numeric_header(&mut lines, "min_count")?;

        let mut index = PriorIndex::new(
            SnapshotMeta {
                label,
                dump_date,
                page_count,
            },
            min_count,
        );
        let mut current: Option<(usize, String, Vec<StoredRow>)> = None;
        for (line, text) in lines {
            let row = parse_row(line, text)?;
            match &mut current {
                Some((_, mention, rows)) if *mention == row.mention => rows.push(row),
                _ => {
                    if let Some((first_line, mention, rows)) = current.take() {
                        if row.mention <= mention {
                            return Err(IndexError::Format {
                                line,
                                message: format!("mention {:?} out of order or not grouped", row.mention),
                            });
                        }
                        index.insert_stored(first_line, mention, rows)?;
                    }
                    current = Some((line, row.mention.clone(), vec![row]));
                }
            }
        }
        if let Some((first_line, mention, rows)) = current {
            index.insert_stored(first_line, mention, rows)?;
        }
        Ok(index)
    }

    fn insert_stored(&mut self, line: usize, mention: String, rows: Vec<StoredRow>) -> Result<(), IndexError> {
        let total: u64 = rows.iter().map(|r| r.count).sum();
        let invalid = |message: String| IndexError::Validation {
            mention: mention.clone(),
            message,
        };
        if total == 0 {
            return Err(invalid(format!("zero total (line {line})")));
        }
        let stored_sum: f64 = rows.iter().map(|r| r.prior).sum();
        if (stored_sum - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(invalid(format!("stored priors sum to {stored_sum} (line {line})")));
        }
        let mut candidates = Vec::with_capacity(rows.len());
        for row in rows {
            let exact = row.count as f64 / total as f64;
            if (exact - row.prior).abs() > PRIOR_SUM_TOLERANCE {
                return Err(invalid(format!(
                    "line {}: prior {} does not match count {}/{total}",
                    row.line, row.prior, row.count
                )));
            }
            candidates.push(CandidateEntity {
                entity: row.entity,
                count: row.count,
                prior: exact,
            });
        }
        let entry = MentionEntry {
            mention: mention.clone(),
            total_count: total,
            candidates,
        };
        entry.validate().map_err(|m| invalid(format!("{m} (line {line})")))?;
        self.entries.insert(mention, entry);
        Ok(())
    }
}

struct StoredRow {
    line: usize,
    mention: String,
    entity: String,
    count: u64,
    prior: f64,
}

fn parse_row(line: usize, text: &str) -> Result<StoredRow, IndexError> {
    let format = |message: String| IndexError::Format { line, message };
    let fields: Vec<&str> = text.split('\t').collect();
    if fields.len() != 4 {
        return Err(format(format!(
            "expected 4 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let mention = tsv::unescape(fields[0]).map_err(format)?;
    let entity = tsv::unescape(fields[1]).map_err(format)?;
    let count: u64 = fields[2]
        .parse()
        .map_err(|_| format(format!("bad count {:?}", fields[2])))?;
    let prior: f64 = fields[3]
        .parse()
        .map_err(|_| format(format!("bad prior {:?}", fields[3])))?;
    if mention.is_empty() || entity.is_empty() {
        return Err(format("empty mention or entity".into()));
    }
    Ok(StoredRow {
        line,
        mention,
        entity,
        count,
        prior,
    })
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<(usize, String), IndexError> {
    let prefix = format!("#{name} ");
    match lines.next() {
        Some((line, text)) => text
            .strip_prefix(&prefix)
            .map(|v| (line, v.to_string()))
            .ok_or_else(|| IndexError::Format {
                line,
                message: format!("expected `#{name}` header"),
            }),
        None => Err(IndexError::Format {
            line: 0,
            message: format!("missing `#{name}` header"),
        }),
    }
}

fn numeric_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<u64, IndexError> {
    let (line, value) = header(lines, name)?;
    value.parse().map_err(|_| IndexError::Format {
        line,
        message: format!("bad `#{name}` value {value:?}"),
    })
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("index format error at line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("index checksum mismatch: trailer says {expected}, content hashes to {actual}")]
    Checksum { expected: String, actual: String },
    #[error("invalid entry for mention {mention:?}: {message}")]
    Validation { mention: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Turns resolved counts into a prior index. Mentions whose anchor total
/// (dangling occurrences included) is below `min_count` are dropped; priors of
/// the survivors are computed over their resolved occurrences only.
pub fn build_index(counts: &CountTable, meta: SnapshotMeta, min_count: u64) -> PriorIndex {
    let mut index = PriorIndex::new(meta, min_count);
    for (mention, c) in &counts.mentions {
        if c.anchor_total < min_count {
            continue;
        }
        let entry = MentionEntry::from_counts(mention, c.entities.iter().map(|(e, &n)| (e.as_str(), n)));
        if let Some(entry) = entry {
            index.entries.insert(mention.clone(), entry);
        }
    }
    index
}
