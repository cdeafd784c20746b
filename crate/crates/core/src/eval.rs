//! Benchmark evaluation of prior-only linking across snapshots.
//!
//! Accuracy is computed only over annotations whose gold entity exists in
//! every snapshot under comparison, so each dataset row is scored over the
//! same annotation set no matter which snapshot's priors are used.

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::SnapshotCatalog;
use crate::index::PriorIndex;
use crate::linker::{link_document, LinkResult};
use crate::redirect::RedirectMap;
use crate::title::normalize_title;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub mention: String,
    /// Raw gold title; empty for NIL annotations without one.
    pub gold_entity: String,
    pub is_nil: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthDoc {
    pub doc_id: String,
    pub year: Option<i32>,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthSet {
    pub name: String,
    pub docs: Vec<GroundTruthDoc>,
}

impl GroundTruthSet {
    pub fn annotation_count(&self) -> usize {
        self.docs.iter().map(|d| d.annotations.len()).sum()
    }

    pub fn annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.docs.iter().flat_map(|d| d.annotations.iter())
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("ground truth {name:?}, line {line}: {message}")]
    Schema { name: String, line: usize, message: String },
    #[error("dataset name must not be empty")]
    EmptyName,
    #[error("{results} link results for {gold} gold annotations")]
    LengthMismatch { results: usize, gold: usize },
    #[error("{indices} indices for {snapshots} snapshots")]
    SnapshotMismatch { indices: usize, snapshots: usize },
    #[error("at least one snapshot is required")]
    NoSnapshots,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DocLine {
    doc_id: String,
    #[serde(default)]
    year: Option<i32>,
    annotations: Vec<AnnotationLine>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationLine {
    mention: String,
    #[serde(default)]
    gold: Option<String>,
    #[serde(default)]
    nil: bool,
}

/// Reads a JSON-lines ground-truth file: one document per line, with
/// `doc_id`, `year` (nullable) and `annotations` of
/// `{"mention", "gold", "nil"}`. NIL annotations are kept and flagged.
pub fn load_ground_truth<R: BufRead>(reader: R, name: &str) -> Result<GroundTruthSet, EvalError> {
    if name.trim().is_empty() {
        return Err(EvalError::EmptyName);
    }
    let schema = |line: usize, message: String| EvalError::Schema {
        name: name.to_string(),
        line,
        message,
    };
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| schema(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: DocLine = serde_json::from_str(&line).map_err(|e| schema(line_no, e.to_string()))?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(schema(line_no, format!("duplicate doc_id {:?}", doc.doc_id)));
        }
        let mut annotations = Vec::with_capacity(doc.annotations.len());
        for a in doc.annotations {
            let gold = a.gold.unwrap_or_default();
            if !a.nil && gold.trim().is_empty() {
                return Err(schema(
                    line_no,
                    format!("non-NIL annotation {:?} has no gold entity", a.mention),
                ));
            }
            annotations.push(Annotation {
                mention: a.mention,
                gold_entity: gold,
                is_nil: a.nil,
            });
        }
        docs.push(GroundTruthDoc {
            doc_id: doc.doc_id,
            year: doc.year,
            annotations,
        });
    }
    Ok(GroundTruthSet {
        name: name.to_string(),
        docs,
    })
}

pub fn load_ground_truth_file(path: &Path, name: &str) -> Result<GroundTruthSet, EvalError> {
    let file = std::fs::File::open(path)?;
    load_ground_truth(std::io::BufReader::new(file), name)
}

/// The entity side of one snapshot, as needed for evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotView<'a> {
    pub articles: &'a HashSet<String>,
    pub redirects: &'a RedirectMap,
}

impl<'a> SnapshotView<'a> {
    pub fn new(articles: &'a HashSet<String>, redirects: &'a RedirectMap) -> Self {
        SnapshotView { articles, redirects }
    }

    /// True when the raw title normalizes and resolves to an article.
    pub fn has_entity(&self, raw_title: &str) -> bool {
        let Ok(title) = normalize_title(raw_title) else {
            return false;
        };
        self.redirects
            .resolve(&title)
            .is_ok_and(|resolved| self.articles.contains(resolved))
    }
}

impl<'a> From<&'a SnapshotCatalog> for SnapshotView<'a> {
    fn from(c: &'a SnapshotCatalog) -> Self {
        SnapshotView {
            articles: &c.articles,
            redirects: &c.redirects,
        }
    }
}

/// Keeps the non-NIL annotations whose gold entity exists in every snapshot.
/// Documents are kept even when all their annotations go.
pub fn persistent_annotations(gt: &GroundTruthSet, snapshots: &[SnapshotView<'_>]) -> GroundTruthSet {
    let docs = gt
        .docs
        .iter()
        .map(|doc| GroundTruthDoc {
            doc_id: doc.doc_id.clone(),
            year: doc.year,
            annotations: doc
                .annotations
                .iter()
                .filter(|a| !a.is_nil && snapshots.iter().all(|s| s.has_entity(&a.gold_entity)))
                .cloned()
                .collect(),
        })
        .collect();
    GroundTruthSet {
        name: gt.name.clone(),
        docs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub evaluated: usize,
    /// `None` when nothing was evaluated.
    pub accuracy: Option<f64>,
}

impl Accuracy {
    fn new(correct: usize, evaluated: usize) -> Self {
        let accuracy = (evaluated > 0).then(|| correct as f64 / evaluated as f64);
        Accuracy {
            correct,
            evaluated,
            accuracy,
        }
    }
}

/// Scores aligned link results against gold annotations. A prediction is
/// correct when it resolves to the same title as the normalized gold entity.
pub fn accuracy(results: &[LinkResult], gold: &[Annotation], redirects: &RedirectMap) -> Result<Accuracy, EvalError> {
    if results.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            results: results.len(),
            gold: gold.len(),
        });
    }
    let correct = results
        .iter()
        .zip(gold)
        .filter(|(r, g)| is_correct(r, g, redirects))
        .count();
    Ok(Accuracy::new(correct, gold.len()))
}

fn is_correct(result: &LinkResult, gold: &Annotation, redirects: &RedirectMap) -> bool {
    let Some(predicted) = result.entity.as_deref().filter(|_| result.is_linked()) else {
        return false;
    };
    let Ok(gold_title) = normalize_title(&gold.gold_entity) else {
        return false;
    };
    redirects.resolve_or_self(&gold_title) == redirects.resolve_or_self(predicted)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub snapshot: String,
    #[serde(flatten)]
    pub score: Accuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub dataset: String,
    pub cells: Vec<EvalCell>,
}

/// Accuracy per dataset (rows) and snapshot (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub snapshots: Vec<String>,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn cell(&self, dataset: &str, snapshot: &str) -> Option<&Accuracy> {
        let col = self.snapshots.iter().position(|s| s == snapshot)?;
        self.rows
            .iter()
            .find(|r| r.dataset == dataset)
            .map(|r| &r.cells[col].score)
    }

    /// `dataset,<label>...` header, then one row per dataset with accuracies
    /// to four decimals (`NA` where nothing was evaluated).
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["dataset".to_string()];
        header.extend(self.snapshots.iter().cloned());
        writer.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut record = vec![row.dataset.clone()];
            record.extend(row.cells.iter().map(|c| match c.score.accuracy {
                Some(a) => format!("{a:.4}"),
                None => "NA".to_string(),
            }));
            writer.write_record(&record).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs the whole dataset x snapshot matrix. Persistence is decided once per
/// dataset over all snapshots; each cell then links the surviving mentions
/// with that snapshot's index and matches them under its redirects.
pub fn evaluate_matrix(
    gts: &[GroundTruthSet],
    indices: &[PriorIndex],
    snapshots: &[SnapshotView<'_>],
) -> Result<EvalReport, EvalError> {
    if indices.len() != snapshots.len() {
        return Err(EvalError::SnapshotMismatch {
            indices: indices.len(),
            snapshots: snapshots.len(),
        });
    }
    if snapshots.is_empty() {
        return Err(EvalError::NoSnapshots);
    }
    let persistent: Vec<Vec<Annotation>> = gts
        .par_iter()
        .map(|gt| persistent_annotations(gt, snapshots).annotations().cloned().collect())
        .collect();

    let cells: Vec<Vec<EvalCell>> = persistent
        .par_iter()
        .map(|gold| {
            let mentions: Vec<&str> = gold.iter().map(|a| a.mention.as_str()).collect();
            indices
                .par_iter()
                .zip(snapshots.par_iter())
                .map(|(index, snapshot)| {
                    let results = link_document(index, &mentions);
                    let score = accuracy(&results, gold, snapshot.redirects)?;
                    Ok(EvalCell {
                        snapshot: index.meta.label.clone(),
                        score,
                    })
                })
                .collect::<Result<Vec<_>, EvalError>>()
        })
        .collect::<Result<_, _>>()?;

    Ok(EvalReport {
        snapshots: indices.iter().map(|i| i.meta.label.clone()).collect(),
        rows: gts
            .iter()
            .zip(cells)
            .map(|(gt, cells)| EvalRow {
                dataset: gt.name.clone(),
                cells,
            })
            .collect(),
    })
}
