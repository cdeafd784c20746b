//! Workspace configuration file.
//!
//! ```toml
//! output_dir = "out"          # default: "out"
//! min_count = 100             # default: 100
//! k = 5                       # default: 5
//! keep_namespaces = [0]       # default: [0]
//!
//! [[snapshot]]
//! label = "2006"
//! date = "2006-11-30"
//! dump = "dumps/enwiki-20061130.xml"
//!
//! [[dataset]]
//! name = "aida"
//! path = "gt/aida.jsonl"
//! ```
//!
//! Relative paths are taken relative to the config file's directory.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use serde::Deserialize;

use priorshift::drift::DEFAULT_DEPTH;
use priorshift::index::DEFAULT_MIN_COUNT;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotSpec {
    pub label: String,
    pub date: NaiveDate,
    pub dump: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_namespaces")]
    pub keep_namespaces: BTreeSet<i32>,
    #[serde(default, rename = "snapshot")]
    pub snapshots: Vec<SnapshotSpec>,
    #[serde(default, rename = "dataset")]
    pub datasets: Vec<DatasetSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_min_count() -> u64 {
    DEFAULT_MIN_COUNT
}

fn default_k() -> usize {
    DEFAULT_DEPTH
}

fn default_namespaces() -> BTreeSet<i32> {
    priorshift::dump::default_namespaces()
}

impl WorkspaceConfig {
    pub fn load(path: &Path) -> Result<WorkspaceConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: WorkspaceConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.output_dir = base.join(&config.output_dir);
        for s in &mut config.snapshots {
            s.dump = base.join(&s.dump);
        }
        for d in &mut config.datasets {
            d.path = base.join(&d.path);
        }
        config
            .validate()
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            bail!("min_count must be at least 1");
        }
        if self.k < 1 {
            bail!("k must be at least 1");
        }
        if self.keep_namespaces.is_empty() {
            bail!("keep_namespaces must not be empty");
        }
        let mut labels = HashSet::new();
        for s in &self.snapshots {
            if s.label.is_empty() || !s.label.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c)) {
                bail!(
                    "snapshot label {:?} must be non-empty and use only letters, digits, '.', '_' or '-'",
                    s.label
                );
            }
            if !labels.insert(s.label.as_str()) {
                bail!("duplicate snapshot label {:?}", s.label);
            }
        }
        let mut names = HashSet::new();
        for d in &self.datasets {
            if d.name.is_empty() {
                bail!("dataset name must not be empty");
            }
            if !names.insert(d.name.as_str()) {
                bail!("duplicate dataset name {:?}", d.name);
            }
        }
        Ok(())
    }

    pub fn snapshot(&self, label: &str) -> Option<&SnapshotSpec> {
        self.snapshots.iter().find(|s| s.label == label)
    }

    pub fn index_path(&self, label: &str) -> PathBuf {
        self.output_dir.join(format!("{label}.index.tsv"))
    }

    pub fn catalog_path(&self, label: &str) -> PathBuf {
        self.output_dir.join(format!("{label}.kb.tsv"))
    }
}
