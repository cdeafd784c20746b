//! Prior-only disambiguation: every mention goes to its highest-prior
//! candidate.

use serde::{Deserialize, Serialize};

use crate::index::PriorIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkStatus {
    Linked,
    UnknownMention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub mention: String,
    pub entity: Option<String>,
    pub prior: Option<f64>,
    pub status: LinkStatus,
}

impl LinkResult {
    pub fn is_linked(&self) -> bool {
        self.status == LinkStatus::Linked
    }
}

pub fn link(index: &PriorIndex, mention: &str) -> LinkResult {
    match index.entry(mention) {
        Some(entry) => {
            let top = entry.top();
            LinkResult {
                mention: mention.to_string(),
                entity: Some(top.entity.clone()),
                prior: Some(top.prior),
                status: LinkStatus::Linked,
            }
        }
        None => LinkResult {
            mention: mention.to_string(),
            entity: None,
            prior: None,
            status: LinkStatus::UnknownMention,
        },
    }
}

/// Links each mention independently; output order follows input order.
pub fn link_document<S: AsRef<str>>(index: &PriorIndex, mentions: &[S]) -> Vec<LinkResult> {
    mentions.iter().map(|m| link(index, m.as_ref())).collect()
}
