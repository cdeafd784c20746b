use std::collections::HashMap;

use thiserror::Error;

use crate::dump::PageRecord;
use crate::title::normalize_title;

/// Longest redirect chain [`RedirectMap::resolve`] will follow.
pub const MAX_REDIRECT_DEPTH: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("redirect cycle: {}", chain.join(" -> "))]
    Cycle { chain: Vec<String> },
    #[error("redirect chain longer than {MAX_REDIRECT_DEPTH}: {}", chain.join(" -> "))]
    TooDeep { chain: Vec<String> },
}

impl ResolveError {
    pub fn chain(&self) -> &[String] {
        match self {
            ResolveError::Cycle { chain } | ResolveError::TooDeep { chain } => chain,
        }
    }
}

/// Canonical redirect title -> canonical target title for one snapshot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RedirectMap {
    map: HashMap<String, String>,
}

impl RedirectMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `from -> to`. Self-redirects are ignored; returns whether the
    /// entry was stored.
    pub fn insert(&mut self, from: String, to: String) -> bool {
        if from == to {
            return false;
        }
        self.map.insert(from, to);
        true
    }

    pub fn get(&self, title: &str) -> Option<&str> {
        self.map.get(title).map(String::as_str)
    }

    pub fn contains(&self, title: &str) -> bool {
        self.map.contains_key(title)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Follows `title` through the map until it reaches a title that is not
    /// itself a redirect. Titles that are not keys come back unchanged.
    pub fn resolve<'a>(&'a self, title: &'a str) -> Result<&'a str, ResolveError> {
        let mut current = title;
        let mut chain: Vec<&str> = vec![title];
        for _ in 0..MAX_REDIRECT_DEPTH {
            match self.map.get(current) {
                None => return Ok(current),
                Some(next) => {
                    if chain.contains(&next.as_str()) {
                        chain.push(next);
                        return Err(ResolveError::Cycle { chain: owned(&chain) });
                    }
                    chain.push(next);
                    current = next;
                }
            }
        }
        if self.map.contains_key(current) {
            return Err(ResolveError::TooDeep { chain: owned(&chain) });
        }
        Ok(current)
    }

    /// Like [`resolve`](Self::resolve), but falls back to the input title when
    /// the chain is broken.
    pub fn resolve_or_self<'a>(&'a self, title: &'a str) -> &'a str {
        self.resolve(title).unwrap_or(title)
    }
}

impl FromIterator<(String, String)> for RedirectMap {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        let mut map = RedirectMap::new();
        for (from, to) in iter {
            map.insert(from, to);
        }
        map
    }
}

fn owned(chain: &[&str]) -> Vec<String> {
    chain.iter().map(|s| s.to_string()).collect()
}

/// Collects every redirect page of one snapshot into a map. Targets are
/// normalized; targets that normalize to nothing and self-redirects are
/// dropped.
pub fn build_redirect_map<'a, I>(pages: I) -> RedirectMap
where
    I: IntoIterator<Item = &'a PageRecord>,
{
    let mut map = RedirectMap::new();
    for page in pages {
        add_redirect_page(&mut map, page);
    }
    map
}

pub(crate) fn add_redirect_page(map: &mut RedirectMap, page: &PageRecord) {
    if let Some(raw) = &page.redirect_target {
        if let Ok(target) = normalize_title(raw) {
            map.insert(page.title.clone(), target);
        }
    }
}
