//! Wikilink anchor mining.
//!
//! Only the link syntax itself is understood. Templates are left unexpanded
//! and everything outside `[[...]]` is plain text, except for HTML comments
//! and `<nowiki>` spans, which hide whatever they contain.

use serde::{Deserialize, Serialize};

use crate::title::normalize_title;

/// One `[[target|surface]]` occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Anchor {
    /// Displayed text, trimmed, case preserved.
    pub surface: String,
    /// Canonical target title, before redirect resolution.
    pub target: String,
    /// Title of the page holding the link.
    pub source: String,
}

/// Counters for input the extractor had to be lenient about.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// `[[` with no matching `]]`.
    pub unclosed_links: u64,
    /// Links dropped for an excluded namespace prefix.
    pub excluded_links: u64,
    /// Links whose target was empty or not a valid title.
    pub invalid_targets: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.unclosed_links += other.unclosed_links;
        self.excluded_links += other.excluded_links;
        self.invalid_targets += other.invalid_targets;
    }
}

const EXCLUDED_NAMESPACES: [&str; 4] = ["file", "image", "category", "media"];

/// Characters MediaWiki never allows in a title.
const INVALID_TITLE_CHARS: [char; 7] = ['[', ']', '{', '}', '<', '>', '|'];

/// True for link targets that point into a non-entity namespace: files,
/// images, categories, media, and interlanguage links (`de:`, `simple`-style
/// prefixes are not matched, only two or three lowercase letters).
pub fn is_excluded_target(raw_target: &str) -> bool {
    let Some(colon) = raw_target.find(':') else {
        return false;
    };
    let prefix = &raw_target[..colon];
    let trimmed = prefix.trim();
    if EXCLUDED_NAMESPACES.iter().any(|ns| trimmed.eq_ignore_ascii_case(ns)) {
        return true;
    }
    (2..=3).contains(&prefix.len()) && prefix.bytes().all(|b| b.is_ascii_lowercase())
}

/// Mines every retained wikilink of `text`, in document order.
pub fn extract_anchors(text: &str, source: &str) -> Vec<Anchor> {
    let mut diagnostics = Diagnostics::default();
    extract_anchors_with(text, source, &mut diagnostics)
}

pub fn extract_anchors_with(text: &str, source: &str, diagnostics: &mut Diagnostics) -> Vec<Anchor> {
    let mut out = Vec::new();
    visit_anchors(text, diagnostics, |surface, target| {
        out.push(Anchor {
            surface: surface.to_string(),
            target,
            source: source.to_string(),
        })
    });
    out
}

/// Calls `f(surface, canonical_target)` for every retained wikilink, in
/// document order, without materializing [`Anchor`]s.
pub fn visit_anchors<F: FnMut(&str, String)>(text: &str, diagnostics: &mut Diagnostics, mut f: F) {
    let visible = strip_hidden(text);
    scan_links(&visible, &mut f, diagnostics);
}

type Sink<'a> = dyn FnMut(&str, String) + 'a;

/// Removes `<!-- ... -->` comments and `<nowiki>...</nowiki>` spans in one
/// left-to-right pass. An unterminated comment or nowiki hides the rest of
/// the text; `<nowiki/>` hides nothing.
fn strip_hidden(text: &str) -> std::borrow::Cow<'_, str> {
    if !text.contains('<') {
        return text.into();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(lt) = rest.find('<') {
        out.push_str(&rest[..lt]);
        let tail = &rest[lt..];
        if let Some(body) = tail.strip_prefix("<!--") {
            match body.find("-->") {
                Some(end) => rest = &body[end + 3..],
                None => return out.into(),
            }
        } else if let Some(len) = nowiki_open(tail) {
            let after = &tail[len..];
            if tail[..len].ends_with("/>") {
                rest = after;
                continue;
            }
            match find_ascii_ci(after, "</nowiki>") {
                Some(end) => rest = &after[end + "</nowiki>".len()..],
                None => return out.into(),
            }
        } else {
            out.push('<');
            rest = &tail[1..];
        }
    }
    out.push_str(rest);
    out.into()
}

/// Length of a `<nowiki>`, `<nowiki/>` or `<nowiki />` tag at the start of
/// `s`.
fn nowiki_open(s: &str) -> Option<usize> {
    let name = s.get(1..7)?;
    if !name.eq_ignore_ascii_case("nowiki") {
        return None;
    }
    let after = &s[7..];
    let trimmed = after.trim_start_matches([' ', '\t']);
    let ws = after.len() - trimmed.len();
    if trimmed.starts_with('>') {
        Some(7 + ws + 1)
    } else if trimmed.starts_with("/>") {
        Some(7 + ws + 2)
    } else {
        None
    }
}

fn find_ascii_ci(haystack: &str, needle: &str) -> Option<usize> {
    let n = needle.len();
    haystack
        .as_bytes()
        .windows(n)
        .position(|w| w.eq_ignore_ascii_case(needle.as_bytes()))
}

fn scan_links(text: &str, out: &mut Sink<'_>, diagnostics: &mut Diagnostics) {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] != b'[' || bytes[i + 1] != b'[' {
            i += 1;
            continue;
        }
        // In `[[[x]]]` the first bracket is literal.
        if bytes.get(i + 2) == Some(&b'[') {
            i += 1;
            continue;
        }
        match matching_close(bytes, i + 2) {
            Some(close) => {
                handle_link(&text[i + 2..close], out, diagnostics);
                i = close + 2;
            }
            None => {
                diagnostics.unclosed_links += 1;
                i += 2;
            }
        }
    }
}

/// Index of the `]]` closing a link whose content starts at `start`, taking
/// nested `[[...]]` into account.
fn matching_close(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 1usize;
    let mut j = start;
    while j + 1 < bytes.len() {
        match (bytes[j], bytes[j + 1]) {
            (b'[', b'[') => {
                depth += 1;
                j += 2;
            }
            (b']', b']') => {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
                j += 2;
            }
            _ => j += 1,
        }
    }
    None
}

fn handle_link(content: &str, out: &mut Sink<'_>, diagnostics: &mut Diagnostics) {
    // A link wrapping other links (a file caption, typically) is not itself
    // an anchor, but the links inside it are.
    if content.contains("[[") {
        if is_excluded_target(content.split('|').next().unwrap_or("")) {
            diagnostics.excluded_links += 1;
        } else {
            diagnostics.invalid_targets += 1;
        }
        scan_links(content, out, diagnostics);
        return;
    }

    let (raw_target, piped) = match content.find('|') {
        Some(bar) => (&content[..bar], Some(&content[bar + 1..])),
        None => (content, None),
    };
    if is_excluded_target(raw_target) {
        diagnostics.excluded_links += 1;
        return;
    }
    if raw_target.contains(INVALID_TITLE_CHARS) {
        diagnostics.invalid_targets += 1;
        return;
    }
    let Ok(target) = normalize_title(raw_target) else {
        diagnostics.invalid_targets += 1;
        return;
    };
    let surface = piped.unwrap_or(raw_target).trim();
    if surface.is_empty() {
        return;
    }
    out(surface, target);
}
