//! A deliberately naive reimplementation of dump -> prior index, sharing no
//! code with the library. Slow, allocation-happy and only as lenient as the
//! synthetic corpora need.

use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Debug, Clone)]
pub struct OraclePage {
    pub title: String,
    pub ns: i32,
    pub redirect: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntry {
    pub total: u64,
    /// (entity, count, prior), best first.
    pub candidates: Vec<(String, u64, f64)>,
}

pub type OracleIndex = BTreeMap<String, OracleEntry>;

fn between<'a>(s: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let a = s.find(open)? + open.len();
    let b = s[a..].find(close)? + a;
    Some(&s[a..b])
}

fn unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

pub fn pages(xml: &str) -> Vec<OraclePage> {
    let mut out = Vec::new();
    for chunk in xml.split("<page>").skip(1) {
        let body = &chunk[..chunk.find("</page>").expect("unterminated page")];
        let title = unescape(between(body, "<title>", "</title>").unwrap());
        let ns: i32 = between(body, "<ns>", "</ns>").unwrap().trim().parse().unwrap();
        let redirect = between(body, "<redirect title=\"", "\"").map(unescape);
        let text = match body.find("<text") {
            None => String::new(),
            Some(t) => {
                let tag_end = t + body[t..].find('>').unwrap();
                if body[..tag_end].ends_with('/') {
                    String::new()
                } else {
                    let rest = &body[tag_end + 1..];
                    unescape(&rest[..rest.find("</text>").unwrap()])
                }
            }
        };
        out.push(OraclePage {
            title,
            ns,
            redirect,
            text,
        });
    }
    out
}

pub fn normalize(raw: &str) -> Option<String> {
    let base = raw.split('#').next().unwrap();
    let words: Vec<&str> = base
        .split(|c: char| c == '_' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .collect();
    let joined = words.join(" ");
    let mut chars = joined.chars();
    let first = chars.next()?;
    Some(first.to_uppercase().chain(chars).collect())
}

fn starts_with_ci(s: &[u8], prefix: &str) -> bool {
    s.len() >= prefix.len() && s[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

fn find_from(s: &[u8], from: usize, needle: &str, ci: bool) -> Option<usize> {
    let n = needle.len();
    (from..s.len().saturating_sub(n - 1)).find(|&i| {
        if ci {
            s[i..i + n].eq_ignore_ascii_case(needle.as_bytes())
        } else {
            &s[i..i + n] == needle.as_bytes()
        }
    })
}

/// Tag length of `<nowiki>`, `<nowiki/>`, `<nowiki  />` at `s`, and whether
/// it self-closes.
fn nowiki_tag(s: &[u8]) -> Option<(usize, bool)> {
    if !starts_with_ci(s, "<nowiki") {
        return None;
    }
    let mut j = 7;
    while j < s.len() && (s[j] == b' ' || s[j] == b'\t') {
        j += 1;
    }
    if s.get(j) == Some(&b'>') {
        Some((j + 1, false))
    } else if s.get(j) == Some(&b'/') && s.get(j + 1) == Some(&b'>') {
        Some((j + 2, true))
    } else {
        None
    }
}

fn visible(text: &str) -> Vec<u8> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i..].starts_with(b"<!--") {
            match find_from(b, i + 4, "-->", false) {
                Some(e) => i = e + 3,
                None => break,
            }
        } else if let Some((len, selfclose)) = nowiki_tag(&b[i..]) {
            if selfclose {
                i += len;
            } else {
                match find_from(b, i + len, "</nowiki>", true) {
                    Some(e) => i = e + 9,
                    None => break,
                }
            }
        } else {
            out.push(b[i]);
            i += 1;
        }
    }
    out
}

struct LinkNode {
    start: usize,
    end: usize,
    children: Vec<LinkNode>,
}

/// Parses a bracket sequence starting at `i`. Returns where it stopped,
/// whether a closing `]]` ended it, and the links found at this level.
fn parse_seq(b: &[u8], mut i: usize, nested: bool) -> (usize, bool, Vec<LinkNode>) {
    let mut links = Vec::new();
    while i < b.len() {
        if b[i..].starts_with(b"[[") {
            if b.get(i + 2) == Some(&b'[') {
                i += 1;
                continue;
            }
            let (j, closed, kids) = parse_seq(b, i + 2, true);
            if closed {
                links.push(LinkNode {
                    start: i + 2,
                    end: j - 2,
                    children: kids,
                });
            } else {
                links.extend(kids);
            }
            i = j;
        } else if nested && b[i..].starts_with(b"]]") {
            return (i + 2, true, links);
        } else {
            i += 1;
        }
    }
    (i, false, links)
}

fn excluded(target: &str) -> bool {
    let Some(colon) = target.find(':') else { return false };
    let prefix = &target[..colon];
    let t = prefix.trim().to_ascii_lowercase();
    if ["file", "image", "category", "media"].contains(&t.as_str()) {
        return true;
    }
    (prefix.len() == 2 || prefix.len() == 3) && prefix.chars().all(|c| c.is_ascii_lowercase())
}

fn emit(b: &[u8], node: &LinkNode, out: &mut Vec<(String, String)>) {
    if !node.children.is_empty() {
        for kid in &node.children {
            emit(b, kid, out);
        }
        return;
    }
    let content = String::from_utf8(b[node.start..node.end].to_vec()).unwrap();
    let mut parts = content.splitn(2, '|');
    let target = parts.next().unwrap().to_string();
    let surface = parts.next().unwrap_or(&target).trim().to_string();
    if excluded(&target) || target.chars().any(|c| "[]{}<>|".contains(c)) {
        return;
    }
    let Some(target) = normalize(&target) else { return };
    if !surface.is_empty() {
        out.push((surface, target));
    }
}

/// (surface, canonical target) pairs, in document order.
pub fn anchors(text: &str) -> Vec<(String, String)> {
    let b = visible(text);
    let (_, _, links) = parse_seq(&b, 0, false);
    let mut out = Vec::new();
    for link in &links {
        emit(&b, link, &mut out);
    }
    out
}

fn follow(redirects: &HashMap<String, String>, start: &str) -> Option<String> {
    let mut seen = vec![start.to_string()];
    let mut cur = start.to_string();
    for _ in 0..10 {
        match redirects.get(&cur) {
            None => return Some(cur),
            Some(next) => {
                if seen.contains(next) {
                    return None;
                }
                seen.push(next.clone());
                cur = next.clone();
            }
        }
    }
    if redirects.contains_key(&cur) {
        None
    } else {
        Some(cur)
    }
}

pub fn index_from_pages(pages: &[OraclePage], keep: &[i32], min_count: u64) -> OracleIndex {
    let mut redirects = HashMap::new();
    let mut articles = HashSet::new();
    let mut raw: HashMap<String, HashMap<String, u64>> = HashMap::new();
    for p in pages.iter().filter(|p| keep.contains(&p.ns)) {
        let title = normalize(&p.title).unwrap();
        if let Some(r) = &p.redirect {
            if let Some(to) = normalize(r) {
                if to != title {
                    redirects.insert(title, to);
                }
            }
            continue;
        }
        for (s, t) in anchors(&p.text) {
            *raw.entry(s).or_default().entry(t).or_default() += 1;
        }
        if p.ns == 0 {
            articles.insert(title);
        }
    }

    let mut index = BTreeMap::new();
    for (surface, targets) in raw {
        let anchor_total: u64 = targets.values().sum();
        if anchor_total < min_count {
            continue;
        }
        let mut resolved: HashMap<String, u64> = HashMap::new();
        for (t, n) in targets {
            if let Some(r) = follow(&redirects, &t) {
                if articles.contains(&r) {
                    *resolved.entry(r).or_default() += n;
                }
            }
        }
        let linked: u64 = resolved.values().sum();
        if linked == 0 {
            continue;
        }
        let mut candidates: Vec<(String, u64, f64)> = resolved
            .into_iter()
            .map(|(e, n)| (e, n, n as f64 / linked as f64))
            .collect();
        candidates.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        index.insert(
            surface,
            OracleEntry {
                total: linked,
                candidates,
            },
        );
    }
    index
}

pub fn index_from_xml(xml: &str, keep: &[i32], min_count: u64) -> OracleIndex {
    index_from_pages(&pages(xml), keep, min_count)
}
