//! Random corpora with a deliberately hostile mix of markup.

use std::io::{self, Write};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use super::oracle::OraclePage;

const TITLES: &[&str] = &[
    "James T. Kirk",
    "Andy_Kirk (footballer)",
    "amazon River",
    "Amazon.com",
    "Hillary Rodham Clinton",
    "Hillary Clinton",
    "Obama, Fukui",
    "Barack Obama",
    "Al Capone",
    "Al Capone (film)",
    "Ωmega",
    "ßtraße",
    "Doctor Watson",
    "James D. Watson",
    "Zed",
    "AT&T",
    "Rock & Roll",
];

const SURFACES: &[&str] = &[
    "Kirk",
    "kirk",
    "Amazon",
    "Obama",
    " Watson ",
    "Ω",
    "Al Capone",
    "AT&T",
    "R&R <3",
];

fn pick<'a>(rng: &mut StdRng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

fn title_variant(rng: &mut StdRng) -> String {
    let t = pick(rng, TITLES);
    match rng.gen_range(0..6) {
        0 => t.replace(' ', "_"),
        1 => format!("  {t} "),
        2 => format!("{t}#Section"),
        3 => {
            let mut c = t.chars();
            let first = c.next().unwrap();
            first.to_lowercase().chain(c).collect()
        }
        _ => t.to_string(),
    }
}

fn token(rng: &mut StdRng) -> String {
    let t = title_variant(rng);
    let s = pick(rng, SURFACES);
    match rng.gen_range(0..30) {
        0..=5 => format!("[[{t}|{s}]]"),
        6..=8 => format!("[[{t}]]"),
        9 => format!("[[File:Pic.jpg|thumb|see [[{t}|{s}]] here]]"),
        10 => format!("[[Image:x.png|[[{t}]]]]"),
        11 => format!("[[de:{t}]]"),
        12 => format!("[[Category:{t}]]"),
        13 => format!("<!-- [[{t}|{s}]] -->"),
        14 => format!("<nowiki>[[{t}]]</NOWIKI>"),
        15 => "<nowiki/>".to_string(),
        16 => "[[".to_string(),
        17 => "]]".to_string(),
        18 => format!("[[[{t}]]]"),
        19 => "|".to_string(),
        20 => format!("[[{t}|]]"),
        21 => format!("[[|{s}]]"),
        22 => "{{Infobox|x=[[y]]}}".to_string(),
        23 => format!("[[{t}<b>|{s}]]"),
        24 => "<!--".to_string(),
        25 => "<nowiki>".to_string(),
        26 => format!("[[  #frag |{s}]]"),
        27 => format!("[[Media:{t}|{s}]]"),
        _ => pick(rng, &[" word ", " & ", " <i>x</i> ", " Ünïcödé ", "\n", " [single] "]).to_string(),
    }
}

fn text(rng: &mut StdRng, max_tokens: usize) -> String {
    let n = rng.gen_range(0..=max_tokens);
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(&token(rng));
        if rng.gen_bool(0.05) {
            s.push_str(pick(rng, &["-->", "</nowiki>"]));
        }
    }
    s
}

/// A corpus of distinct-titled pages: articles, redirects (including chains,
/// cycles and self-redirects) and pages in non-article namespaces.
pub fn random_corpus(rng: &mut StdRng, max_pages: usize, max_tokens: usize) -> Vec<OraclePage> {
    let mut titles: Vec<&str> = TITLES.to_vec();
    titles.shuffle(rng);
    let n = rng.gen_range(1..=max_pages.min(titles.len()));
    titles
        .into_iter()
        .take(n)
        .map(|title| {
            let ns = *[0, 0, 0, 0, 1, 14].choose(rng).unwrap();
            let redirect = rng.gen_bool(0.25).then(|| title_variant(rng));
            let title = if ns == 0 {
                title.to_string()
            } else {
                format!("Talk:{title}")
            };
            let text = if redirect.is_some() {
                String::new()
            } else {
                text(rng, max_tokens)
            };
            OraclePage {
                title,
                ns,
                redirect,
                text,
            }
        })
        .collect()
}

pub fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn write_xml_page<W: Write>(out: &mut W, id: usize, page: &OraclePage) -> io::Result<()> {
    write!(
        out,
        "  <page>\n    <title>{}</title>\n    <ns>{}</ns>\n    <id>{id}</id>\n",
        xml_escape(&page.title),
        page.ns
    )?;
    if let Some(r) = &page.redirect {
        writeln!(out, "    <redirect title=\"{}\" />", xml_escape(r))?;
    }
    if page.text.is_empty() {
        writeln!(out, "    <revision><id>{id}</id><text bytes=\"0\" /></revision>")?;
    } else {
        write!(
            out,
            "    <revision>\n      <id>{id}</id>\n      <text bytes=\"{}\" xml:space=\"preserve\">{}</text>\n    </revision>\n",
            page.text.len(),
            xml_escape(&page.text)
        )?;
    }
    writeln!(out, "  </page>")
}

pub const XML_HEAD: &str = "<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.10/\" version=\"0.10\">\n  <siteinfo><sitename>Synth</sitename></siteinfo>\n";
pub const XML_TAIL: &str = "</mediawiki>\n";

pub fn to_xml(pages: &[OraclePage]) -> String {
    let mut out = Vec::from(XML_HEAD);
    for (i, p) in pages.iter().enumerate() {
        write_xml_page(&mut out, i + 1, p).unwrap();
    }
    out.extend_from_slice(XML_TAIL.as_bytes());
    String::from_utf8(out).unwrap()
}

pub fn to_jsonl(pages: &[OraclePage]) -> String {
    let mut out = String::new();
    for p in pages {
        let v = serde_json::json!({ "title": p.title, "ns": p.ns, "redirect": p.redirect, "text": p.text });
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}
