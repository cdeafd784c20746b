//! Streaming readers for knowledge-base snapshot dumps.
//!
//! Two input shapes are accepted and told apart by their first
//! non-whitespace byte:
//!
//! * a MediaWiki XML export (`<mediawiki><page>...</page></mediawiki>`), of
//!   which only `title`, `ns`, `redirect` and the revision `text` are read;
//! * JSON lines, one `{"title", "ns", "redirect", "text"}` object per line.
//!
//! Either way the reader holds one page at a time, so memory does not grow
//! with the size of the dump.

use std::collections::BTreeSet;
use std::io::BufRead;

use chrono::NaiveDate;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::title::normalize_title;

/// One page of a snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    /// Canonical title.
    pub title: String,
    pub namespace: i32,
    /// Raw redirect target; `Some` exactly for redirect pages.
    pub redirect_target: Option<String>,
    /// Raw wikitext, empty for redirects.
    pub text: String,
}

impl PageRecord {
    pub fn is_redirect(&self) -> bool {
        self.redirect_target.is_some()
    }

    /// A non-redirect page in the main namespace.
    pub fn is_article(&self) -> bool {
        self.namespace == 0 && !self.is_redirect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub label: String,
    pub dump_date: NaiveDate,
    /// Retained non-redirect pages.
    pub page_count: u64,
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("malformed dump at byte {offset} (in <{context}>): {message}")]
    Malformed {
        offset: u64,
        context: String,
        message: String,
    },
    #[error("invalid UTF-8 in dump at byte {offset}")]
    Encoding { offset: u64 },
    #[error("malformed JSON-lines dump at line {line}: {message}")]
    BadLine { line: u64, message: String },
    #[error("keep_namespaces must not be empty")]
    NoNamespaces,
    #[error("I/O error reading dump: {0}")]
    Io(#[from] std::io::Error),
}

/// The namespace set used when the caller does not pick one: articles only.
pub fn default_namespaces() -> BTreeSet<i32> {
    BTreeSet::from([0])
}

/// Opens a dump for streaming. Pages come out of the returned iterator in
/// dump order, restricted to `keep_namespaces`.
pub fn parse_dump<R: BufRead>(mut reader: R, keep_namespaces: &BTreeSet<i32>) -> Result<DumpReader<R>, DumpError> {
    if keep_namespaces.is_empty() {
        return Err(DumpError::NoNamespaces);
    }
    let json = loop {
        let buf = reader.fill_buf()?;
        if buf.is_empty() {
            break false;
        }
        match buf.iter().position(|b| !b.is_ascii_whitespace()) {
            Some(pos) => break buf[pos] == b'{',
            None => {
                let len = buf.len();
                reader.consume(len);
            }
        }
    };
    let source = if json {
        Source::Json(JsonPages {
            reader,
            line: 0,
            offset: 0,
            buf: Vec::new(),
        })
    } else {
        let mut xml = Reader::from_reader(reader);
        xml.config_mut().trim_text(false);
        Source::Xml(XmlPages {
            reader: xml,
            buf: Vec::new(),
            stack: Vec::new(),
        })
    };
    Ok(DumpReader {
        source,
        keep: keep_namespaces.clone(),
        page_count: 0,
        largest_page: 0,
        done: false,
    })
}

pub struct DumpReader<R: BufRead> {
    source: Source<R>,
    keep: BTreeSet<i32>,
    page_count: u64,
    largest_page: usize,
    done: bool,
}

impl<R: BufRead> DumpReader<R> {
    /// Non-redirect pages yielded so far.
    pub fn page_count(&self) -> u64 {
        self.page_count
    }

    /// Byte length of the largest page text yielded so far.
    pub fn largest_page(&self) -> usize {
        self.largest_page
    }

    pub fn meta(&self, label: impl Into<String>, dump_date: NaiveDate) -> SnapshotMeta {
        SnapshotMeta {
            label: label.into(),
            dump_date,
            page_count: self.page_count,
        }
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<PageRecord, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let next = match &mut self.source {
            Source::Xml(x) => x.next_page(&self.keep),
            Source::Json(j) => j.next_page(&self.keep),
        };
        match next {
            Ok(Some(page)) => {
                if !page.is_redirect() {
                    self.page_count += 1;
                }
                self.largest_page = self.largest_page.max(page.text.len());
                Some(Ok(page))
            }
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

enum Source<R: BufRead> {
    Xml(XmlPages<R>),
    Json(JsonPages<R>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Ns,
    Text,
}

#[derive(Default)]
struct PartialPage {
    title: Option<String>,
    ns: Option<String>,
    redirect: Option<String>,
    text: String,
    capture: Option<Field>,
    field_buf: String,
    /// Set once `ns` is known to be outside the kept set, so the text is not
    /// buffered.
    skip: bool,
}

struct XmlPages<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    stack: Vec<Vec<u8>>,
}

impl<R: BufRead> XmlPages<R> {
    fn malformed(&self, message: impl Into<String>) -> DumpError {
        DumpError::Malformed {
            offset: self.reader.buffer_position(),
            context: self.context(),
            message: message.into(),
        }
    }

    fn context(&self) -> String {
        if self.stack.is_empty() {
            return "document".into();
        }
        self.stack
            .iter()
            .map(|n| String::from_utf8_lossy(n).into_owned())
            .collect::<Vec<_>>()
            .join("/")
    }

    fn xml_error(&self, err: quick_xml::Error) -> DumpError {
        match err {
            quick_xml::Error::Encoding(_) => DumpError::Encoding {
                offset: self.reader.error_position(),
            },
            quick_xml::Error::Io(io) if io.kind() == std::io::ErrorKind::InvalidData => DumpError::Encoding {
                offset: self.reader.error_position(),
            },
            other => DumpError::Malformed {
                offset: self.reader.error_position(),
                context: self.context(),
                message: other.to_string(),
            },
        }
    }

    fn in_page(&self) -> bool {
        self.stack.iter().any(|n| n == b"page")
    }

    /// Name of the element enclosing the one just opened (or the current one
    /// for text events).
    fn parent_is(&self, name: &[u8]) -> bool {
        self.stack.len() >= 2 && self.stack[self.stack.len() - 2] == name
    }

    fn next_page(&mut self, keep: &BTreeSet<i32>) -> Result<Option<PageRecord>, DumpError> {
        let mut page: Option<PartialPage> = None;
        let mut buf = std::mem::take(&mut self.buf);
        let result = self.read_page(&mut page, &mut buf, keep);
        self.buf = buf;
        result
    }

    fn read_page(
        &mut self,
        page: &mut Option<PartialPage>,
        buf: &mut Vec<u8>,
        keep: &BTreeSet<i32>,
    ) -> Result<Option<PageRecord>, DumpError> {
        loop {
            buf.clear();
            let event = match self.reader.read_event_into(buf) {
                Ok(ev) => ev,
                Err(e) => return Err(self.xml_error(e)),
            };
            match event {
                Event::Start(start) => {
                    let name = start.name().as_ref().to_vec();
                    self.stack.push(name);
                    let name = self.stack.last().unwrap().as_slice();
                    match name {
                        b"page" => {
                            if page.is_some() {
                                return Err(self.malformed("nested <page>"));
                            }
                            *page = Some(PartialPage::default());
                        }
                        b"title" | b"ns" if self.parent_is(b"page") => {
                            let p = page.as_mut().expect("parent is page");
                            p.capture = Some(if name == b"title" { Field::Title } else { Field::Ns });
                            p.field_buf.clear();
                        }
                        b"text" if self.parent_is(b"revision") && self.in_page() => {
                            if let Some(p) = page.as_mut() {
                                p.text.clear();
                                p.capture = Some(Field::Text);
                            }
                        }
                        b"redirect" if self.parent_is(b"page") => {
                            let target = self.redirect_title(&start)?;
                            page.as_mut().expect("parent is page").redirect = Some(target);
                        }
                        _ => {}
                    }
                }
                Event::Empty(empty) => {
                    if empty.name().as_ref() == b"redirect" && self.stack.last().is_some_and(|n| n == b"page") {
                        let target = self.redirect_title(&empty)?;
                        if let Some(p) = page.as_mut() {
                            p.redirect = Some(target);
                        }
                    }
                }
                Event::Text(text) => {
                    if let Some(p) = page.as_mut() {
                        if let Some(field) = p.capture {
                            if field == Field::Text && p.skip {
                                continue;
                            }
                            let s = text.unescape().map_err(|e| self.xml_error(e))?;
                            match field {
                                Field::Text => p.text.push_str(&s),
                                _ => p.field_buf.push_str(&s),
                            }
                        }
                    }
                }
                Event::CData(data) => {
                    if let Some(p) = page.as_mut() {
                        if let Some(field) = p.capture {
                            if field == Field::Text && p.skip {
                                continue;
                            }
                            let s = std::str::from_utf8(&data).map_err(|_| DumpError::Encoding {
                                offset: self.reader.buffer_position(),
                            })?;
                            match field {
                                Field::Text => p.text.push_str(s),
                                _ => p.field_buf.push_str(s),
                            }
                        }
                    }
                }
                Event::End(end) => {
                    let name = end.name().as_ref().to_vec();
                    match name.as_slice() {
                        b"title" | b"ns" | b"text" => {
                            if let Some(p) = page.as_mut() {
                                match p.capture.take() {
                                    Some(Field::Title) => p.title = Some(std::mem::take(&mut p.field_buf)),
                                    Some(Field::Ns) => {
                                        let raw = std::mem::take(&mut p.field_buf);
                                        let ns: i32 = raw.trim().parse().map_err(|_| {
                                            self.malformed(format!("namespace {raw:?} is not an integer"))
                                        })?;
                                        p.skip = !keep.contains(&ns);
                                        p.ns = Some(raw);
                                    }
                                    _ => {}
                                }
                            }
                        }
                        b"page" => {
                            let finished = page.take().ok_or_else(|| self.malformed("</page> without <page>"))?;
                            let record = self.finish(finished)?;
                            self.stack.pop();
                            if keep.contains(&record.namespace) {
                                return Ok(Some(record));
                            }
                            continue;
                        }
                        _ => {}
                    }
                    self.stack.pop();
                }
                Event::Eof => {
                    if page.is_some() {
                        return Err(self.malformed("unexpected end of dump inside <page>"));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }

    fn redirect_title(&self, element: &BytesStart<'_>) -> Result<String, DumpError> {
        let attr = element
            .try_get_attribute("title")
            .map_err(|e| self.xml_error(e.into()))?
            .ok_or_else(|| self.malformed("<redirect> without a title attribute"))?;
        let value = attr.unescape_value().map_err(|e| self.xml_error(e))?;
        Ok(value.into_owned())
    }

    fn finish(&self, page: PartialPage) -> Result<PageRecord, DumpError> {
        let raw_title = page.title.ok_or_else(|| self.malformed("<page> without <title>"))?;
        let ns = page
            .ns
            .ok_or_else(|| self.malformed(format!("page {raw_title:?} has no <ns>")))?;
        let namespace: i32 = ns.trim().parse().expect("validated when </ns> was read");
        let title = normalize_title(&raw_title).map_err(|e| self.malformed(e.to_string()))?;
        Ok(make_record(title, namespace, page.redirect, page.text))
    }
}

fn make_record(title: String, namespace: i32, redirect: Option<String>, text: String) -> PageRecord {
    let redirect = redirect.or_else(|| redirect_from_text(&text));
    let text = if redirect.is_some() { String::new() } else { text };
    PageRecord {
        title,
        namespace,
        redirect_target: redirect,
        text,
    }
}

/// Older exports carry no `<redirect>` element; the page text then starts
/// with `#REDIRECT [[Target]]`.
fn redirect_from_text(text: &str) -> Option<String> {
    let rest = text.trim_start();
    let keyword = rest.get(..9)?;
    if !keyword.eq_ignore_ascii_case("#redirect") {
        return None;
    }
    let rest = rest[9..].trim_start();
    let rest = rest.strip_prefix(':').unwrap_or(rest).trim_start();
    let inner = rest.strip_prefix("[[")?;
    let end = inner.find("]]")?;
    let target = inner[..end].split('|').next().unwrap_or("");
    if target.trim().is_empty() {
        None
    } else {
        Some(target.to_string())
    }
}

struct JsonPages<R: BufRead> {
    reader: R,
    line: u64,
    offset: u64,
    buf: Vec<u8>,
}

#[derive(Deserialize)]
struct JsonPage {
    title: String,
    ns: i32,
    #[serde(default)]
    redirect: Option<String>,
    #[serde(default)]
    text: String,
}

impl<R: BufRead> JsonPages<R> {
    fn next_page(&mut self, keep: &BTreeSet<i32>) -> Result<Option<PageRecord>, DumpError> {
        loop {
            self.buf.clear();
            let start = self.offset;
            let n = self.reader.read_until(b'\n', &mut self.buf)?;
            if n == 0 {
                return Ok(None);
            }
            self.offset += n as u64;
            self.line += 1;
            let line = std::str::from_utf8(&self.buf).map_err(|e| DumpError::Encoding {
                offset: start + e.valid_up_to() as u64,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let page: JsonPage = serde_json::from_str(line).map_err(|e| DumpError::BadLine {
                line: self.line,
                message: e.to_string(),
            })?;
            if !keep.contains(&page.ns) {
                continue;
            }
            let title = normalize_title(&page.title).map_err(|e| DumpError::BadLine {
                line: self.line,
                message: e.to_string(),
            })?;
            return Ok(Some(make_record(title, page.ns, page.redirect, page.text)));
        }
    }
}
