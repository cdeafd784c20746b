//! Shared pieces of the line-oriented file formats: field escaping, prior
//! formatting, and the `#sha256` trailer.

use sha2::{Digest, Sha256};

pub(crate) const CHECKSUM_PREFIX: &str = "#sha256 ";

/// Escapes the characters that would break a tab/line-separated field.
pub(crate) fn escape(field: &str) -> std::borrow::Cow<'_, str> {
    if !field.contains(['\\', '\t', '\n', '\r']) {
        return field.into();
    }
    let mut out = String::with_capacity(field.len() + 4);
    for c in field.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.into()
}

pub(crate) fn unescape(field: &str) -> Result<String, String> {
    if !field.contains('\\') {
        return Ok(field.to_string());
    }
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape \\{other}")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

/// Decimal rendering of `p` rounded to 12 significant digits, trailing zeros
/// removed.
pub(crate) fn format_prior(p: f64) -> String {
    let sci = format!("{p:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let int_digits = exp + 1;
    let mut out = if int_digits <= 0 {
        format!("0.{}{}", "0".repeat((-int_digits) as usize), digits)
    } else if int_digits as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(int_digits as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(int_digits as usize);
        format!("{int}.{frac}")
    };
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Appends the checksum trailer line covering everything already in `body`.
pub(crate) fn seal(body: &mut String) {
    let digest = sha256_hex(body.as_bytes());
    body.push_str(CHECKSUM_PREFIX);
    body.push_str(&digest);
    body.push('\n');
}

pub(crate) enum Unsealed<'a> {
    Ok {
        body: &'a str,
    },
    /// No trailer line; `last_line` is the 1-based number of the last line.
    MissingTrailer {
        last_line: usize,
    },
    Mismatch {
        expected: String,
        actual: String,
    },
}

/// Splits off and verifies the checksum trailer.
pub(crate) fn unseal(content: &str) -> Unsealed<'_> {
    let trimmed = content.strip_suffix('\n').unwrap_or(content);
    let (body, last) = match trimmed.rfind('\n') {
        Some(pos) => (&content[..pos + 1], &trimmed[pos + 1..]),
        None => ("", trimmed),
    };
    let Some(expected) = last.strip_prefix(CHECKSUM_PREFIX) else {
        return Unsealed::MissingTrailer {
            last_line: content.lines().count().max(1),
        };
    };
    let actual = sha256_hex(body.as_bytes());
    if actual != expected {
        return Unsealed::Mismatch {
            expected: expected.to_string(),
            actual,
        };
    }
    Unsealed::Ok { body }
}
