//! Page title canonicalization.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TitleError {
    #[error("title {raw:?} is empty after normalization")]
    Empty { raw: String },
}

/// Canonical form of a page title, as used for every title comparison in the
/// crate: fragment stripped, underscores read as spaces, whitespace runs
/// collapsed and trimmed, first character uppercased.
///
/// Mention surfaces are *not* passed through here; they keep their case.
pub fn normalize_title(raw: &str) -> Result<String, TitleError> {
    let without_fragment = match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    };

    let mut out = String::with_capacity(without_fragment.len());
    let mut pending_space = false;
    for c in without_fragment.chars() {
        if c == '_' || c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        if out.is_empty() {
            out.extend(c.to_uppercase());
        } else {
            out.push(c);
        }
    }

    if out.is_empty() {
        return Err(TitleError::Empty { raw: raw.to_string() });
    }
    Ok(out)
}

/// True when `title` is already in canonical form.
pub fn is_canonical(title: &str) -> bool {
    normalize_title(title).is_ok_and(|t| t == title)
}
