//! Line-delimited JSON with line numbers and byte offsets in every error.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{read_text, write_text};
use crate::{Error, Result};

/// One parsed line: 1-based line number, byte offset of its first byte and
/// the value.
#[derive(Debug)]
pub struct Line<T> {
    pub line: usize,
    pub offset: usize,
    pub value: T,
}

/// Parses every non-blank line of `text` as a `T`.
pub fn parse_str<T: DeserializeOwned>(text: &str, path: &Path) -> Result<Vec<Line<T>>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let line = raw.trim_end_matches(['\n', '\r']);
        if !line.trim().is_empty() {
            let value = serde_json::from_str(line).map_err(|e| Error::Format {
                path: path.display().to_string(),
                line: i + 1,
                offset: offset + e.column().saturating_sub(1),
                message: e.to_string(),
            })?;
            out.push(Line {
                line: i + 1,
                offset,
                value,
            });
        }
        offset += raw.len();
    }
    Ok(out)
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<Line<T>>> {
    parse_str(&read_text(path)?, path)
}

pub fn to_string<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn write<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    write_text(path, &to_string(items))
}

pub(crate) fn format_error(path: &Path, line: usize, offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        line,
        offset,
        message: message.into(),
    }
}
