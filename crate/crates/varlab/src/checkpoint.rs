//! Policy checkpoints.
//!
//! ```text
//! varlab-checkpoint 1
//! # free-form comment lines
//! vocab_size 16
//! bins 8
//! frames 16
//! mode full            (or: mode prefix 4)
//! block cls 17 0.5 -1.25 ...
//! block seg 35 ...
//! block len_normal 3 ...
//! block len_abnormal 3 ...
//! block fmt 1 ...
//! ```
//!
//! Values use the shortest representation that parses back to the same
//! `f64`, so a save/load round trip is exact.

use std::fmt::Write;
use std::path::Path;

use varlab_core::policy::{ObservationMode, PolicyConfig, PolicyParams};

use crate::error::{read_text, write_text};
use crate::jsonl::format_error;
use crate::{Error, Result};

pub const MAGIC: &str = "varlab-checkpoint";
pub const VERSION: u32 = 1;

/// Serializes `params`; each `comments` entry becomes a `#` line.
pub fn to_string(params: &PolicyParams, comments: &[String]) -> String {
    let c = params.config();
    let mut out = format!("{MAGIC} {VERSION}\n");
    for line in comments {
        for l in line.lines() {
            let _ = writeln!(out, "# {l}");
        }
    }
    let _ = writeln!(out, "vocab_size {}", c.vocab_size);
    let _ = writeln!(out, "bins {}", c.bins);
    let _ = writeln!(out, "frames {}", c.frames);
    match c.mode {
        ObservationMode::Full => out.push_str("mode full\n"),
        ObservationMode::Prefix(m) => {
            let _ = writeln!(out, "mode prefix {m}");
        }
    }
    for (name, range) in params.layout().blocks() {
        let _ = write!(out, "block {name} {}", range.len());
        for v in &params.values()[range] {
            let _ = write!(out, " {v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn save(path: &Path, params: &PolicyParams, comments: &[String]) -> Result<()> {
    if let Some(i) = params.first_non_finite() {
        return Err(Error::Mismatch(format!("refusing to save non-finite parameter {i}")));
    }
    write_text(path, &to_string(params, comments))
}

pub fn load(path: &Path) -> Result<PolicyParams> {
    parse(&read_text(path)?, path)
}

pub fn parse(text: &str, path: &Path) -> Result<PolicyParams> {
    let mut lines = Vec::new();
    let mut offset = 0;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let l = raw.trim_end();
        if !l.is_empty() && !l.starts_with('#') {
            lines.push((i + 1, offset, l));
        }
        offset += raw.len();
    }
    let mut it = lines.into_iter();
    let bad = |(line, off, _): (usize, usize, &str), m: String| format_error(path, line, off, m);
    let eof = || format_error(path, text.lines().count().max(1), text.len(), "unexpected end of checkpoint");

    let head = it.next().ok_or_else(eof)?;
    if head.2 != format!("{MAGIC} {VERSION}") {
        return Err(bad(head, format!("expected header `{MAGIC} {VERSION}`, found `{}`", head.2)));
    }
    let mut field = |key: &str| -> Result<(Vec<String>, (usize, usize, String))> {
        let l = it.next().ok_or_else(eof)?;
        let mut words = l.2.split_whitespace();
        if words.next() != Some(key) {
            return Err(bad(l, format!("expected `{key}`")));
        }
        Ok((words.map(String::from).collect(), (l.0, l.1, l.2.to_string())))
    };
    let mut number = |key: &str| -> Result<usize> {
        let (w, at) = field(key)?;
        match w.as_slice() {
            [v] => v
                .parse()
                .map_err(|_| format_error(path, at.0, at.1, format!("`{key}` needs an integer"))),
            _ => Err(format_error(path, at.0, at.1, format!("`{key}` takes one value"))),
        }
    };
    let vocab_size = number("vocab_size")?;
    let bins = number("bins")?;
    let frames = number("frames")?;
    let (w, at) = field("mode")?;
    let mode = match w.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["full"] => ObservationMode::Full,
        ["prefix", m] => ObservationMode::Prefix(
            m.parse()
                .map_err(|_| format_error(path, at.0, at.1, "prefix length must be an integer"))?,
        ),
        _ => return Err(format_error(path, at.0, at.1, "mode must be `full` or `prefix <m>`")),
    };
    let config = PolicyConfig {
        vocab_size,
        bins,
        frames,
        mode,
    };
    config
        .validate()
        .map_err(|e| format_error(path, at.0, at.1, e.to_string()))?;
    let mut params = PolicyParams::zeros(config);
    for (name, range) in params.layout().blocks() {
        let (w, at) = field("block")?;
        let fail = |m: String| format_error(path, at.0, at.1, m);
        if w.first().map(String::as_str) != Some(name) {
            return Err(fail(format!("expected block `{name}`")));
        }
        let n: usize = w
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(format!("block `{name}` needs a length")))?;
        if n != range.len() || w.len() != n + 2 {
            return Err(fail(format!(
                "block `{name}` must hold {} values for this shape",
                range.len()
            )));
        }
        for (slot, s) in params.values_mut()[range].iter_mut().zip(&w[2..]) {
            let v: f64 = s.parse().map_err(|_| fail(format!("bad number `{s}`")))?;
            if !v.is_finite() {
                return Err(fail(format!("non-finite value `{s}`")));
            }
            *slot = v;
        }
    }
    if let Some(l) = it.next() {
        return Err(format_error(path, l.0, l.1, "trailing content after last block"));
    }
    Ok(params)
}
