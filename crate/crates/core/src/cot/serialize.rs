use alloc::string::String;
use core::fmt::Write;

use super::CoTDocument;

fn escape_into(out: &mut String, text: &str) {
    for ch in text.chars() {
        match ch {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            c => out.push(c),
        }
    }
}

fn tag(out: &mut String, name: &str, text: &str) {
    let _ = write!(out, "<{name}>");
    escape_into(out, text);
    let _ = writeln!(out, "</{name}>");
}

/// Canonical text: think block, then answer tags in the order which, what,
/// when, where, why, how; one tag pair per line, no trailing newline.
pub fn serialize(doc: &CoTDocument) -> String {
    let mut out = String::new();
    out.push_str("<think>\n");
    for (name, text) in doc.think().steps() {
        tag(&mut out, name, text);
    }
    out.push_str("</think>\n<answer>\n");
    let a = doc.answer();
    tag(&mut out, "which", a.which.as_str());
    tag(&mut out, "what", &a.what);
    if let Some(when) = &a.when {
        let _ = writeln!(out, "<when>{when}</when>");
    }
    for (name, opt) in [("where", &a.where_), ("why", &a.why), ("how", &a.how)] {
        if let Some(text) = opt {
            tag(&mut out, name, text);
        }
    }
    out.push_str("</answer>");
    out
}
