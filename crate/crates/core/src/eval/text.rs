use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::exp;

/// Strips `<tag>` / `</tag>` markup, case-folds, splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut plain = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        plain.push_str(&rest[..open]);
        let after = &rest[open..];
        match tag_len(after) {
            Some(n) => {
                plain.push(' ');
                rest = &after[n..];
            }
            None => {
                plain.push('<');
                rest = &after[1..];
            }
        }
    }
    plain.push_str(rest);
    plain.split_whitespace().map(str::to_lowercase).collect()
}

fn tag_len(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    let mut i = 1;
    if b.get(i) == Some(&b'/') {
        i += 1;
    }
    let start = i;
    while i < b.len() && (b[i].is_ascii_lowercase() || b[i] == b'_') {
        i += 1;
    }
    (i > start && b.get(i) == Some(&b'>')).then_some(i + 1)
}

fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> BTreeMap<Vec<&str>, usize> {
    let mut out = BTreeMap::new();
    if n == 0 || tokens.len() < n {
        return out;
    }
    for w in tokens.windows(n) {
        *out.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
    }
    out
}

fn overlap(c: &BTreeMap<Vec<&str>, usize>, r: &BTreeMap<Vec<&str>, usize>) -> usize {
    c.iter().map(|(g, &k)| k.min(r.get(g).copied().unwrap_or(0))).sum()
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Sentence BLEU up to order `n`: clipped n-gram precisions, geometric mean,
/// brevity penalty, no smoothing.
///
/// # Panics
/// If `n` is zero.
pub fn bleu_n(candidate: &str, reference: &str, n: usize) -> f64 {
    assert!(n >= 1, "bleu order must be at least 1");
    let c = tokenize(candidate);
    let r = tokenize(reference);
    if c.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for k in 1..=n {
        let cg = ngrams(&c, k);
        let total: usize = cg.values().sum();
        let hits = overlap(&cg, &ngrams(&r, k));
        if hits == 0 || total == 0 {
            return 0.0;
        }
        log_sum += crate::math::ln(hits as f64 / total as f64);
    }
    let bp = if c.len() > r.len() {
        1.0
    } else {
        exp(1.0 - r.len() as f64 / c.len() as f64)
    };
    bp * exp(log_sum / n as f64)
}

/// ROUGE-N F1.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> f64 {
    let (c, r) = (tokenize(candidate), tokenize(reference));
    let cg = ngrams(&c, n);
    let rg = ngrams(&r, n);
    let (ct, rt): (usize, usize) = (cg.values().sum(), rg.values().sum());
    if ct == 0 || rt == 0 {
        return 0.0;
    }
    let hits = overlap(&cg, &rg) as f64;
    f1(hits / ct as f64, hits / rt as f64)
}

/// Longest common subsequence length, two-row dynamic program.
pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1 from the longest common subsequence.
pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    if c.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs_len(&c, &r) as f64;
    f1(l / c.len() as f64, l / r.len() as f64)
}
