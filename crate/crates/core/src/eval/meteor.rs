use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::tokenize;

pub const METEOR_ALPHA: f64 = 0.9;
pub const METEOR_GAMMA: f64 = 0.5;
pub const METEOR_BETA: f64 = 3.0;

const SUFFIXES: [&str; 8] = ["ingly", "ing", "edly", "ed", "ies", "es", "ly", "s"];

/// Strips one common English suffix, keeping at least three characters.
pub fn stem(word: &str) -> &str {
    for suf in SUFFIXES {
        if let Some(base) = word.strip_suffix(suf) {
            if base.chars().count() >= 3 {
                return base;
            }
        }
    }
    word
}

/// Greedy left-to-right alignment: exact matches first, then stem matches
/// among the leftovers. Returns reference positions per candidate token.
fn align(c: &[String], r: &[String]) -> Vec<Option<usize>> {
    let mut used = vec![false; r.len()];
    let mut out = vec![None; c.len()];
    let passes: [fn(&str, &str) -> bool; 2] = [|a, b| a == b, |a, b| stem(a) == stem(b)];
    for same in passes {
        for (i, w) in c.iter().enumerate() {
            if out[i].is_some() {
                continue;
            }
            if let Some(j) = (0..r.len()).find(|&j| !used[j] && same(w, &r[j])) {
                used[j] = true;
                out[i] = Some(j);
            }
        }
    }
    out
}

/// Reduced METEOR: `f_mean * (1 - γ (chunks / matches)^β)` with
/// `f_mean = P R / (α P + (1 - α) R)`.
pub fn meteor_lite(candidate: &str, reference: &str) -> f64 {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    let a = align(&c, &r);
    let matched: Vec<usize> = a.iter().flatten().copied().collect();
    let m = matched.len();
    if m == 0 {
        return 0.0;
    }
    let chunks = 1 + matched.windows(2).filter(|w| w[1] != w[0] + 1).count();
    let p = m as f64 / c.len() as f64;
    let rc = m as f64 / r.len() as f64;
    let f_mean = p * rc / (METEOR_ALPHA * p + (1.0 - METEOR_ALPHA) * rc);
    let frag = chunks as f64 / m as f64;
    f_mean * (1.0 - METEOR_GAMMA * frag * frag * frag)
}
