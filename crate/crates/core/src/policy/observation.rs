use alloc::vec;
use alloc::vec::Vec;

use super::{Layout, ObservationMode, PolicyConfig};
use crate::corpus::{Category, TemporalInterval, Vocabulary};

/// Normalized token histogram of the observed window plus a trailing bias 1.
///
/// In prefix mode only the first `m` frames are counted.
pub fn features_cls(frames: &[u32], mode: ObservationMode, vocab_size: usize) -> Vec<f64> {
    assert!(!frames.is_empty(), "features need frames");
    let window = match mode {
        ObservationMode::Full => frames,
        ObservationMode::Prefix(m) => &frames[..m.min(frames.len())],
    };
    let mut out = vec![0.0; vocab_size + 1];
    let w = 1.0 / window.len() as f64;
    for &t in window {
        out[t as usize] += w;
    }
    out[vocab_size] = 1.0;
    out
}

/// All contiguous spans of `bins` equal bins over `[0, duration)`, ordered by
/// first bin then last bin. Bin `k` covers `[k*D/B, (k+1)*D/B)`.
///
/// # Panics
/// If `bins` is zero or exceeds `duration`.
pub fn candidates(duration: usize, bins: usize) -> Vec<TemporalInterval> {
    assert!(bins >= 1 && bins <= duration, "need 1 <= bins <= duration");
    let edge = |k: usize| k * duration / bins;
    let mut out = Vec::with_capacity(bins * (bins + 1) / 2);
    for first in 0..bins {
        for last in first..bins {
            out.push(TemporalInterval::new(edge(first), edge(last + 1)).expect("bins are nonempty"));
        }
    }
    out
}

/// Precomputed features of one observed frame sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    frames: Vec<u32>,
    vocab: Vocabulary,
    cls: Vec<f64>,
    candidates: Vec<TemporalInterval>,
    seg: Vec<f64>,
    seg_dim: usize,
}

impl Observation {
    /// # Panics
    /// If a token is outside the vocabulary or there are fewer frames than
    /// bins.
    pub fn new(config: &PolicyConfig, frames: &[u32]) -> Self {
        let v = config.vocab_size;
        assert!(frames.iter().all(|&t| (t as usize) < v), "token outside vocabulary");
        let cls = features_cls(frames, config.mode, v);
        let candidates = candidates(frames.len(), config.bins);
        let seg_dim = Layout::new(config).seg_dim();

        // prefix[t * v + k] = count of token k in frames[..t]
        let n = frames.len();
        let mut prefix = vec![0u32; (n + 1) * v];
        for (t, &tok) in frames.iter().enumerate() {
            let (done, next) = prefix.split_at_mut((t + 1) * v);
            next[..v].copy_from_slice(&done[t * v..]);
            next[tok as usize] += 1;
        }
        let mut seg = Vec::with_capacity(candidates.len() * seg_dim);
        for c in &candidates {
            let inside_len = c.len() as f64;
            let outside_len = (n - c.len()) as f64;
            for k in 0..v {
                let inside = prefix[c.end() * v + k] - prefix[c.start() * v + k];
                seg.push(inside as f64 / inside_len);
            }
            for k in 0..v {
                let inside = prefix[c.end() * v + k] - prefix[c.start() * v + k];
                let outside = prefix[n * v + k] - inside;
                seg.push(if outside_len > 0.0 { outside as f64 / outside_len } else { 0.0 });
            }
            seg.push(c.start() as f64 / n as f64);
            seg.push(c.end() as f64 / n as f64);
            seg.push(1.0);
        }
        Self {
            frames: frames.to_vec(),
            vocab: config.vocabulary(),
            cls,
            candidates,
            seg,
            seg_dim,
        }
    }

    pub fn frames(&self) -> &[u32] {
        &self.frames
    }

    pub fn cls_features(&self) -> &[f64] {
        &self.cls
    }

    pub fn candidates(&self) -> &[TemporalInterval] {
        &self.candidates
    }

    pub fn seg_features(&self, candidate: usize) -> &[f64] {
        &self.seg[candidate * self.seg_dim..(candidate + 1) * self.seg_dim]
    }

    /// Category with the most anomaly tokens inside `span`, falling back to
    /// the whole observation and then to the first category.
    pub fn decode_category(&self, span: &TemporalInterval) -> Category {
        let tally = |frames: &[u32]| {
            let mut counts = [0usize; Category::ALL.len()];
            for &t in frames {
                if let Some(c) = self.vocab.category_of(t) {
                    counts[c.index()] += 1;
                }
            }
            let (best, &n) = counts
                .iter()
                .enumerate()
                .rev()
                .max_by_key(|(_, n)| **n)
                .expect("nonempty taxonomy");
            (n > 0).then_some(Category::ALL[best])
        };
        let inside = &self.frames[span.start().min(self.frames.len())..span.end().min(self.frames.len())];
        tally(inside)
            .or_else(|| tally(&self.frames))
            .unwrap_or(Category::ALL[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_counts() {
        assert_eq!(candidates(16, 2).len(), 3);
        assert_eq!(candidates(16, 8).len(), 36);
        assert_eq!(candidates(37, 5).len(), 15);
    }

    #[test]
    fn candidates_tile_the_timeline() {
        for (d, b) in [(16, 8), (37, 5), (9, 9)] {
            let mut covered = vec![false; d];
            for c in candidates(d, b) {
                for f in c.start()..c.end() {
                    covered[f] = true;
                }
            }
            assert!(covered.iter().all(|&x| x));
            let singles: Vec<_> = candidates(d, b).into_iter().filter(|c| c.len() <= d.div_ceil(b)).collect();
            assert!(singles.len() >= b);
        }
    }

    #[test]
    fn histogram_normalization() {
        let f = features_cls(&[0, 1, 1, 3], ObservationMode::Full, 4);
        assert_eq!(f, vec![0.25, 0.5, 0.0, 0.25, 1.0]);
        assert!((f[..4].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prefix_mode_hides_late_anomaly() {
        let background = [0u32, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3];
        let mut abnormal = background;
        for t in &mut abnormal[12..] {
            *t = 9;
        }
        let mode = ObservationMode::Prefix(4);
        assert_eq!(features_cls(&abnormal, mode, 16), features_cls(&background, mode, 16));
        assert_ne!(
            features_cls(&abnormal, ObservationMode::Full, 16),
            features_cls(&background, ObservationMode::Full, 16)
        );
    }

    #[test]
    fn all_background_mass_stays_on_background() {
        let vocab = Vocabulary::new(16).unwrap();
        let f = features_cls(&[0, 1, 2, 3, 3, 2], ObservationMode::Full, 16);
        for (k, x) in f[..16].iter().enumerate() {
            if !vocab.background().contains(&(k as u32)) {
                assert_eq!(*x, 0.0);
            }
        }
    }

    #[test]
    fn segment_features_split_inside_and_outside() {
        let cfg = PolicyConfig {
            vocab_size: 8,
            bins: 2,
            frames: 4,
            mode: ObservationMode::Full,
        };
        let obs = Observation::new(&cfg, &[0, 0, 5, 5]);
        // candidates: [0,2), [0,4), [2,4)
        let last = obs.seg_features(2);
        assert_eq!(last[5], 1.0);
        assert_eq!(last[8], 1.0);
        assert_eq!(&last[16..], &[0.5, 1.0, 1.0]);
        let whole = obs.seg_features(1);
        assert!(whole[8..16].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn category_decoding() {
        let cfg = PolicyConfig::default();
        let vocab = cfg.vocabulary();
        let fire = vocab.category_tokens(Category::Fire).start;
        let mut frames = vec![0u32; 16];
        for t in &mut frames[8..12] {
            *t = fire;
        }
        let obs = Observation::new(&cfg, &frames);
        assert_eq!(obs.decode_category(&TemporalInterval::new(8, 12).unwrap()), Category::Fire);
        assert_eq!(obs.decode_category(&TemporalInterval::new(0, 4).unwrap()), Category::Fire);
        let plain = Observation::new(&cfg, &[0; 16]);
        assert_eq!(plain.decode_category(&TemporalInterval::new(0, 4).unwrap()), Category::ALL[0]);
    }
}
