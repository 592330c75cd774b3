use core::fmt;

use super::CorpusError;

/// Half-open frame span `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TemporalInterval {
    start: usize,
    end: usize,
}

impl TemporalInterval {
    pub fn new(start: usize, end: usize) -> Result<Self, CorpusError> {
        if start < end {
            Ok(Self { start, end })
        } else {
            Err(CorpusError::EmptyInterval { start, end })
        }
    }

    #[inline]
    pub fn start(&self) -> usize {
        self.start
    }

    #[inline]
    pub fn end(&self) -> usize {
        self.end
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    /// Always false; intervals are nonempty by construction.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, frame: usize) -> bool {
        self.start <= frame && frame < self.end
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }

    /// Clamps to `[0, duration)`; `None` if nothing is left.
    pub fn clamp(&self, duration: usize) -> Option<Self> {
        let end = self.end.min(duration);
        (self.start < end).then_some(Self {
            start: self.start,
            end,
        })
    }
}

impl fmt::Display for TemporalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Intersection over union, with the union measured as covered length.
pub fn iou(a: &TemporalInterval, b: &TemporalInterval) -> f64 {
    let inter = a.intersection_len(b);
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Maps spans on the uniformly sampled timeline back to source frames.
///
/// Observed frame `i` is source frame `floor(i * source / observed)`, so the
/// observed span `[s, e)` covers source frames `[floor(s*D/n), floor(e*D/n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimelineMap {
    observed: usize,
    source: usize,
}

impl TimelineMap {
    pub fn new(observed: usize, source: usize) -> Self {
        assert!(observed > 0 && source > 0, "timelines must be nonempty");
        Self { observed, source }
    }

    pub fn to_source(&self, span: &TemporalInterval) -> TemporalInterval {
        let scale = |i: usize| (i.min(self.observed) * self.source) / self.observed;
        let start = scale(span.start).min(self.source - 1);
        let end = scale(span.end).max(start + 1).min(self.source);
        TemporalInterval { start, end }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(s: usize, e: usize) -> TemporalInterval {
        TemporalInterval::new(s, e).unwrap()
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&iv(2, 6), &iv(2, 6)), 1.0);
        assert!((iou(&iv(2, 6), &iv(4, 8)) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(iou(&iv(0, 2), &iv(5, 9)), 0.0);
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(TemporalInterval::new(3, 3).is_err());
        assert!(TemporalInterval::new(4, 3).is_err());
    }

    #[test]
    fn timeline_map_scales_and_never_collapses() {
        let map = TimelineMap::new(16, 32);
        assert_eq!(map.to_source(&iv(4, 8)), iv(8, 16));
        assert_eq!(map.to_source(&iv(0, 16)), iv(0, 32));
        let short = TimelineMap::new(16, 4);
        assert_eq!(short.to_source(&iv(1, 2)), iv(0, 1));
    }

    #[test]
    fn clamp_behaviour() {
        assert_eq!(iv(8, 15).clamp(10), Some(iv(8, 10)));
        assert_eq!(iv(12, 15).clamp(10), None);
    }
}
