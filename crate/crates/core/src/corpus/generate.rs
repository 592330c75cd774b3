use alloc::format;
use alloc::vec::Vec;
use rand::Rng;

use super::{Category, CorpusError, Label, SyntheticVideo, TemporalInterval, Vocabulary};
use crate::rng::{self, site};

/// Where an anomaly sits inside its video.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Begin,
    Middle,
    End,
}

/// Unnormalized sampling weights over [`Placement`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PlacementWeights {
    pub begin: f64,
    pub middle: f64,
    pub end: f64,
}

impl Default for PlacementWeights {
    fn default() -> Self {
        Self::UNIFORM
    }
}

impl PlacementWeights {
    pub const UNIFORM: Self = Self {
        begin: 1.0,
        middle: 1.0,
        end: 1.0,
    };

    pub fn only(p: Placement) -> Self {
        let mut w = Self {
            begin: 0.0,
            middle: 0.0,
            end: 0.0,
        };
        match p {
            Placement::Begin => w.begin = 1.0,
            Placement::Middle => w.middle = 1.0,
            Placement::End => w.end = 1.0,
        }
        w
    }

    fn total(&self) -> f64 {
        self.begin + self.middle + self.end
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Placement {
        let u = rng.gen::<f64>() * self.total();
        if u < self.begin {
            Placement::Begin
        } else if u < self.begin + self.middle || self.end == 0.0 {
            Placement::Middle
        } else {
            Placement::End
        }
    }
}

/// Parameters of a synthetic corpus.
///
/// Anomalies are placed on a grid of `bins` equal bins over each video and
/// span between `anomaly_bins.0` and `anomaly_bins.1` bins.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CorpusSpec {
    pub n_videos: usize,
    pub min_duration: usize,
    pub max_duration: usize,
    pub abnormal_fraction: f64,
    pub vocab_size: usize,
    pub bins: usize,
    pub anomaly_bins: (usize, usize),
    pub placement: PlacementWeights,
    /// Probability that a frame draws from the other sub-vocabulary.
    pub noise: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_videos: 512,
            min_duration: 32,
            max_duration: 64,
            abnormal_fraction: 0.5,
            vocab_size: 16,
            bins: 8,
            anomaly_bins: (2, 4),
            placement: PlacementWeights::UNIFORM,
            noise: 0.1,
            seed: 0,
        }
    }
}

impl CorpusSpec {
    pub fn n_abnormal(&self) -> usize {
        libm::round(self.n_videos as f64 * self.abnormal_fraction) as usize
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |field: &'static str, reason: &str| {
            Err(CorpusError::InvalidSpec {
                field,
                reason: reason.into(),
            })
        };
        if self.n_videos < 2 {
            return bad("n_videos", "need at least two videos");
        }
        if !(self.abnormal_fraction > 0.0 && self.abnormal_fraction < 1.0) {
            return bad("abnormal_fraction", "must lie strictly between 0 and 1");
        }
        let k = self.n_abnormal();
        if k == 0 || k == self.n_videos {
            return bad("abnormal_fraction", "must yield at least one video of each label");
        }
        if self.bins == 0 {
            return bad("bins", "must be positive");
        }
        if self.min_duration == 0 || self.min_duration > self.max_duration {
            return bad("min_duration", "duration range is empty");
        }
        if self.min_duration < self.bins {
            return bad("min_duration", "must be at least the number of bins");
        }
        Vocabulary::new(self.vocab_size)?;
        let (lo, hi) = self.anomaly_bins;
        if lo == 0 || lo > hi || hi >= self.bins {
            return bad("anomaly_bins", "need 1 <= min <= max < bins");
        }
        let w = &self.placement;
        if [w.begin, w.middle, w.end].iter().any(|x| !(*x >= 0.0 && x.is_finite())) || w.total() <= 0.0 {
            return bad("placement", "weights must be finite, nonnegative and not all zero");
        }
        if w.middle > 0.0 && hi + 2 > self.bins {
            return bad("anomaly_bins", "middle placement needs max <= bins - 2");
        }
        if !(0.0..0.5).contains(&self.noise) {
            return bad("noise", "must lie in [0, 0.5)");
        }
        Ok(())
    }
}

/// Generates the corpus described by `spec`; a pure function of `spec`.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<SyntheticVideo>, CorpusError> {
    spec.validate()?;
    let vocab = Vocabulary::new(spec.vocab_size)?;
    let mut rng = rng::stream(spec.seed, &[site::CORPUS]);

    let n_abnormal = spec.n_abnormal();
    let mut labels: Vec<Label> = (0..spec.n_videos)
        .map(|i| if i < n_abnormal { Label::Abnormal } else { Label::Normal })
        .collect();
    for i in (1..labels.len()).rev() {
        let j = rng.gen_range(0..=i);
        labels.swap(i, j);
    }

    let width = format!("{}", spec.n_videos.saturating_sub(1)).len().max(4);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let duration = rng.gen_range(spec.min_duration..=spec.max_duration);
            let (category, anomaly) = if label.is_abnormal() {
                let category = Category::ALL[rng.gen_range(0..Category::ALL.len())];
                let len = rng.gen_range(spec.anomaly_bins.0..=spec.anomaly_bins.1);
                let first = match spec.placement.draw(&mut rng) {
                    Placement::Begin => 0,
                    Placement::End => spec.bins - len,
                    Placement::Middle => rng.gen_range(1..=spec.bins - 1 - len),
                };
                let edge = |b: usize| b * duration / spec.bins;
                let iv = TemporalInterval::new(edge(first), edge(first + len))?;
                (Some(category), Some(iv))
            } else {
                (None, None)
            };
            let frames = (0..duration)
                .map(|t| {
                    let inside = anomaly.is_some_and(|iv| iv.contains(t));
                    let flip = rng.gen_bool(spec.noise);
                    let range = match (inside != flip, category) {
                        (true, Some(c)) => vocab.category_tokens(c),
                        (true, None) => vocab.anomaly_tokens(),
                        (false, _) => vocab.background(),
                    };
                    rng.gen_range(range)
                })
                .collect();
            SyntheticVideo::new(format!("vid{:0width$}", i), frames, label, category, anomaly)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> CorpusSpec {
        CorpusSpec {
            n_videos: 4,
            abnormal_fraction: 0.5,
            seed,
            ..CorpusSpec::default()
        }
    }

    #[test]
    fn fraction_forces_split() {
        let c = generate_corpus(&small(7)).unwrap();
        let abn = c.iter().filter(|v| v.label().is_abnormal()).count();
        assert_eq!((abn, c.len() - abn), (2, 2));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate_corpus(&small(7)).unwrap(), generate_corpus(&small(7)).unwrap());
        assert_ne!(generate_corpus(&small(7)).unwrap(), generate_corpus(&small(8)).unwrap());
    }

    #[test]
    fn end_placement_touches_the_last_frame() {
        let spec = CorpusSpec {
            n_videos: 40,
            placement: PlacementWeights::only(Placement::End),
            seed: 3,
            ..CorpusSpec::default()
        };
        for v in generate_corpus(&spec).unwrap() {
            if let Some(iv) = v.anomaly() {
                assert_eq!(iv.end(), v.duration());
            }
        }
    }

    #[test]
    fn begin_and_middle_placement() {
        for (p, check) in [
            (Placement::Begin, (|iv: TemporalInterval, _d: usize| iv.start() == 0) as fn(_, _) -> bool),
            (Placement::Middle, |iv: TemporalInterval, d: usize| iv.start() > 0 && iv.end() < d),
        ] {
            let spec = CorpusSpec {
                n_videos: 40,
                placement: PlacementWeights::only(p),
                seed: 5,
                ..CorpusSpec::default()
            };
            for v in generate_corpus(&spec).unwrap() {
                if let Some(iv) = v.anomaly() {
                    assert!(check(iv, v.duration()), "{p:?} {iv} in {}", v.duration());
                }
            }
        }
    }

    #[test]
    fn tokens_follow_sub_vocabularies_without_noise() {
        let spec = CorpusSpec {
            n_videos: 20,
            noise: 0.0,
            seed: 11,
            ..CorpusSpec::default()
        };
        let vocab = Vocabulary::new(spec.vocab_size).unwrap();
        for v in generate_corpus(&spec).unwrap() {
            for (t, &tok) in v.frames().iter().enumerate() {
                match (v.anomaly(), v.category()) {
                    (Some(iv), Some(c)) if iv.contains(t) => assert_eq!(vocab.category_of(tok), Some(c)),
                    _ => assert!(vocab.background().contains(&tok)),
                }
            }
        }
    }

    #[test]
    fn invalid_specs_name_the_field() {
        let cases = [
            (CorpusSpec { abnormal_fraction: 0.0, ..small(0) }, "abnormal_fraction"),
            (CorpusSpec { abnormal_fraction: 1.2, ..small(0) }, "abnormal_fraction"),
            (CorpusSpec { min_duration: 70, ..small(0) }, "min_duration"),
            (CorpusSpec { n_videos: 4, abnormal_fraction: 0.1, ..small(0) }, "abnormal_fraction"),
            (CorpusSpec { vocab_size: 3, ..small(0) }, "vocab_size"),
        ];
        for (spec, field) in cases {
            match generate_corpus(&spec) {
                Err(CorpusError::InvalidSpec { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected {field} error, got {other:?}"),
            }
        }
    }

    #[test]
    fn anomalies_sit_on_the_bin_grid() {
        let spec = CorpusSpec { n_videos: 50, seed: 2, ..CorpusSpec::default() };
        for v in generate_corpus(&spec).unwrap() {
            if let Some(iv) = v.anomaly() {
                let d = v.duration();
                let on_grid = |f: usize| (0..=spec.bins).any(|b| b * d / spec.bins == f);
                assert!(on_grid(iv.start()) && on_grid(iv.end()));
            }
        }
    }
}
