use alloc::vec::Vec;

use super::MetricFlag;
use crate::corpus::{iou, SyntheticVideo, TimelineMap};
use crate::cot::Verdict;

pub const DEFAULT_THRESHOLDS: [f64; 3] = [0.3, 0.5, 0.7];

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundingMetrics {
    pub miou: f64,
    /// `(threshold, fraction with IoU >= threshold)` in input order.
    pub recall_at: Vec<(f64, f64)>,
    pub n_abnormal: usize,
    pub flags: Vec<MetricFlag>,
}

/// Temporal grounding over the ground-truth abnormal videos.
///
/// Predicted intervals are on the observed timeline of `observed` frames and
/// are mapped back to raw frames first. A Normal or unextractable prediction
/// scores IoU 0.
pub fn grounding_metrics(
    predictions: &[Option<Verdict>],
    videos: &[SyntheticVideo],
    observed: usize,
    thresholds: &[f64],
) -> GroundingMetrics {
    let ious: Vec<f64> = predictions
        .iter()
        .zip(videos)
        .filter_map(|(p, v)| {
            let truth = v.anomaly()?;
            let score = match p.as_ref().and_then(Verdict::interval) {
                Some(span) => iou(&TimelineMap::new(observed, v.duration()).to_source(&span), &truth),
                None => 0.0,
            };
            Some(score)
        })
        .collect();
    if ious.is_empty() {
        return GroundingMetrics {
            miou: 0.0,
            recall_at: thresholds.iter().map(|&t| (t, 0.0)).collect(),
            n_abnormal: 0,
            flags: alloc::vec![MetricFlag::NoAbnormalVideos],
        };
    }
    let n = ious.len() as f64;
    GroundingMetrics {
        miou: ious.iter().sum::<f64>() / n,
        recall_at: thresholds
            .iter()
            .map(|&t| (t, ious.iter().filter(|&&x| x >= t).count() as f64 / n))
            .collect(),
        n_abnormal: ious.len(),
        flags: Vec::new(),
    }
}
