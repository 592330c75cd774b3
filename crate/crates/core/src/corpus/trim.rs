use alloc::vec::Vec;
use rand::Rng;

use super::TemporalInterval;

/// The trimmed video would have no frames left; verification is skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("segment removal leaves no frames")]
pub struct Untrimmable;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum TrimError {
    #[error(transparent)]
    Untrimmable(#[from] Untrimmable),
    #[error("trim fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
}

/// Which boundary [`discard_random_end`] removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimEnd {
    Begin,
    End,
}

/// Removes `segment` (clamped to the video) and concatenates the rest.
pub fn discard_segment(frames: &[u32], segment: &TemporalInterval) -> Result<Vec<u32>, Untrimmable> {
    let Some(seg) = segment.clamp(frames.len()) else {
        return if frames.is_empty() {
            Err(Untrimmable)
        } else {
            Ok(frames.to_vec())
        };
    };
    let mut out = Vec::with_capacity(frames.len() - seg.len());
    out.extend_from_slice(&frames[..seg.start()]);
    out.extend_from_slice(&frames[seg.end()..]);
    if out.is_empty() {
        Err(Untrimmable)
    } else {
        Ok(out)
    }
}

/// `ceil(rho * n)` with a relative tolerance so that e.g. `0.3 * 10` is 3.
pub(crate) fn ceil_fraction(rho: f64, n: usize) -> usize {
    let x = rho * n as f64;
    let r = libm::round(x);
    if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r as usize
    } else {
        crate::math::ceil(x) as usize
    }
}

/// Drops the first or the last `ceil(rho * duration)` frames, choosing the
/// side with a fair coin from `rng`.
pub fn discard_random_end<R: Rng + ?Sized>(
    frames: &[u32],
    rho: f64,
    rng: &mut R,
) -> Result<(Vec<u32>, TrimEnd), TrimError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(TrimError::InvalidFraction(rho));
    }
    let side = if rng.gen_bool(0.5) {
        TrimEnd::Begin
    } else {
        TrimEnd::End
    };
    Ok((discard_end(frames, rho, side)?, side))
}

pub(crate) fn discard_end(frames: &[u32], rho: f64, side: TrimEnd) -> Result<Vec<u32>, Untrimmable> {
    let k = ceil_fraction(rho, frames.len());
    if k >= frames.len() {
        return Err(Untrimmable);
    }
    Ok(match side {
        TrimEnd::Begin => frames[k..].to_vec(),
        TrimEnd::End => frames[..frames.len() - k].to_vec(),
    })
}

/// Picks `n` frames at indices `floor(i * duration / n)`.
///
/// # Panics
/// If `frames` is empty or `n` is zero.
pub fn uniform_sample(frames: &[u32], n: usize) -> Vec<u32> {
    assert!(!frames.is_empty() && n > 0, "uniform_sample needs frames and n >= 1");
    let d = frames.len();
    (0..n).map(|i| frames[i * d / n]).collect()
}
