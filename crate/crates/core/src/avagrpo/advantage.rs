use alloc::vec::Vec;

use crate::math::mean_std;

/// Group-relative advantages `(r - mean) / max(std, floor)` with the
/// population standard deviation.
pub fn advantages(rewards: &[f64], std_floor: f64) -> Vec<f64> {
    let (mean, std) = mean_std(rewards);
    let scale = std.max(std_floor);
    rewards.iter().map(|r| (r - mean) / scale).collect()
}
