//! Verification-augmented group-relative policy optimization.
//!
//! For each video the trainer samples a group of completions, scores each
//! with four rewards (accuracy, format, anomaly verification, length),
//! normalizes the totals within the group, and takes one gradient step on
//!
//! ```text
//! L(θ) = -(1/G) Σ_i [ (π_θ(o_i) / π_θ(o_i)|no-grad) · A_i - β · k3_i ]
//! ```
//!
//! where the ratio is identically 1 at the sampling parameters, so its
//! gradient is `A_i ∇log π_θ(o_i)`. The clipped multi-update form never
//! activates under this single-update regime and is not implemented.

mod advantage;
mod config;
mod kl;
mod objective;
mod rewards;
mod train;

pub use advantage::advantages;
pub use config::{LengthKey, RewardSwitches, TrainConfig};
pub use kl::{exact_kl, k3, kl_penalty};
pub use objective::{loss_and_grad, surrogate_loss, CompletionGroup, GroupMember};
pub use rewards::{
    accuracy_reward, anomaly_verification_reward, format_reward, length_reward, RewardBreakdown,
    VerificationOutcome, ANO_CONFIRMED, ANO_CONTRADICTED, LENGTH_BONUS,
};
pub use train::{build_group, probe_rewards, train, train_with, RewardProbe, StepRecord, TrainError, TrainLog};
