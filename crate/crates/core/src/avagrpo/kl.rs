use crate::math::{exp, expm1};
use crate::policy::{enumerate_decisions, logprob, Decisions, Observation, PolicyParams, Reference};

/// `exp(x) - x - 1` with `x = logp_ref - logp_theta`; nonnegative, zero iff
/// the two log-probabilities agree.
pub fn k3(logp_theta: f64, logp_ref: f64) -> f64 {
    let x = logp_ref - logp_theta;
    (expm1(x) - x).max(0.0)
}

/// Per-sample KL estimate at one trace.
pub fn kl_penalty(params: &PolicyParams, reference: &Reference, obs: &Observation, decisions: &Decisions) -> f64 {
    k3(logprob(params, obs, decisions), logprob(reference.params(), obs, decisions))
}

/// `KL(π_θ ‖ π_ref)` by summing over every trace of `obs`.
pub fn exact_kl(params: &PolicyParams, reference: &Reference, obs: &Observation) -> f64 {
    enumerate_decisions(obs)
        .iter()
        .map(|d| {
            let lp = logprob(params, obs, d);
            let lr = logprob(reference.params(), obs, d);
            exp(lp) * (lp - lr)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k3_zero_at_equality_and_positive_elsewhere() {
        assert_eq!(k3(-1.3, -1.3), 0.0);
        for (a, b) in [(-1.0, -2.0), (-2.0, -1.0), (-1e-9, -2e-9), (-30.0, -0.1)] {
            assert!(k3(a, b) > 0.0, "{a} {b}");
        }
    }
}
