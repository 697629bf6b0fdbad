//! Monte Carlo audit of the likelihood-ratio inequality
//! `sum_i E_mu[T_i] d(mu_i, mu'_i) >= d(P_mu[E], P_mu'[E])`
//! for a fixed-budget sampling policy and an event on its transcript.

use serde::Serialize;

use super::config::{AuditConfig, EventSpec};
use super::stats::MeanEstimate;
use crate::env::{BernoulliInstance, RngStream};
use crate::error::{ensure_input, Result};
use crate::kl::kl_unchecked;

/// Arms pulled and rewards observed during one run.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub arms: Vec<usize>,
    pub rewards: Vec<u8>,
    pulls: Vec<u64>,
    reward_sums: Vec<u64>,
}

impl Transcript {
    fn new(n: usize) -> Self {
        Self {
            pulls: vec![0; n],
            reward_sums: vec![0; n],
            ..Self::default()
        }
    }

    fn push(&mut self, arm: usize, reward: u8) {
        self.arms.push(arm);
        self.rewards.push(reward);
        self.pulls[arm] += 1;
        self.reward_sums[arm] += u64::from(reward);
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.pulls[arm]
    }

    pub fn empirical_mean(&self, arm: usize) -> Option<f64> {
        (self.pulls[arm] > 0).then(|| self.reward_sums[arm] as f64 / self.pulls[arm] as f64)
    }
}

/// A sampling rule that stops after a fixed number of pulls.
pub trait FixedBudgetPolicy {
    fn budget(&self) -> u64;
    /// Arm for pull `t` (0-based), given everything observed so far.
    fn next_arm(&mut self, t: u64, transcript: &Transcript) -> usize;
}

/// Cycles through all arms, `pulls_per_arm` times each.
#[derive(Debug, Clone, Copy)]
pub struct RoundRobin {
    pub n_arms: usize,
    pub pulls_per_arm: u64,
}

impl FixedBudgetPolicy for RoundRobin {
    fn budget(&self) -> u64 {
        self.n_arms as u64 * self.pulls_per_arm
    }

    fn next_arm(&mut self, t: u64, _: &Transcript) -> usize {
        (t % self.n_arms as u64) as usize
    }
}

impl EventSpec {
    pub fn holds(&self, transcript: &Transcript) -> bool {
        match *self {
            EventSpec::Always => true,
            EventSpec::Never => false,
            EventSpec::MeanExceeds { arm, other } => {
                match (
                    transcript.empirical_mean(arm),
                    transcript.empirical_mean(other),
                ) {
                    (Some(a), Some(b)) => a > b,
                    _ => false,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditReport {
    /// Estimate of `sum_i E_mu[T_i] d(mu_i, mu'_i)`.
    pub lhs: f64,
    pub lhs_std_error: f64,
    /// `d(p, p')` at the estimated event probabilities.
    pub rhs: f64,
    /// Delta-method standard error of `rhs`; zero at a boundary estimate.
    pub rhs_std_error: f64,
    pub event_prob_mu: f64,
    pub event_prob_mu_prime: f64,
    /// An event probability was estimated as exactly 0 or 1.
    pub boundary: bool,
}

impl AuditReport {
    /// `lhs + 3 SE >= rhs - 3 SE`.
    pub fn passed(&self) -> bool {
        self.lhs + 3.0 * self.lhs_std_error >= self.rhs - 3.0 * self.rhs_std_error
    }
}

fn run_policy<P: FixedBudgetPolicy>(
    instance: &BernoulliInstance,
    policy: &mut P,
    rng: &mut RngStream,
) -> Transcript {
    let mut transcript = Transcript::new(instance.n_arms());
    for t in 0..policy.budget() {
        let arm = policy.next_arm(t, &transcript);
        let reward = instance.draw(arm, rng);
        transcript.push(arm, reward);
    }
    transcript
}

/// Estimate both sides of the likelihood-ratio inequality.
///
/// Trial `t` runs on `mu` with stream `2t` and on `mu_prime` with stream `2t + 1`.
pub fn likelihood_ratio_audit<P, F, E>(
    mu: &BernoulliInstance,
    mu_prime: &BernoulliInstance,
    mut make_policy: F,
    event: E,
    trials: u64,
    seed: u64,
) -> Result<AuditReport>
where
    P: FixedBudgetPolicy,
    F: FnMut() -> P,
    E: Fn(&Transcript) -> bool,
{
    ensure_input!(
        mu.n_arms() == mu_prime.n_arms(),
        "instances differ in arm count"
    );
    ensure_input!(trials >= 1, "need at least one trial");
    let per_arm_kl: Vec<f64> = mu
        .means()
        .iter()
        .zip(mu_prime.means())
        .map(|(&a, &b)| kl_unchecked(a, b))
        .collect();

    let mut lhs_samples = Vec::with_capacity(trials as usize);
    let (mut hits, mut hits_prime) = (0u64, 0u64);
    for t in 0..trials {
        let run = run_policy(mu, &mut make_policy(), &mut RngStream::new(seed, 2 * t));
        let weighted: f64 = per_arm_kl
            .iter()
            .enumerate()
            .filter(|(i, _)| run.pulls(*i) > 0)
            .map(|(i, d)| run.pulls(i) as f64 * d)
            .sum();
        lhs_samples.push(weighted);
        hits += u64::from(event(&run));

        let run = run_policy(
            mu_prime,
            &mut make_policy(),
            &mut RngStream::new(seed, 2 * t + 1),
        );
        hits_prime += u64::from(event(&run));
    }

    let lhs = MeanEstimate::from_samples(&lhs_samples);
    let nf = trials as f64;
    let p = hits as f64 / nf;
    let q = hits_prime as f64 / nf;
    let rhs = kl_unchecked(p, q);
    let boundary = [p, q].iter().any(|v| *v == 0.0 || *v == 1.0);
    // delta method: dd/dp = ln(p(1-q) / (q(1-p))), dd/dq = (q-p) / (q(1-q))
    let mut var = 0.0;
    if p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0 {
        let dp = (p * (1.0 - q) / (q * (1.0 - p))).ln();
        var += dp * dp * p * (1.0 - p) / nf;
    }
    if q > 0.0 && q < 1.0 {
        let dq = (q - p) / (q * (1.0 - q));
        var += dq * dq * q * (1.0 - q) / nf;
    }
    Ok(AuditReport {
        lhs: lhs.mean,
        lhs_std_error: lhs.std_error,
        rhs,
        rhs_std_error: var.sqrt(),
        event_prob_mu: p,
        event_prob_mu_prime: q,
        boundary,
    })
}

/// Run the audit described by a config file with a round-robin sampler.
pub fn run_audit(config: &AuditConfig) -> Result<AuditReport> {
    let mu = config.mu.build()?;
    let mu_prime = config.mu_prime.build()?;
    if let EventSpec::MeanExceeds { arm, other } = config.event {
        ensure_input!(
            arm < mu.n_arms() && other < mu.n_arms(),
            "event arms out of range"
        );
    }
    let policy = RoundRobin {
        n_arms: mu.n_arms(),
        pulls_per_arm: config.pulls_per_arm,
    };
    let event = config.event;
    likelihood_ratio_audit(
        &mu,
        &mu_prime,
        || policy,
        |t| event.holds(t),
        config.trials,
        config.seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::hard_instance;

    #[test]
    fn identical_instances_give_zero_sides() {
        let mu = hard_instance(4, 0.1, None).unwrap();
        let rr = RoundRobin {
            n_arms: 4,
            pulls_per_arm: 10,
        };
        let ev = EventSpec::MeanExceeds { arm: 2, other: 0 };
        let rep = likelihood_ratio_audit(&mu, &mu, || rr, |t| ev.holds(t), 2000, 1).unwrap();
        assert_eq!(rep.lhs, 0.0);
        // both probabilities estimate the same quantity
        assert!(rep.rhs < 3e-3, "{rep:?}");
        assert!(rep.passed());
    }

    #[test]
    fn always_event_has_zero_rhs() {
        let mu = hard_instance(4, 0.1, None).unwrap();
        let mu2 = hard_instance(4, 0.1, Some(2)).unwrap();
        let rr = RoundRobin {
            n_arms: 4,
            pulls_per_arm: 5,
        };
        let rep = likelihood_ratio_audit(&mu, &mu2, || rr, |_| true, 50, 0).unwrap();
        assert_eq!(rep.rhs, 0.0);
        assert!(rep.boundary);
        assert!(rep.passed());
    }

    #[test]
    fn lhs_is_exact_for_round_robin() {
        let mu = hard_instance(4, 0.1, None).unwrap();
        let mu2 = hard_instance(4, 0.1, Some(2)).unwrap();
        let rr = RoundRobin {
            n_arms: 4,
            pulls_per_arm: 100,
        };
        let rep = likelihood_ratio_audit(&mu, &mu2, || rr, |_| false, 20, 0).unwrap();
        assert!((rep.lhs - 8.717_669_357_238_888).abs() < 1e-9);
        assert!(rep.lhs_std_error < 1e-12);
    }

    #[test]
    fn mismatched_instances_rejected() {
        let mu = hard_instance(4, 0.1, None).unwrap();
        let mu2 = hard_instance(3, 0.1, None).unwrap();
        let rr = RoundRobin {
            n_arms: 4,
            pulls_per_arm: 1,
        };
        assert!(likelihood_ratio_audit(&mu, &mu2, || rr, |_| true, 1, 0).is_err());
    }
}
