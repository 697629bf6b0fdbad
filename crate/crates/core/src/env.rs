//! Bernoulli bandit instances, seeded reward streams and regret accounting.
//!
//! Arms are indexed from 0 throughout the crate.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_input, Error, Result};

/// Mean vector of a Bernoulli multi-armed bandit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BernoulliInstance {
    means: Vec<f64>,
    best: usize,
}

impl BernoulliInstance {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        ensure_input!(!means.is_empty(), "an instance needs at least one arm");
        if let Some((i, m)) = means
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(Error::Input(format!(
                "mean of arm {i} is {m}, outside [0, 1]"
            )));
        }
        // lowest index wins ties
        let mut best = 0;
        for (i, &m) in means.iter().enumerate() {
            if m > means[best] {
                best = i;
            }
        }
        Ok(Self { means, best })
    }

    pub fn n_arms(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mean(&self, arm: usize) -> f64 {
        self.means[arm]
    }

    /// Index of the best arm (lowest index among ties).
    pub fn best_arm(&self) -> usize {
        self.best
    }

    pub fn best_mean(&self) -> f64 {
        self.means[self.best]
    }

    /// Gap `mu* - mu_arm` to the globally best arm.
    pub fn gap(&self, arm: usize) -> f64 {
        self.best_mean() - self.means[arm]
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.means.iter().map(|m| self.best_mean() - m).collect()
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        ensure_input!(
            arm < self.means.len(),
            "arm {arm} out of range for an instance with {} arms",
            self.means.len()
        );
        Ok(())
    }

    /// Draw one reward from `arm`.
    pub fn sample(&self, arm: usize, rng: &mut RngStream) -> Result<u8> {
        self.check_arm(arm)?;
        Ok(self.draw(arm, rng))
    }

    /// Total reward of `count` independent pulls of `arm`.
    ///
    /// Drawn as a single binomial variate, which has exactly the law of the sum
    /// of `count` Bernoulli rewards.
    pub fn sample_sum(&self, arm: usize, count: u64, rng: &mut RngStream) -> Result<u64> {
        self.check_arm(arm)?;
        Ok(self.draw_sum(arm, count, rng))
    }

    pub(crate) fn draw(&self, arm: usize, rng: &mut RngStream) -> u8 {
        u8::from(rng.random::<f64>() < self.means[arm])
    }

    pub(crate) fn draw_sum(&self, arm: usize, count: u64, rng: &mut RngStream) -> u64 {
        let p = self.means[arm];
        if count == 0 || p == 0.0 {
            return 0;
        }
        if p == 1.0 {
            return count;
        }
        Binomial::new(count, p)
            .expect("mean validated in [0, 1]")
            .sample(rng)
    }

    /// Best-mean gap left by a retained set: `mu* - max_{i in retained} mu_i`.
    pub fn expected_gap(&self, retained: &[usize]) -> Result<f64> {
        ensure_input!(!retained.is_empty(), "retained set must be nonempty");
        let mut best = f64::NEG_INFINITY;
        for &arm in retained {
            self.check_arm(arm)?;
            best = best.max(self.means[arm]);
        }
        Ok(self.best_mean() - best)
    }

    /// Best arm within a subset (lowest index among ties).
    pub fn best_in(&self, arms: &[usize]) -> Option<usize> {
        arms.iter().copied().fold(None, |acc, a| match acc {
            Some(b) if self.means[b] > self.means[a] => Some(b),
            Some(b) if self.means[b] == self.means[a] && b < a => Some(b),
            _ => Some(a),
        })
    }
}

impl TryFrom<Vec<f64>> for BernoulliInstance {
    type Error = Error;

    fn try_from(means: Vec<f64>) -> Result<Self> {
        Self::new(means)
    }
}

impl From<BernoulliInstance> for Vec<f64> {
    fn from(inst: BernoulliInstance) -> Self {
        inst.means
    }
}

/// Hard instance family: arm 0 has mean `1/2 + eps`, every other arm `1/2`,
/// and when `j` is given arm `j` is raised to `1/2 + 2 eps`.
pub fn hard_instance(n: usize, eps: f64, j: Option<usize>) -> Result<BernoulliInstance> {
    ensure_input!(n >= 2, "hard instances need n >= 2, got {n}");
    ensure_input!(
        (0.0..=0.25).contains(&eps),
        "eps must lie in [0, 1/4] so means stay in [0, 1], got {eps}"
    );
    if eps > 0.125 {
        log_warn(&format!(
            "eps = {eps} exceeds 1/8, outside the lower-bound hypotheses"
        ));
    }
    let mut means = vec![0.5; n];
    means[0] = 0.5 + eps;
    if let Some(j) = j {
        ensure_input!(j != 0, "j = 0 is the base instance; pass None instead");
        ensure_input!(j < n, "j = {j} out of range for n = {n}");
        means[j] = 0.5 + 2.0 * eps;
    }
    BernoulliInstance::new(means)
}

fn log_warn(msg: &str) {
    eprintln!("warning: {msg}");
}

/// Seeded, splittable random stream.
///
/// A ChaCha8 keystream keyed by `seed`, with `stream` selecting one of 2^64
/// independent streams. Trials use their index as the stream id.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// `k` distinct elements of `items`, uniformly at random (partial Fisher-Yates).
    /// Returns `(chosen, rest)`.
    pub fn choose_subset(&mut self, items: &[usize], k: usize) -> (Vec<usize>, Vec<usize>) {
        let mut pool = items.to_vec();
        let k = k.min(pool.len());
        let (chosen, rest) = pool.partial_shuffle(&mut self.inner, k);
        let mut chosen = chosen.to_vec();
        let mut rest = rest.to_vec();
        chosen.sort_unstable();
        rest.sort_unstable();
        (chosen, rest)
    }

    /// Index drawn from a probability vector by inverse CDF with one uniform.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u: f64 = self.random::<f64>() * probs.iter().sum::<f64>();
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // rounding left u beyond the last partial sum
        probs
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(probs.len() - 1)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Per-arm pull counts and reward totals for one run.
///
/// Counts are indexed by global arm index even when a run only touches a subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullStats {
    pulls: Vec<u64>,
    cumulative_reward: f64,
    rounds: u64,
}

impl PullStats {
    pub fn new(n_arms: usize) -> Self {
        Self {
            pulls: vec![0; n_arms],
            cumulative_reward: 0.0,
            rounds: 0,
        }
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.record_many(arm, 1, reward);
    }

    pub fn record_many(&mut self, arm: usize, count: u64, total_reward: f64) {
        self.pulls[arm] += count;
        self.rounds += count;
        self.cumulative_reward += total_reward;
    }

    /// Accumulate another run on the same instance.
    pub fn merge(&mut self, other: &PullStats) {
        assert_eq!(self.pulls.len(), other.pulls.len(), "arm count mismatch");
        for (a, b) in self.pulls.iter_mut().zip(&other.pulls) {
            *a += b;
        }
        self.rounds += other.rounds;
        self.cumulative_reward += other.cumulative_reward;
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative_reward
    }

    /// Pseudo-regret `sum_i gap_i * T_i` against the instance's best arm.
    pub fn regret(&self, instance: &BernoulliInstance) -> f64 {
        self.pulls
            .iter()
            .zip(instance.means())
            .map(|(&t, &m)| (instance.best_mean() - m) * t as f64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_means_are_deterministic() {
        let inst = BernoulliInstance::new(vec![1.0, 0.0]).unwrap();
        let mut rng = RngStream::new(7, 0);
        for _ in 0..1000 {
            assert_eq!(inst.sample(0, &mut rng).unwrap(), 1);
            assert_eq!(inst.sample(1, &mut rng).unwrap(), 0);
        }
        assert_eq!(inst.sample_sum(0, 123, &mut rng).unwrap(), 123);
        assert_eq!(inst.sample_sum(1, 123, &mut rng).unwrap(), 0);
    }

    #[test]
    fn fair_coin_empirical_mean() {
        let inst = BernoulliInstance::new(vec![0.5]).unwrap();
        let mut rng = RngStream::new(11, 3);
        let draws = 100_000;
        let ones: u64 = (0..draws)
            .map(|_| u64::from(inst.sample(0, &mut rng).unwrap()))
            .sum();
        let mean = ones as f64 / draws as f64;
        // 3 sigma band is ~0.0047
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn arm_out_of_range() {
        let inst = BernoulliInstance::new(vec![0.5, 0.2]).unwrap();
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(inst.sample(2, &mut rng), Err(Error::Input(_))));
    }

    #[test]
    fn invalid_means_rejected() {
        assert!(BernoulliInstance::new(vec![]).is_err());
        assert!(BernoulliInstance::new(vec![0.5, 1.2]).is_err());
        assert!(BernoulliInstance::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn hard_instances() {
        let h1 = hard_instance(4, 0.1, None).unwrap();
        assert_eq!(h1.means(), &[0.6, 0.5, 0.5, 0.5]);
        let h3 = hard_instance(4, 0.1, Some(2)).unwrap();
        assert_eq!(h3.means(), &[0.6, 0.5, 0.7, 0.5]);
        assert_eq!(h3.best_arm(), 2);
        let flat = hard_instance(2, 0.0, Some(1)).unwrap();
        assert_eq!(flat.means(), &[0.5, 0.5]);
        assert!(hard_instance(4, 0.1, Some(0)).is_err());
        assert!(hard_instance(1, 0.1, None).is_err());
    }

    #[test]
    fn gaps_of_retained_sets() {
        let h1 = hard_instance(4, 0.1, None).unwrap();
        assert_eq!(h1.expected_gap(&[0, 1]).unwrap(), 0.0);
        assert!((h1.expected_gap(&[1, 2]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(h1.expected_gap(&[0, 1, 2, 3]).unwrap(), 0.0);
        assert!(h1.expected_gap(&[]).is_err());
        assert!(h1.expected_gap(&[4]).is_err());
    }

    #[test]
    fn best_arm_ties_take_lowest_index() {
        let inst = BernoulliInstance::new(vec![0.3, 0.7, 0.7]).unwrap();
        assert_eq!(inst.best_arm(), 1);
        assert_eq!(inst.best_in(&[2, 1, 0]), Some(1));
    }

    #[test]
    fn streams_reproduce_and_differ() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(5, 9);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(5, 9);
            (0..8).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = RngStream::new(5, 10);
            (0..8).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn regret_from_counts() {
        let inst = BernoulliInstance::new(vec![0.6, 0.5, 0.4]).unwrap();
        let mut stats = PullStats::new(3);
        stats.record_many(0, 10, 6.0);
        stats.record_many(1, 4, 2.0);
        stats.record_many(2, 5, 2.0);
        assert_eq!(stats.rounds(), 19);
        assert!((stats.regret(&inst) - (0.1 * 4.0 + 0.2 * 5.0)).abs() < 1e-12);
    }

    #[test]
    fn subset_is_a_partition() {
        let mut rng = RngStream::new(1, 1);
        let items: Vec<usize> = (0..10).collect();
        let (chosen, rest) = rng.choose_subset(&items, 4);
        assert_eq!(chosen.len(), 4);
        let mut all = [chosen, rest].concat();
        all.sort_unstable();
        assert_eq!(all, items);
    }
}
