//! Best arm identification and retention algorithms.
//!
//! * [`median_elimination`]: (eps, delta)-PAC identification by repeated halving.
//! * [`pac_bar`]: (eps, delta)-PAC retention of `m` arms.
//! * [`find_best`]: mirror descent followed by sampling an arm proportionally to its pull count.
//! * [`r_bar_sample`]: retention with expected gap below `r` at minimal sample cost.
//! * [`r_bar_regret`]: retention with expected gap below `r` at low regret.
//!
//! Every real-valued budget is rounded up with [`ceil_budget`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{BernoulliInstance, PullStats, RngStream};
use crate::error::{ensure_input, Result};
use crate::osmd::{run_osmd, OsmdConfig};

/// Ceiling that ignores floating-point noise within `1e-9` relative of an integer.
pub fn ceil_budget(x: f64) -> u64 {
    assert!(
        x.is_finite() && x >= 0.0,
        "budget {x} must be finite and nonnegative"
    );
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

/// Parameters of (eps, delta)-PAC retention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacParams {
    pub eps: f64,
    pub delta: f64,
    pub m: usize,
}

impl PacParams {
    pub fn new(eps: f64, delta: f64, m: usize) -> Result<Self> {
        ensure_input!(0.0 < eps && eps < 1.0, "eps = {eps} must lie in (0, 1)");
        ensure_input!(
            0.0 < delta && delta < 1.0,
            "delta = {delta} must lie in (0, 1)"
        );
        ensure_input!(m >= 1, "m must be at least 1");
        Ok(Self { eps, delta, m })
    }
}

/// One elimination round: how many arms were sampled and how often each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationRound {
    pub arms: usize,
    pub pulls_per_arm: u64,
}

impl EliminationRound {
    pub fn samples(&self) -> u64 {
        self.arms as u64 * self.pulls_per_arm
    }
}

/// `ceil(4 / eps^2 * ln(3 / delta))`.
pub fn elimination_pulls_per_arm(eps: f64, delta: f64) -> u64 {
    ceil_budget(4.0 / (eps * eps) * (3.0 / delta).ln())
}

/// Schedule followed when every round keeps exactly `ceil(|S|/2)` arms.
pub fn nominal_elimination_schedule(k: usize, eps: f64, delta: f64) -> Vec<EliminationRound> {
    let mut rounds = Vec::new();
    let (mut size, mut eps_l, mut delta_l) = (k, eps / 4.0, delta / 2.0);
    while size > 1 {
        rounds.push(EliminationRound {
            arms: size,
            pulls_per_arm: elimination_pulls_per_arm(eps_l, delta_l),
        });
        size = size.div_ceil(2);
        eps_l *= 0.75;
        delta_l /= 2.0;
    }
    rounds
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationOutcome {
    pub arm: usize,
    pub samples: u64,
    pub rounds: Vec<EliminationRound>,
    pub stats: PullStats,
}

/// Median elimination over `arms`.
///
/// Round `l` pulls every surviving arm [`elimination_pulls_per_arm`] times,
/// starting from `eps/4, delta/2` and shrinking by `3/4` and `1/2`. Arms whose
/// empirical mean falls strictly below the `ceil(|S|/2)`-th largest are dropped
/// and ties with it survive. When nothing would be dropped, the tied arms are
/// thinned uniformly at random down to `ceil(|S|/2)` survivors.
pub fn median_elimination(
    arms: &[usize],
    eps: f64,
    delta: f64,
    instance: &BernoulliInstance,
    rng: &mut RngStream,
) -> Result<EliminationOutcome> {
    ensure_input!(
        !arms.is_empty(),
        "median elimination needs at least one arm"
    );
    ensure_input!(0.0 < eps && eps < 1.0, "eps = {eps} must lie in (0, 1)");
    ensure_input!(
        0.0 < delta && delta < 1.0,
        "delta = {delta} must lie in (0, 1)"
    );
    check_arms(arms, instance)?;

    let mut stats = PullStats::new(instance.n_arms());
    let mut rounds = Vec::new();
    let mut survivors = arms.to_vec();
    let (mut eps_l, mut delta_l) = (eps / 4.0, delta / 2.0);
    while survivors.len() > 1 {
        let per = elimination_pulls_per_arm(eps_l, delta_l);
        // same pull count for every arm, so reward totals order the empirical means
        let totals: Vec<u64> = survivors
            .iter()
            .map(|&a| {
                let total = instance.draw_sum(a, per, rng);
                stats.record_many(a, per, total as f64);
                total
            })
            .collect();
        let keep = survivors.len().div_ceil(2);
        let mut sorted = totals.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let median = sorted[keep - 1];

        let mut next: Vec<usize> = survivors
            .iter()
            .zip(&totals)
            .filter(|(_, &t)| t >= median)
            .map(|(&a, _)| a)
            .collect();
        if next.len() == survivors.len() {
            let above: Vec<usize> = survivors
                .iter()
                .zip(&totals)
                .filter(|(_, &t)| t > median)
                .map(|(&a, _)| a)
                .collect();
            let tied: Vec<usize> = survivors
                .iter()
                .zip(&totals)
                .filter(|(_, &t)| t == median)
                .map(|(&a, _)| a)
                .collect();
            let (picked, _) = rng.choose_subset(&tied, keep - above.len());
            next = above;
            next.extend(picked);
            next.sort_unstable();
        }
        rounds.push(EliminationRound {
            arms: survivors.len(),
            pulls_per_arm: per,
        });
        survivors = next;
        eps_l *= 0.75;
        delta_l /= 2.0;
    }
    Ok(EliminationOutcome {
        arm: survivors[0],
        samples: stats.rounds(),
        rounds,
        stats,
    })
}

fn check_arms(arms: &[usize], instance: &BernoulliInstance) -> Result<()> {
    for (i, &a) in arms.iter().enumerate() {
        ensure_input!(a < instance.n_arms(), "arm {a} out of range");
        ensure_input!(!arms[..i].contains(&a), "arm {a} listed twice");
    }
    Ok(())
}

/// Outcome of a retention algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RetentionResult {
    /// Retained arms, sorted ascending.
    pub retained: Vec<usize>,
    pub samples_used: u64,
    pub pull_stats: PullStats,
    /// Arm returned by the final identification subroutine, if one ran.
    pub chosen_arm: Option<usize>,
    /// Arm found by the first mirror-descent stage of [`r_bar_regret`].
    pub first_stage_arm: Option<usize>,
    /// The uniformly sampled subset handed to the identification subroutine.
    pub sampled_subset: Vec<usize>,
    /// Rounds executed by median elimination, when it ran.
    pub elimination_rounds: Vec<EliminationRound>,
}

impl RetentionResult {
    fn new(instance: &BernoulliInstance, retained: Vec<usize>, stats: PullStats) -> Self {
        debug_assert!(retained.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(retained.iter().all(|&a| a < instance.n_arms()));
        Self {
            retained,
            samples_used: stats.rounds(),
            pull_stats: stats,
            chosen_arm: None,
            first_stage_arm: None,
            sampled_subset: Vec::new(),
            elimination_rounds: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.retained.len()
    }

    /// `mu* - max_{i retained} mu_i` on the given instance.
    pub fn gap(&self, instance: &BernoulliInstance) -> f64 {
        instance
            .expected_gap(&self.retained)
            .expect("retained arms are valid and nonempty")
    }

    pub fn regret(&self, instance: &BernoulliInstance) -> f64 {
        self.pull_stats.regret(instance)
    }
}

fn union_sorted(mut a: Vec<usize>, extra: impl IntoIterator<Item = usize>) -> Vec<usize> {
    a.extend(extra);
    a.sort_unstable();
    a.dedup();
    a
}

/// Confidence handed to median elimination by [`pac_bar`]: `n delta / (n - m + 1)`.
pub fn pac_bar_inner_delta(n: usize, params: &PacParams) -> f64 {
    n as f64 * params.delta / (n - params.m + 1) as f64
}

/// (eps, delta)-PAC retention of `params.m` arms out of all arms of `instance`.
///
/// Picks `n - m + 1` arms uniformly, runs median elimination on them with
/// confidence [`pac_bar_inner_delta`], and keeps its output plus every arm not
/// picked. When that confidence is not below one, `m` uniformly random arms
/// are returned without sampling.
pub fn pac_bar(
    params: &PacParams,
    instance: &BernoulliInstance,
    rng: &mut RngStream,
) -> Result<RetentionResult> {
    let n = instance.n_arms();
    ensure_input!(params.m <= n, "m = {} exceeds n = {n}", params.m);
    let all: Vec<usize> = (0..n).collect();
    let inner_delta = pac_bar_inner_delta(n, params);
    if inner_delta >= 1.0 {
        let (kept, _) = rng.choose_subset(&all, params.m);
        return Ok(RetentionResult::new(instance, kept, PullStats::new(n)));
    }
    let (subset, rest) = rng.choose_subset(&all, n - params.m + 1);
    let me = median_elimination(&subset, params.eps, inner_delta, instance, rng)?;
    let mut result = RetentionResult::new(instance, union_sorted(rest, [me.arm]), me.stats);
    result.chosen_arm = Some(me.arm);
    result.sampled_subset = subset;
    result.elimination_rounds = me.rounds;
    Ok(result)
}

/// Mirror descent on `arms` for `rounds` rounds, then one arm drawn with
/// probability proportional to its pull count. With zero rounds the arm is
/// uniform over `arms`.
pub fn find_best(
    arms: &[usize],
    rounds: u64,
    instance: &BernoulliInstance,
    config: &OsmdConfig,
    rng: &mut RngStream,
) -> Result<(usize, PullStats)> {
    ensure_input!(!arms.is_empty(), "find_best needs at least one arm");
    check_arms(arms, instance)?;
    if rounds == 0 {
        let pick = arms[rng.random_range(0..arms.len())];
        return Ok((pick, PullStats::new(instance.n_arms())));
    }
    let stats = run_osmd(arms, instance, &config.with_rounds(rounds), rng)?;
    let counts: Vec<u64> = arms.iter().map(|&a| stats.pulls()[a]).collect();
    let pick = arms[select_by_counts(&counts, rng)];
    Ok((pick, stats))
}

/// Index `j` drawn with probability `counts[j] / sum(counts)`; uniform when all are zero.
pub fn select_by_counts(counts: &[u64], rng: &mut RngStream) -> usize {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return rng.random_range(0..counts.len());
    }
    let mut u = rng.random_range(0..total);
    for (j, &c) in counts.iter().enumerate() {
        if u < c {
            return j;
        }
        u -= c;
    }
    unreachable!("u < total")
}

/// `2 (n - m + 2)^3 / (n r)^2`.
pub fn sample_budget(n: usize, m: usize, r: f64) -> f64 {
    let k = (n - m + 2) as f64;
    2.0 * k.powi(3) / (n as f64 * r).powi(2)
}

/// Stage budgets `(L1, L2)` of [`r_bar_regret`] for `m >= 2`:
/// `L2 = 2 (n - m + 2)^3 / ((n - 1)^2 r^2)` and `L1 = (m - 2)/(n - 1) L2`.
pub fn regret_budgets(n: usize, m: usize, r: f64) -> (f64, f64) {
    let k = (n - m + 2) as f64;
    let nm1 = (n - 1) as f64;
    let l2 = 2.0 * k.powi(3) / (nm1 * nm1 * r * r);
    let l1 = (m - 2) as f64 / nm1 * l2;
    (l1, l2)
}

/// Regret bound of [`r_bar_regret`] for `m >= 2`:
/// `sqrt(2 n L1) + sqrt(2 (n-m+2) L2) + (m-2)/(n-1) sqrt(2n/L1) L2`.
/// The last term is taken as zero when `m = 2`.
pub fn regret_bound(n: usize, m: usize, l1: f64, l2: f64) -> f64 {
    let nf = n as f64;
    let first = (2.0 * nf * l1).sqrt();
    let second = (2.0 * (n - m + 2) as f64 * l2).sqrt();
    let third = if m > 2 && l1 > 0.0 {
        (m - 2) as f64 / (nf - 1.0) * (2.0 * nf / l1).sqrt() * l2
    } else {
        0.0
    };
    first + second + third
}

fn check_retention(n: usize, m: usize, r: f64) -> Result<()> {
    ensure_input!(1 <= m && m <= n, "need 1 <= m <= n, got m = {m}, n = {n}");
    ensure_input!(r > 0.0 && r.is_finite(), "r = {r} must be positive");
    Ok(())
}

/// Retention with expected gap below `r`: mirror descent on `n - m + 1`
/// uniformly chosen arms for `ceil(2 (n-m+2)^3 / (n r)^2)` rounds.
pub fn r_bar_sample(
    m: usize,
    r: f64,
    instance: &BernoulliInstance,
    config: &OsmdConfig,
    rng: &mut RngStream,
) -> Result<RetentionResult> {
    let n = instance.n_arms();
    check_retention(n, m, r)?;
    let all: Vec<usize> = (0..n).collect();
    let (subset, rest) = rng.choose_subset(&all, n - m + 1);
    let budget = ceil_budget(sample_budget(n, m, r));
    let (pick, stats) = find_best(&subset, budget, instance, config, rng)?;
    let mut result = RetentionResult::new(instance, union_sorted(rest, [pick]), stats);
    result.chosen_arm = Some(pick);
    result.sampled_subset = subset;
    Ok(result)
}

/// Retention with expected gap below `r` and low regret.
///
/// For `m = 1`, a single mirror-descent run on all arms for `ceil(2n/r^2)`
/// rounds. Otherwise: `i1` from all arms with `L1` rounds; `n - m + 1` arms
/// `S'` sampled from the rest; `i2` from `S' + {i1}` with `L2` rounds. If
/// `i2 = i1`, `n - m` random arms of `S'` are dropped, else all of
/// `S' - {i2}` is dropped.
pub fn r_bar_regret(
    m: usize,
    r: f64,
    instance: &BernoulliInstance,
    config: &OsmdConfig,
    rng: &mut RngStream,
) -> Result<RetentionResult> {
    let n = instance.n_arms();
    check_retention(n, m, r)?;
    let all: Vec<usize> = (0..n).collect();
    if m == 1 {
        let budget = ceil_budget(2.0 * n as f64 / (r * r));
        let (pick, stats) = find_best(&all, budget, instance, config, rng)?;
        let mut result = RetentionResult::new(instance, vec![pick], stats);
        result.chosen_arm = Some(pick);
        result.sampled_subset = all;
        return Ok(result);
    }

    let (l1, l2) = regret_budgets(n, m, r);
    let (first, mut stats) = find_best(&all, ceil_budget(l1), instance, config, rng)?;
    let others: Vec<usize> = all.iter().copied().filter(|&a| a != first).collect();
    let (subset, rest) = rng.choose_subset(&others, n - m + 1);
    let contenders = union_sorted(subset.clone(), [first]);
    let (second, stage2) = find_best(&contenders, ceil_budget(l2), instance, config, rng)?;
    stats.merge(&stage2);

    let survivors: Vec<usize> = if second == first {
        let (_, kept) = rng.choose_subset(&subset, n - m);
        kept
    } else {
        vec![second]
    };
    let retained = union_sorted(rest, survivors.into_iter().chain([first]));
    let mut result = RetentionResult::new(instance, retained, stats);
    result.chosen_arm = Some(second);
    result.first_stage_arm = Some(first);
    result.sampled_subset = subset;
    Ok(result)
}
