//! Online stochastic mirror descent on the probability simplex with the
//! square-root potential `F(q) = -2 sum_i sqrt(q_i)`.
//!
//! Each round samples an arm from the current iterate, turns the reward into a
//! loss `1 - r`, builds a loss estimate and takes a Bregman-regularized step.
//! The step has no closed form; its stationarity system
//! `q'(i) = (1/sqrt(q(i)) + eta (est(i) + lambda))^-2` is solved for the
//! multiplier `lambda` by safeguarded Newton iteration.

use serde::{Deserialize, Serialize};

use crate::env::{BernoulliInstance, PullStats, RngStream};
use crate::error::{ensure_input, Error, Result};

/// Smallest weight carried into the next step's `1/sqrt(q)`.
pub const WEIGHT_FLOOR: f64 = 1e-300;
/// Iteration cap for the multiplier search.
pub const MAX_PROJECTION_ITERS: usize = 200;
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;

/// A probability vector over the arms of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexDistribution {
    weights: Vec<f64>,
}

impl SimplexDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        ensure_input!(!weights.is_empty(), "distribution needs at least one entry");
        ensure_input!(
            weights.iter().all(|w| w.is_finite() && *w >= 0.0),
            "weights must be finite and nonnegative"
        );
        let total: f64 = weights.iter().sum();
        ensure_input!((total - 1.0).abs() <= 1e-9, "weights sum to {total}, not 1");
        Ok(Self { weights })
    }

    /// Minimizer of the potential over the simplex, i.e. the uniform vector.
    pub fn uniform(k: usize) -> Result<Self> {
        ensure_input!(k >= 1, "simplex dimension must be at least 1");
        Ok(Self {
            weights: vec![1.0 / k as f64; k],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Free-function alias for [`SimplexDistribution::uniform`].
pub fn init_distribution(k: usize) -> Result<SimplexDistribution> {
    SimplexDistribution::uniform(k)
}

/// Which loss estimator the learner uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorVariant {
    /// The chosen-arm term is not divided by its sampling probability.
    Unweighted,
    /// The chosen-arm term divided by `q(A)`, which makes `est(i)` an unbiased
    /// estimate of `loss(i) - 1/2` when `eta = 0`.
    #[default]
    CenteredImportanceWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OsmdConfig {
    /// Number of rounds `L`.
    pub rounds: u64,
    /// Learning rate; `None` means `sqrt(8 / L)`.
    pub eta: Option<f64>,
    pub estimator_variant: EstimatorVariant,
    pub projection_tol: f64,
}

impl OsmdConfig {
    pub fn new(rounds: u64) -> Self {
        Self {
            rounds,
            eta: None,
            estimator_variant: EstimatorVariant::default(),
            projection_tol: DEFAULT_PROJECTION_TOL,
        }
    }

    pub fn with_variant(mut self, variant: EstimatorVariant) -> Self {
        self.estimator_variant = variant;
        self
    }

    pub fn with_rounds(mut self, rounds: u64) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
            .unwrap_or_else(|| (8.0 / self.rounds.max(1) as f64).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(eta) = self.eta {
            ensure_input!(
                eta > 0.0 && eta.is_finite(),
                "eta must be positive, got {eta}"
            );
        }
        ensure_input!(
            self.projection_tol > 0.0,
            "projection tolerance must be positive"
        );
        Ok(())
    }
}

/// Loss estimate for every coordinate after observing `loss` on arm `chosen`.
pub fn loss_estimate(
    q: &SimplexDistribution,
    chosen: usize,
    loss: f64,
    eta: f64,
    variant: EstimatorVariant,
) -> Result<Vec<f64>> {
    ensure_input!(chosen < q.len(), "chosen arm {chosen} out of range");
    ensure_input!((0.0..=1.0).contains(&loss), "loss {loss} outside [0, 1]");
    let qa = q.weights[chosen];
    if !(qa > 0.0) {
        return Err(Error::Numeric(format!(
            "chosen arm {chosen} has zero sampling weight"
        )));
    }
    let mut est = vec![0.0; q.len()];
    fill_estimate(&q.weights, chosen, loss, eta, variant, &mut est);
    Ok(est)
}

fn fill_estimate(
    q: &[f64],
    chosen: usize,
    loss: f64,
    eta: f64,
    variant: EstimatorVariant,
    est: &mut [f64],
) {
    let qa = q[chosen];
    for (i, (e, &qi)) in est.iter_mut().zip(q).enumerate() {
        let denom = qi + qi.sqrt();
        *e = -eta * qa / (8.0 * denom);
        if i == chosen {
            let direct = loss - 0.5 + eta / 8.0 * (1.0 + 1.0 / denom);
            *e += match variant {
                EstimatorVariant::Unweighted => direct,
                EstimatorVariant::CenteredImportanceWeighted => direct / qi,
            };
        }
    }
}

/// Diagnostics from one mirror step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionReport {
    pub multiplier: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// `argmin_q <q, est> + B_F(q, prev) / eta` over the simplex.
pub fn mirror_step(
    q: &SimplexDistribution,
    est: &[f64],
    eta: f64,
    tol: f64,
) -> Result<SimplexDistribution> {
    ensure_input!(est.len() == q.len(), "estimate length mismatch");
    ensure_input!(est.iter().all(|e| e.is_finite()), "estimate must be finite");
    ensure_input!(eta > 0.0 && eta.is_finite(), "eta must be positive");
    ensure_input!(tol > 0.0, "tolerance must be positive");
    ensure_input!(
        q.weights.iter().all(|w| *w > 0.0),
        "mirror step needs a strictly positive iterate"
    );
    let mut out = vec![0.0; q.len()];
    let mut scratch = vec![0.0; q.len()];
    project(&q.weights, est, eta, tol, &mut scratch, &mut out)?;
    Ok(SimplexDistribution { weights: out })
}

/// Solve for the multiplier and write the normalized iterate into `out`.
///
/// `base` receives `1/sqrt(q(i)) + eta est(i)`; the iterate is
/// `(base(i) + eta lambda)^-2` for the unique `lambda` above `-min(base)/eta`
/// making it sum to one. The sum is strictly decreasing in `lambda`, so a
/// bracket plus Newton steps that fall back to bisection converges.
pub(crate) fn project(
    q: &[f64],
    est: &[f64],
    eta: f64,
    tol: f64,
    base: &mut [f64],
    out: &mut [f64],
) -> Result<ProjectionReport> {
    let mut min_base = f64::INFINITY;
    for ((b, &qi), &e) in base.iter_mut().zip(q).zip(est) {
        *b = 1.0 / qi.max(WEIGHT_FLOOR).sqrt() + eta * e;
        min_base = min_base.min(*b);
    }
    // lambda is parameterized through s = eta * lambda, domain s > -min_base
    let floor = -min_base;
    let eval = |s: f64| -> (f64, f64) {
        let mut sum = 0.0;
        let mut deriv = 0.0;
        for &b in base.iter() {
            let x = b + s;
            let inv = 1.0 / (x * x);
            sum += inv;
            deriv -= 2.0 * inv / x;
        }
        (sum - 1.0, deriv)
    };

    let (mut lo, mut hi);
    let mut s = 0.0f64.max(floor + 1e-300);
    let (g0, _) = eval(s);
    if g0.abs() <= tol {
        return finish(base, s, eta, 0, g0, out);
    }
    if g0 > 0.0 {
        lo = s;
        let mut step = 1.0f64.max(min_base.abs());
        hi = s + step;
        let mut grown = 0;
        while eval(hi).0 > 0.0 {
            lo = hi;
            step *= 2.0;
            hi += step;
            grown += 1;
            if grown > MAX_PROJECTION_ITERS {
                return Err(bracket_failure(q, est, eta, lo, hi));
            }
        }
    } else {
        hi = s;
        let mut gap = s - floor;
        lo = floor + gap / 2.0;
        let mut shrunk = 0;
        while eval(lo).0 < 0.0 {
            hi = lo;
            gap /= 2.0;
            lo = floor + gap / 2.0;
            shrunk += 1;
            if shrunk > MAX_PROJECTION_ITERS || lo <= floor {
                return Err(bracket_failure(q, est, eta, lo, hi));
            }
        }
    }

    s = 0.5 * (lo + hi);
    for iter in 1..=MAX_PROJECTION_ITERS {
        let (g, dg) = eval(s);
        if g.abs() <= tol {
            return finish(base, s, eta, iter, g, out);
        }
        if g > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - g / dg;
        s = if newton > lo && newton < hi && dg < 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * s.abs().max(1.0) {
            let (g, _) = eval(s);
            if g.abs() <= tol.max(1e-12) {
                return finish(base, s, eta, iter, g, out);
            }
        }
    }
    Err(Error::Numeric(format!(
        "mirror step did not converge in {MAX_PROJECTION_ITERS} iterations \
         (bracket [{lo:e}, {hi:e}], eta {eta}, q {q:?}, est {est:?})"
    )))
}

fn finish(
    base: &[f64],
    s: f64,
    eta: f64,
    iterations: usize,
    residual: f64,
    out: &mut [f64],
) -> Result<ProjectionReport> {
    let mut total = 0.0;
    for (o, &b) in out.iter_mut().zip(base) {
        let x = b + s;
        *o = (1.0 / (x * x)).max(WEIGHT_FLOOR);
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
    Ok(ProjectionReport {
        multiplier: s / eta,
        iterations,
        residual,
    })
}

fn bracket_failure(q: &[f64], est: &[f64], eta: f64, lo: f64, hi: f64) -> Error {
    Error::Numeric(format!(
        "could not bracket the simplex multiplier (last bracket [{lo:e}, {hi:e}], \
         eta {eta}, q {q:?}, est {est:?})"
    ))
}

/// Mirror-descent learner over a fixed subset of an instance's arms.
#[derive(Debug, Clone)]
pub struct OsmdLearner {
    arms: Vec<usize>,
    eta: f64,
    variant: EstimatorVariant,
    tol: f64,
    q: Vec<f64>,
    est: Vec<f64>,
    scratch: Vec<f64>,
}

impl OsmdLearner {
    pub fn new(arms: &[usize], config: &OsmdConfig) -> Result<Self> {
        ensure_input!(!arms.is_empty(), "learner needs at least one arm");
        config.validate()?;
        let k = arms.len();
        Ok(Self {
            arms: arms.to_vec(),
            eta: config.learning_rate(),
            variant: config.estimator_variant,
            tol: config.projection_tol,
            q: vec![1.0 / k as f64; k],
            est: vec![0.0; k],
            scratch: vec![0.0; k],
        })
    }

    pub fn distribution(&self) -> &[f64] {
        &self.q
    }

    /// Play one round; returns the global arm index pulled and its reward.
    pub fn step(
        &mut self,
        instance: &BernoulliInstance,
        rng: &mut RngStream,
    ) -> Result<(usize, u8)> {
        let local = rng.categorical(&self.q);
        let arm = self.arms[local];
        let reward = instance.draw(arm, rng);
        if self.q.len() > 1 {
            let loss = 1.0 - f64::from(reward);
            fill_estimate(&self.q, local, loss, self.eta, self.variant, &mut self.est);
            let prev = self.q.clone();
            project(
                &prev,
                &self.est,
                self.eta,
                self.tol,
                &mut self.scratch,
                &mut self.q,
            )?;
        }
        Ok((arm, reward))
    }
}

/// Run the learner for `config.rounds` rounds on `arms`.
pub fn run_osmd(
    arms: &[usize],
    instance: &BernoulliInstance,
    config: &OsmdConfig,
    rng: &mut RngStream,
) -> Result<PullStats> {
    for &a in arms {
        ensure_input!(a < instance.n_arms(), "arm {a} out of range");
    }
    let mut stats = PullStats::new(instance.n_arms());
    if config.rounds == 0 {
        return Ok(stats);
    }
    let mut learner = OsmdLearner::new(arms, config)?;
    for _ in 0..config.rounds {
        let (arm, reward) = learner.step(instance, rng)?;
        stats.record(arm, f64::from(reward));
    }
    Ok(stats)
}
