//! Property suites run by `verify kl` and `verify osmd`.
//!
//! Each check sweeps an exhaustive grid and/or a batch of seeded random draws
//! and reports the worst margin it saw.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use super::stats::MeanEstimate;
use crate::env::{hard_instance, RngStream};
use crate::error::Result;
use crate::kl::{
    bai_kl_ratio, bar_kl_lower_bound, bernoulli_kl, kl_sum_lower_bound, log_inequalities_check,
    log_sum_sides, BaiDomain, INEQUALITY_SLACK,
};
use crate::osmd::{
    mirror_step, run_osmd, EstimatorVariant, OsmdConfig, OsmdLearner, SimplexDistribution,
};

const RANDOM_DRAWS: usize = 10_000;

/// Outcome of one property sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: u64,
    /// Smallest observed `lhs - rhs` (or analogous slack); negative beyond the tolerance means failure.
    pub worst_margin: f64,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} ({} cases, worst margin {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst_margin
        )
    }
}

/// Accumulates margins `lhs - rhs` that must stay above `-tol`.
struct Sweep {
    name: &'static str,
    tol: f64,
    cases: u64,
    worst: f64,
}

impl Sweep {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            cases: 0,
            worst: f64::INFINITY,
        }
    }

    fn margin(&mut self, m: f64) {
        self.cases += 1;
        // NaN must fail
        self.worst = if m.is_nan() {
            f64::NEG_INFINITY
        } else {
            self.worst.min(m)
        };
    }

    fn ge(&mut self, lhs: f64, rhs: f64) {
        if lhs == f64::INFINITY || rhs == f64::NEG_INFINITY {
            self.margin(f64::INFINITY);
        } else {
            self.margin(lhs - rhs);
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            cases: self.cases,
            worst_margin: self.worst,
            passed: self.cases > 0 && self.worst >= -self.tol,
        }
    }
}

fn grid(step: f64, lo: f64, hi: f64) -> Vec<f64> {
    let k = ((hi - lo) / step).round() as i64;
    (0..=k).map(|i| lo + i as f64 * step).collect()
}

fn d(x: f64, y: f64) -> f64 {
    bernoulli_kl(x, y).expect("grid points lie in [0, 1]")
}

/// Run every KL property sweep.
pub fn kl_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = RngStream::new(seed, 0);
    let unit = grid(0.01, 0.0, 1.0);
    let interior = grid(0.01, 0.01, 0.99);
    let mut checks = Vec::new();

    let mut s = Sweep::new("kl nonnegative, zero on diagonal", INEQUALITY_SLACK);
    for &x in &unit {
        for &y in &interior {
            s.margin(d(x, y));
        }
        s.margin(-d(x, x).abs());
    }
    checks.push(s.finish());

    // convexity: d(mix, y) <= lam d(x1, y) + (1 - lam) d(x2, y), both arguments
    let mut s = Sweep::new("kl convex in each argument", INEQUALITY_SLACK);
    for &x1 in &unit {
        for &x2 in &unit {
            for &y in &interior {
                let lam = 0.5;
                s.ge(
                    lam * d(x1, y) + (1.0 - lam) * d(x2, y),
                    d(lam * x1 + (1.0 - lam) * x2, y),
                );
            }
        }
    }
    for &x in &unit {
        for &y1 in &interior {
            for &y2 in &interior {
                s.ge(0.5 * d(x, y1) + 0.5 * d(x, y2), d(x, 0.5 * y1 + 0.5 * y2));
            }
        }
    }
    for _ in 0..RANDOM_DRAWS {
        let (x1, x2, lam): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let y = rng.random_range(0.001..0.999);
        s.ge(
            lam * d(x1, y) + (1.0 - lam) * d(x2, y),
            d(lam * x1 + (1.0 - lam) * x2, y),
        );
        let (y1, y2) = (
            rng.random_range(0.001..0.999),
            rng.random_range(0.001..0.999),
        );
        s.ge(
            lam * d(x1, y1) + (1.0 - lam) * d(x1, y2),
            d(x1, lam * y1 + (1.0 - lam) * y2),
        );
    }
    checks.push(s.finish());

    let mut s = Sweep::new("kl monotone on nested intervals", INEQUALITY_SLACK);
    let n = unit.len();
    for ia in 0..n {
        for ix in ia..n {
            for iy in ix..n {
                let inner = d(unit[ix], unit[iy]);
                for &b in &unit[iy..] {
                    s.ge(d(unit[ia], b), inner);
                }
            }
        }
    }
    for _ in 0..RANDOM_DRAWS {
        let mut v: [f64; 4] = [rng.random(), rng.random(), rng.random(), rng.random()];
        v.sort_by(f64::total_cmp);
        s.ge(d(v[0], v[3]), d(v[1], v[2]));
    }
    checks.push(s.finish());

    let mut s = Sweep::new("elementary log inequalities", 0.0);
    let mut xs = grid(0.01, -0.99, 10.0);
    xs.extend((0..RANDOM_DRAWS).map(|_| rng.random_range(-0.999_999..1e3)));
    for x in xs {
        s.margin(if log_inequalities_check(x) { 0.0 } else { -1.0 });
    }
    checks.push(s.finish());

    let mut s = Sweep::new("log-sum inequality", INEQUALITY_SLACK);
    let simplex3: Vec<[f64; 3]> = unit
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| {
            unit[..n - i]
                .iter()
                .map(move |&b| [a, b, (1.0 - a - b).max(0.0)])
        })
        .collect();
    for a in simplex3.iter().step_by(7) {
        for b in &simplex3 {
            let (lhs, rhs) = log_sum_sides(a, b)?;
            s.ge(lhs, rhs);
        }
    }
    for _ in 0..RANDOM_DRAWS {
        let len = rng.random_range(1..=12);
        let a: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..10.0)).collect();
        let b: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..10.0)).collect();
        let (lhs, rhs) = log_sum_sides(&a, &b)?;
        s.ge(lhs, rhs);
    }
    checks.push(s.finish());

    let mut s = Sweep::new("kl-sum lower bound", INEQUALITY_SLACK);
    for &x1 in &unit {
        for &x2 in &unit {
            let a = 0.5 * (x1 + x2);
            for &b in unit.iter().filter(|&&b| b > a) {
                let (lhs, rhs) = kl_sum_lower_bound(&[x1, x2], b)?;
                s.ge(lhs, rhs);
            }
        }
    }
    let coarse = grid(0.05, 0.0, 1.0);
    for &x1 in &coarse {
        for &x2 in &coarse {
            for &x3 in &coarse {
                let a = (x1 + x2 + x3) / 3.0;
                for &b in coarse.iter().filter(|&&b| b > a) {
                    let (lhs, rhs) = kl_sum_lower_bound(&[x1, x2, x3], b)?;
                    s.ge(lhs, rhs);
                }
            }
        }
    }
    let mut drawn = 0;
    while drawn < RANDOM_DRAWS {
        let len = rng.random_range(1..=20);
        let xs: Vec<f64> = (0..len).map(|_| rng.random()).collect();
        let a = xs.iter().sum::<f64>() / len as f64;
        let b = rng.random_range(a..=1.0);
        if b <= a {
            continue;
        }
        drawn += 1;
        let (lhs, rhs) = kl_sum_lower_bound(&xs, b)?;
        s.ge(lhs, rhs);
    }
    checks.push(s.finish());

    let mut s = Sweep::new("retention kl lower bound", INEQUALITY_SLACK);
    for (i, &a) in interior.iter().enumerate() {
        for &b in &interior[i + 1..] {
            let (lhs, rhs) = bar_kl_lower_bound(a, b)?;
            s.ge(lhs, rhs);
        }
    }
    let mut drawn = 0;
    while drawn < RANDOM_DRAWS {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        if !(0.0 < a && a < b && b < 1.0) {
            continue;
        }
        drawn += 1;
        let (lhs, rhs) = bar_kl_lower_bound(a, b)?;
        s.ge(lhs, rhs);
    }
    checks.push(s.finish());

    let domain = BaiDomain::default();
    let c = domain.calibrate()?;
    let mut s = Sweep::new("identification kl ratio >= calibrated constant", 1e-9);
    let mut drawn = 0;
    while drawn < RANDOM_DRAWS {
        let n = rng.random_range(2..=domain.max_n);
        let delta: f64 = rng.random();
        if !domain.contains(delta, n) {
            continue;
        }
        drawn += 1;
        s.ge(bai_kl_ratio(delta, n)?, c);
    }
    let mut check = s.finish();
    check.passed &= c > 0.0;
    checks.push(check);

    let mut s = Sweep::new("d(1/2, 1/2 + 2 eps) <= 12 eps^2", 0.0);
    for k in 1..=1250 {
        let eps = k as f64 * 1e-4;
        s.ge(12.0 * eps * eps, d(0.5, 0.5 + 2.0 * eps));
    }
    checks.push(s.finish());

    Ok(checks)
}

/// Mirror-step objective, with the Bregman term in the cancellation-free form
/// `sum_i (sqrt p_i - sqrt q_i)^2 / sqrt q_i`.
pub fn mirror_objective(p: &[f64], q: &[f64], est: &[f64], eta: f64) -> f64 {
    p.iter()
        .zip(q)
        .zip(est)
        .map(|((&pi, &qi), &ei)| {
            let diff = pi.sqrt() - qi.sqrt();
            pi * ei + diff * diff / (qi.sqrt() * eta)
        })
        .sum()
}

/// Brute-force minimizer of the mirror-step objective over a 2- or 3-arm
/// simplex by successively refined grids, down to resolution `final_step`.
pub fn grid_mirror_step(q: &[f64], est: &[f64], eta: f64, final_step: f64) -> Vec<f64> {
    assert!(matches!(q.len(), 2 | 3), "grid oracle handles 2 or 3 arms");
    let f = |p: &[f64]| mirror_objective(p, q, est, eta);
    let mut step: f64 = 1e-2;
    let (mut c0, mut c1) = (0.5, 0.25);
    let (mut lo0, mut hi0, mut lo1, mut hi1): (f64, f64, f64, f64) = (0.0, 1.0, 0.0, 1.0);
    loop {
        let mut best = (f64::INFINITY, c0, c1);
        let k0 = ((hi0 - lo0) / step).round() as i64;
        for i in 0..=k0 {
            let p0 = (lo0 + i as f64 * step).clamp(0.0, 1.0);
            if q.len() == 2 {
                let v = f(&[p0, 1.0 - p0]);
                if v < best.0 {
                    best = (v, p0, 0.0);
                }
                continue;
            }
            let top = hi1.min(1.0 - p0);
            let k1 = ((top - lo1) / step).floor() as i64;
            for j in 0..=k1.max(0) {
                let p1 = (lo1 + j as f64 * step).clamp(0.0, 1.0 - p0);
                let v = f(&[p0, p1, (1.0 - p0 - p1).max(0.0)]);
                if v < best.0 {
                    best = (v, p0, p1);
                }
            }
        }
        (c0, c1) = (best.1, best.2);
        if step <= final_step * (1.0 + 1e-9) {
            break;
        }
        let window = 3.0 * step;
        step /= 10.0;
        lo0 = (c0 - window).max(0.0);
        hi0 = (c0 + window).min(1.0);
        lo1 = (c1 - window).max(0.0);
        hi1 = (c1 + window).min(1.0);
    }
    if q.len() == 2 {
        vec![c0, 1.0 - c0]
    } else {
        vec![c0, c1, 1.0 - c0 - c1]
    }
}

fn random_simplex(rng: &mut RngStream, k: usize, min: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(min..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Run the mirror-descent property sweeps.
pub fn osmd_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = RngStream::new(seed, 1);
    let mut checks = Vec::new();

    let mut s = Sweep::new("mirror step matches grid oracle (2 and 3 arms)", 1e-5);
    for k in [2usize, 3] {
        for _ in 0..100 {
            let q = random_simplex(&mut rng, k, 0.05);
            let est: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let eta = rng.random_range(0.05..1.0);
            let fast = mirror_step(&SimplexDistribution::new(q.clone())?, &est, eta, 1e-12)?;
            let slow = grid_mirror_step(&q, &est, eta, 1e-7);
            let err = fast
                .weights()
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            s.margin(-err);
        }
    }
    checks.push(s.finish());

    let mut s = Sweep::new("constant estimates leave the iterate unchanged", 1e-9);
    for _ in 0..100 {
        let k = rng.random_range(2..=10);
        let q = random_simplex(&mut rng, k, 0.01);
        let c = rng.random_range(-5.0..5.0);
        let next = mirror_step(
            &SimplexDistribution::new(q.clone())?,
            &vec![c; k],
            0.3,
            1e-12,
        )?;
        let err = next
            .weights()
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        s.margin(-err);
    }
    checks.push(s.finish());

    let mut s = Sweep::new("iterates stay on the open simplex", 1e-9);
    let inst = hard_instance(10, 0.1, None)?;
    let arms: Vec<usize> = (0..10).collect();
    for variant in [
        EstimatorVariant::Unweighted,
        EstimatorVariant::CenteredImportanceWeighted,
    ] {
        let cfg = OsmdConfig::new(2000).with_variant(variant);
        let mut learner = OsmdLearner::new(&arms, &cfg)?;
        let mut stream = RngStream::new(seed, 2);
        for _ in 0..cfg.rounds {
            learner.step(&inst, &mut stream)?;
            let q = learner.distribution();
            s.margin(-(q.iter().sum::<f64>() - 1.0).abs());
            let min = q.iter().copied().fold(f64::INFINITY, f64::min);
            s.margin(if min > 0.0 { 0.0 } else { -1.0 });
        }
    }
    checks.push(s.finish());

    let mut s = Sweep::new("runs are reproducible from (seed, stream)", 0.0);
    let cfg = OsmdConfig::new(1000);
    for stream in 0..5 {
        let a = run_osmd(&arms, &inst, &cfg, &mut RngStream::new(seed, stream))?;
        let b = run_osmd(&arms, &inst, &cfg, &mut RngStream::new(seed, stream))?;
        s.margin(if a == b { 0.0 } else { -1.0 });
    }
    checks.push(s.finish());

    let mut s = Sweep::new(
        "regret mean+3SE <= sqrt(2nT) on H1 (100 trials per cell)",
        0.0,
    );
    for n in [2usize, 5, 10] {
        let inst = hard_instance(n, 0.1, None)?;
        let arms: Vec<usize> = (0..n).collect();
        for t in [1_000u64, 10_000] {
            let cfg = OsmdConfig::new(t);
            let regrets = (0..100)
                .map(|i| {
                    Ok(
                        run_osmd(&arms, &inst, &cfg, &mut RngStream::new(seed, 1000 + i))?
                            .regret(&inst),
                    )
                })
                .collect::<Result<Vec<f64>>>()?;
            let est = MeanEstimate::from_samples(&regrets);
            s.ge((2.0 * n as f64 * t as f64).sqrt(), est.upper3());
        }
    }
    checks.push(s.finish());

    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_oracle_finds_known_minimizer() {
        // zero estimate: the minimizer is q itself
        let q = [0.2, 0.3, 0.5];
        let p = grid_mirror_step(&q, &[0.0; 3], 0.5, 1e-6);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 2e-6);
        }
    }

    #[test]
    fn suites_pass() {
        for check in kl_suite(3)
            .unwrap()
            .into_iter()
            .chain(osmd_suite(3).unwrap())
        {
            assert!(check.passed, "{check}");
        }
    }
}
