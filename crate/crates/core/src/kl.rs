//! Bernoulli KL divergence and executable forms of the inequalities built on it.
//!
//! All logarithms are natural. Divergences are extended reals: `+inf` is
//! returned when `y` sits on a boundary the first argument does not share.

use crate::error::{ensure_input, Result};

/// Slack used by every inequality check in double precision.
pub const INEQUALITY_SLACK: f64 = 1e-12;

/// An ordered pair of Bernoulli means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlPair {
    x: f64,
    y: f64,
}

impl KlPair {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        Ok(Self { x, y })
    }

    pub fn divergence(&self) -> f64 {
        kl_unchecked(self.x, self.y)
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    ensure_input!((0.0..=1.0).contains(&v), "{name} = {v} is outside [0, 1]");
    Ok(())
}

/// `x log(x/y) + (1-x) log((1-x)/(1-y))` with `0 log 0 = 0`.
pub fn bernoulli_kl(x: f64, y: f64) -> Result<f64> {
    Ok(KlPair::new(x, y)?.divergence())
}

#[inline]
pub(crate) fn kl_unchecked(x: f64, y: f64) -> f64 {
    xlogxy(x, y) + xlogxy(1.0 - x, 1.0 - y)
}

/// `a log(a/b)` with the conventions `0 log(0/b) = 0` and `a log(a/0) = +inf`.
#[inline]
fn xlogxy(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a * (a / b).ln()
    }
}

/// Both sides of the KL-sum inequality
/// `sum_{i: x_i < b} d(x_i, b) >= n d(a, b)` where `a` is the mean of `xs`.
pub fn kl_sum_lower_bound(xs: &[f64], b: f64) -> Result<(f64, f64)> {
    ensure_input!(!xs.is_empty(), "xs must be nonempty");
    check_unit("b", b)?;
    for &x in xs {
        check_unit("x_i", x)?;
    }
    let n = xs.len() as f64;
    let a = xs.iter().sum::<f64>() / n;
    ensure_input!(a < b, "average {a} must be strictly below b = {b}");
    let lhs = xs
        .iter()
        .filter(|&&x| x < b)
        .map(|&x| kl_unchecked(x, b))
        .sum();
    let rhs = n * kl_unchecked(a, b);
    Ok((lhs, rhs))
}

/// Both sides of `d(b, a) >= (1 - 1/(1 + r/(2+r))) b log(b/a)`, `r = (b-a)/a`,
/// valid for `0 < a < b < 1`.
pub fn bar_kl_lower_bound(a: f64, b: f64) -> Result<(f64, f64)> {
    ensure_input!(
        0.0 < a && a < b && b < 1.0,
        "requires 0 < a < b < 1, got a = {a}, b = {b}"
    );
    let r = (b - a) / a;
    let factor = 1.0 - 1.0 / (1.0 + r / (2.0 + r));
    Ok((kl_unchecked(b, a), factor * b * (b / a).ln()))
}

fn bai_arguments(delta: f64, n: u64) -> Result<(f64, f64, f64)> {
    ensure_input!(
        0.0 < delta && delta < 1.0,
        "delta = {delta} must lie in (0, 1)"
    );
    ensure_input!(n >= 1, "n must be positive");
    let nf = n as f64;
    let p = 1.0 - delta;
    ensure_input!(
        p * nf >= 1.0 - 1e-12,
        "requires 1 - delta >= 1/n, got 1 - delta = {p}, n = {n}"
    );
    let x = p / 2.0 + 1.0 / (2.0 * nf);
    let gap = (p / 2.0 - 1.0 / (2.0 * nf)).max(0.0);
    Ok((x.min(p), p, gap))
}

/// `d((1-delta)/2 + 1/(2n), 1-delta)`, the divergence bounded below in the
/// identification lower bound.
pub fn bai_kl_value(delta: f64, n: u64) -> Result<f64> {
    let (x, y, _) = bai_arguments(delta, n)?;
    Ok(kl_unchecked(x, y))
}

/// `bai_kl_value / ((1-delta)/2 - 1/(2n))`; zero at the degenerate boundary.
pub fn bai_kl_ratio(delta: f64, n: u64) -> Result<f64> {
    let (x, y, gap) = bai_arguments(delta, n)?;
    if gap == 0.0 {
        return Ok(0.0);
    }
    Ok(kl_unchecked(x, y) / gap)
}

/// Domain of the identification-KL scan: `1 - delta >= (1 + kappa)/n`.
#[derive(Debug, Clone, Copy)]
pub struct BaiDomain {
    pub kappa: f64,
    pub max_n: u64,
}

impl Default for BaiDomain {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            max_n: 10_000,
        }
    }
}

impl BaiDomain {
    pub fn contains(&self, delta: f64, n: u64) -> bool {
        n >= 2
            && n <= self.max_n
            && delta > 0.0
            && delta < 1.0
            && (1.0 - delta) * n as f64 >= 1.0 + self.kappa
    }

    /// Minimum of [`bai_kl_ratio`] over a grid of the domain: every `n` up to
    /// `max_n`, with `1 - delta` on a geometric ladder from `(1 + kappa)/n` to 0.999.
    pub fn calibrate(&self) -> Result<f64> {
        let mut min = f64::INFINITY;
        for n in 2..=self.max_n {
            let lo = (1.0 + self.kappa) / n as f64;
            if lo >= 0.999 {
                continue;
            }
            let steps = 24;
            for s in 0..=steps {
                let p = lo * (0.999 / lo).powf(s as f64 / steps as f64);
                let delta = 1.0 - p;
                if !self.contains(delta, n) {
                    continue;
                }
                min = min.min(bai_kl_ratio(delta, n)?);
            }
        }
        Ok(min)
    }
}

/// True when all applicable branches of the elementary log inequalities hold
/// at `x` within [`INEQUALITY_SLACK`]. Values of `x <= -1` have no branch and
/// return true vacuously.
pub fn log_inequalities_check(x: f64) -> bool {
    if !(x > -1.0) || !x.is_finite() {
        return true;
    }
    let lhs = x.ln_1p();
    let mut ok = lhs >= x / (1.0 + x) - INEQUALITY_SLACK;
    if x > 0.0 {
        ok &= lhs >= 2.0 * x / (2.0 + x) - INEQUALITY_SLACK;
    }
    if x <= 0.0 {
        ok &= lhs >= x / (1.0 + x) * (2.0 + x) / 2.0 - INEQUALITY_SLACK;
    }
    ok
}

/// Both sides of the log-sum inequality `sum a_i log(a_i/b_i) >= A log(A/B)`.
pub fn log_sum_sides(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    ensure_input!(a.len() == b.len(), "vectors differ in length");
    ensure_input!(
        a.iter().chain(b).all(|v| *v >= 0.0 && v.is_finite()),
        "entries must be finite and nonnegative"
    );
    let lhs = a.iter().zip(b).map(|(&ai, &bi)| xlogxy(ai, bi)).sum();
    let rhs = xlogxy(a.iter().sum(), b.iter().sum());
    Ok((lhs, rhs))
}
