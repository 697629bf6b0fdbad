use bestarm::explore::{median_elimination, select_by_counts};
use bestarm::harness::{wilson_interval, Z_95};
use bestarm::{hard_instance, RngStream};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Score-test inversion by bisection: the interval is the set of `p` with
/// `(phat - p)^2 <= z^2 p (1 - p) / n`.
fn score_inversion(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let outside = |p: f64| (phat - p).powi(2) > z * z * p * (1.0 - p) / n;
    let bisect = |mut inside: f64, mut out: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + out);
            if outside(mid) {
                out = mid;
            } else {
                inside = mid;
            }
        }
        0.5 * (inside + out)
    };
    let lower = if successes == 0 {
        0.0
    } else {
        bisect(phat, 0.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        bisect(phat, 1.0)
    };
    (lower, upper)
}

#[test]
fn wilson_matches_score_inversion() {
    let z = Normal::standard().inverse_cdf(0.975);
    assert!((z - Z_95).abs() < 1e-12);
    let mut rng = RngStream::new(11, 0);
    let mut pairs = vec![(0u64, 1u64), (1, 1), (0, 2000), (2000, 2000), (7, 2000)];
    while pairs.len() < 50 {
        let trials = rng.random_range(1..=5000u64);
        pairs.push((rng.random_range(0..=trials), trials));
    }
    for (s, t) in pairs {
        let w = wilson_interval(s, t, Z_95);
        let (lo, hi) = score_inversion(s, t, z);
        assert!(
            (w.lower - lo).abs() < 1e-9,
            "{s}/{t}: lower {} vs {lo}",
            w.lower
        );
        assert!(
            (w.upper - hi).abs() < 1e-9,
            "{s}/{t}: upper {} vs {hi}",
            w.upper
        );
    }
}

#[test]
fn selection_passes_chi_square() {
    let counts = [120u64, 0, 430, 250, 200];
    let total: u64 = counts.iter().sum();
    let draws = 100_000u64;
    let mut rng = RngStream::new(3, 9);
    let mut hist = [0u64; 5];
    for _ in 0..draws {
        hist[select_by_counts(&counts, &mut rng)] += 1;
    }
    assert_eq!(hist[1], 0);
    let mut stat = 0.0;
    let mut cells = 0;
    for (&c, &h) in counts.iter().zip(&hist) {
        if c == 0 {
            continue;
        }
        let expected = draws as f64 * c as f64 / total as f64;
        stat += (h as f64 - expected).powi(2) / expected;
        cells += 1;
    }
    let p_value = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p_value > 1e-3, "chi-square {stat}, p = {p_value}");
}

#[test]
fn median_elimination_failure_rate_within_delta() {
    let inst = hard_instance(8, 0.1, None).unwrap();
    let arms: Vec<usize> = (0..8).collect();
    let trials = 2000u64;
    let mut failures = 0u64;
    for t in 0..trials {
        let out = median_elimination(&arms, 0.1, 0.1, &inst, &mut RngStream::new(17, t)).unwrap();
        if inst.gap(out.arm) >= 0.1 - 1e-12 {
            failures += 1;
        }
    }
    let w = wilson_interval(failures, trials, Z_95);
    assert!(
        w.upper <= 0.1,
        "failures {failures}/{trials}, Wilson upper {}",
        w.upper
    );
}
