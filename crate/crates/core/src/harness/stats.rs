//! Summary statistics used by the acceptance gates.

use serde::Serialize;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                count,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let std_error = if count > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            count,
        }
    }

    /// `mean + 3 SE`.
    pub fn upper3(&self) -> f64 {
        self.mean + 3.0 * self.std_error
    }

    pub fn lower3(&self) -> f64 {
        self.mean - 3.0 * self.std_error
    }
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilsonInterval {
    pub successes: u64,
    pub trials: u64,
    pub lower: f64,
    pub upper: f64,
}

impl WilsonInterval {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> WilsonInterval {
    assert!(
        trials > 0 && successes <= trials,
        "need 0 <= successes <= trials, trials > 0"
    );
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    WilsonInterval {
        successes,
        trials,
        lower: if successes == 0 {
            0.0
        } else {
            (centre - half).max(0.0)
        },
        upper: if successes == trials {
            1.0
        } else {
            (centre + half).min(1.0)
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let est = MeanEstimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(est.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((est.std_error - sd / 2.0).abs() < 1e-15);
        assert_eq!(MeanEstimate::from_samples(&[7.0]).std_error, 0.0);
    }

    #[test]
    fn wilson_edges() {
        let w = wilson_interval(0, 10, Z_95);
        assert_eq!(w.lower, 0.0);
        assert!(w.upper > 0.0 && w.upper < 0.35);
        let w = wilson_interval(10, 10, Z_95);
        assert_eq!(w.upper, 1.0);
    }
}
