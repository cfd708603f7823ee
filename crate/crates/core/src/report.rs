//! Shared reporting types: interval estimates and confidence arithmetic.

use serde::{Deserialize, Serialize};

/// A point estimate with a confidence interval and the sample size behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: u64,
}

/// Wilson score interval for a binomial proportion at `z` standard scores
/// (z = 1.96 for 95%). Well-behaved at 0 and n successes, unlike the normal
/// approximation.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Binomial proportion estimate with a Wilson 95% interval.
pub fn binomial_report(successes: u64, n: u64) -> EstimateReport {
    let (lo, hi) = wilson_interval(successes, n, 1.96);
    EstimateReport {
        estimate: if n == 0 {
            0.0
        } else {
            successes as f64 / n as f64
        },
        ci_lo: lo,
        ci_hi: hi,
        n,
    }
}

/// Mean-and-standard-error report over real-valued samples.
pub fn mean_report(samples: &[f64]) -> EstimateReport {
    let n = samples.len();
    if n == 0 {
        return EstimateReport {
            estimate: 0.0,
            ci_lo: 0.0,
            ci_hi: 0.0,
            n: 0,
        };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    let se = (var / n as f64).sqrt();
    EstimateReport {
        estimate: mean,
        ci_lo: mean - 1.96 * se,
        ci_hi: mean + 1.96 * se,
        n: n as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_proportion() {
        let (lo, hi) = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!(hi - lo < 0.2);
    }

    #[test]
    fn wilson_edge_cases() {
        let (lo, hi) = wilson_interval(0, 50, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.15);
        let (lo, hi) = wilson_interval(50, 50, 1.96);
        assert_eq!(hi, 1.0);
        assert!(lo > 0.85);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
    }

    #[test]
    fn mean_report_known_values() {
        let r = mean_report(&[1.0, 2.0, 3.0, 4.0]);
        assert!((r.estimate - 2.5).abs() < 1e-12);
        assert!(r.ci_lo < 2.5 && 2.5 < r.ci_hi);
    }
}
