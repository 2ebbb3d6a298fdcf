//! Small statistical helpers shared by Monte Carlo verification routines:
//! binomial standard errors and chi-square goodness-of-fit tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Standard error of a binomial frequency estimate.
pub fn binomial_stderr(p_hat: f64, trials: usize) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
}

/// Sample mean and standard deviation (unbiased variance).
pub fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, var.sqrt())
}

/// Poisson probability mass function.
pub fn poisson_pmf(k: usize, mean: f64) -> f64 {
    let mut log_p = -mean + (k as f64) * mean.ln();
    for i in 1..=k {
        log_p -= (i as f64).ln();
    }
    log_p.exp()
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub degrees_of_freedom: usize,
    pub pass: bool,
}

/// Pearson chi-square test of observed counts against expected counts.
///
/// Adjacent bins are pooled until every expected count is at least 5.
/// `significance` is the rejection probability under the null (e.g. 1e-3).
pub fn chi_square_test(observed: &[f64], expected: &[f64], significance: f64) -> ChiSquareOutcome {
    assert_eq!(observed.len(), expected.len());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 {
        // Merge the underfilled trailing bin into the last complete one.
        if let Some(last) = pooled.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            pooled.push(acc);
        }
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = pooled.len().saturating_sub(1).max(1);
    let critical = ChiSquared::new(df as f64)
        .expect("valid chi-square dof")
        .inverse_cdf(1.0 - significance);
    ChiSquareOutcome {
        statistic,
        critical,
        degrees_of_freedom: df,
        pass: statistic <= critical,
    }
}

/// Chi-square test of observed event counts against a Poisson law.
///
/// `counts[k]` is the number of runs that produced exactly `k` events; the
/// final entry absorbs the upper tail.
pub fn poisson_chi_square(counts: &[u64], mean: f64, significance: f64) -> ChiSquareOutcome {
    let runs: u64 = counts.iter().sum();
    let kmax = counts.len() - 1;
    let mut expected: Vec<f64> = (0..kmax)
        .map(|k| runs as f64 * poisson_pmf(k, mean))
        .collect();
    let head: f64 = expected.iter().sum();
    expected.push((runs as f64 - head).max(0.0));
    let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    chi_square_test(&observed, &expected, significance)
}
