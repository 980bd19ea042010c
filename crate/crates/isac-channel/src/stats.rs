//! Small statistics toolkit: summary moments, empirical CDFs, a one-sample
//! Kolmogorov-Smirnov statistic against the uniform distribution, and a
//! one-sided Wilcoxon signed-rank test for paired samples.

use statrs::distribution::{ContinuousCDF, Normal};

/// Sample mean; 0 for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than 2 values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Empirical CDF points: sorted values paired with F(x) = rank / n.
pub fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect()
}

/// One-sample KS statistic of `samples` against uniform(lo, hi).
pub fn ks_statistic_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    let width = hi - lo;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = ((x - lo) / width).clamp(0.0, 1.0);
        let upper = (i + 1) as f64 / n - f;
        let lower = f - i as f64 / n;
        d = d.max(upper).max(lower);
    }
    d
}

/// Large-sample KS critical value c(alpha) / sqrt(n) for alpha in
/// {0.10, 0.05, 0.01, 0.001}.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    let c = if alpha <= 0.001 {
        1.949
    } else if alpha <= 0.01 {
        1.628
    } else if alpha <= 0.05 {
        1.358
    } else {
        1.224
    };
    c / (n as f64).sqrt()
}

/// One-sided Wilcoxon signed-rank test on paired samples.
///
/// Tests H1: `x` tends to exceed `y`. Zero differences are dropped, tied
/// absolute differences share midranks, and the normal approximation with
/// tie correction and a 0.5 continuity correction supplies the p-value.
/// Returns 1.0 when no nonzero differences remain.
pub fn wilcoxon_signed_rank_greater(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "paired samples must have equal length");
    let mut diffs: Vec<f64> = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return 1.0;
    }
    diffs.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite diffs"));

    // Midranks over |d|, accumulating the positive-rank sum and the tie term.
    let mut w_plus = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[j + 1].abs() == diffs[i].abs() {
            j += 1;
        }
        let count = (j - i + 1) as f64;
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for d in &diffs[i..=j] {
            if *d > 0.0 {
                w_plus += midrank;
            }
        }
        tie_term += count.powi(3) - count;
        i = j + 1;
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return if w_plus > mean { 0.0 } else { 1.0 };
    }
    // Continuity correction of 0.5 toward the mean.
    let delta = w_plus - mean;
    let z = (delta - 0.5 * delta.signum()) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    1.0 - normal.cdf(z)
}
