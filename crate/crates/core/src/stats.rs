//! Small descriptive statistics and percentile-bootstrap helpers.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed;

/// Percentile bootstrap settings shared by every resampling routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub replicates: usize,
    /// Two-sided miss rate; 0.05 gives a 95% interval.
    pub alpha: f64,
    pub seed: u64,
}

impl Bootstrap {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Bootstrap {
            replicates,
            alpha: 0.05,
            seed,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Central `1 − alpha` percentile interval of `values`.
pub fn percentile_interval(values: &mut [f64], alpha: f64) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    (
        quantile_sorted(values, alpha / 2.0),
        quantile_sorted(values, 1.0 - alpha / 2.0),
    )
}

/// Resample indices `0..n` with replacement, returned as multiplicities.
pub fn resample_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<u32> {
    let mut w = vec![0u32; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1;
    }
    w
}

/// Runs `stat` on `bs.replicates` resamples of `n` units (in parallel) and
/// returns the percentile interval.
pub fn bootstrap_interval<F>(n: usize, bs: &Bootstrap, stat: F) -> (f64, f64)
where
    F: Fn(&[u32]) -> f64 + Sync,
{
    let mut values: Vec<f64> = (0..bs.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::child_rng(bs.seed, i);
            stat(&resample_weights(n, &mut rng))
        })
        .collect();
    values.retain(|v| v.is_finite());
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    percentile_interval(&mut values, bs.alpha)
}

/// Bootstrap interval for the mean of `xs`.
pub fn bootstrap_mean(xs: &[f64], bs: &Bootstrap) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    bootstrap_interval(xs.len(), bs, |w| {
        let total: u32 = w.iter().sum();
        xs.iter().zip(w).map(|(x, &k)| x * f64::from(k)).sum::<f64>() / f64::from(total)
    })
}

/// Entropy in bits of a count vector.
pub fn entropy_bits<I>(counts: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let counts: Vec<f64> = counts.into_iter().filter(|&c| c > 0.0).collect();
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -counts
        .iter()
        .map(|&c| {
            let p = c / total;
            p * p.log2()
        })
        .sum::<f64>()
}
