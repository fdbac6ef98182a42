//! Empirical-distribution helpers on sorted samples.

use itertools::Itertools;

/// `√(p(1−p)/N)`.
pub fn binomial_std_err(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Merge per-chunk sorted runs into one sorted vector.
pub fn merge_sorted(runs: Vec<Vec<f64>>) -> Vec<f64> {
    runs.into_iter().kmerge_by(|a, b| a.total_cmp(b).is_lt()).collect()
}

pub fn sort_values(values: &mut [f64]) {
    values.sort_unstable_by(f64::total_cmp);
}

/// Number of sorted values `≤ t`.
pub fn count_le(sorted: &[f64], t: f64) -> usize {
    sorted.partition_point(|&v| v <= t)
}

/// Number of sorted values `≥ t`.
pub fn count_ge(sorted: &[f64], t: f64) -> usize {
    sorted.len() - sorted.partition_point(|&v| v < t)
}

pub fn fraction_le(sorted: &[f64], t: f64) -> f64 {
    count_le(sorted, t) as f64 / sorted.len() as f64
}

pub fn fraction_ge(sorted: &[f64], t: f64) -> f64 {
    count_ge(sorted, t) as f64 / sorted.len() as f64
}

/// The `k`-th smallest value (1-based) with `k = ⌈q·N⌉`, clamped to `[1, N]`.
pub fn order_statistic(sorted: &[f64], q: f64) -> (usize, f64) {
    let n = sorted.len();
    let k = ((q * n as f64).ceil() as usize).clamp(1, n);
    (k, sorted[k - 1])
}

/// Standard error of the `q`-quantile: the binomial error of the level
/// fraction divided by the local density, the density estimated from the
/// spacing of order statistics `√N` apart.
pub fn quantile_std_err(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n < 3 {
        return f64::NAN;
    }
    let (k, _) = order_statistic(sorted, q);
    let h = (n as f64).sqrt().ceil() as usize;
    let lo = (k - 1).saturating_sub(h);
    let hi = (k - 1 + h).min(n - 1);
    let spacing = sorted[hi] - sorted[lo];
    let mass = (hi - lo) as f64 / n as f64;
    binomial_std_err(q, n) * spacing / mass
}

/// Kolmogorov distance between two empirical laws given as sorted samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Kolmogorov distance between a sorted sample and a continuous CDF.
pub fn ks_vs_cdf(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn merge_and_counts() {
        let merged = merge_sorted(vec![vec![0.1, 0.5, 0.9], vec![], vec![0.2, 0.5]]);
        assert_eq!(merged, vec![0.1, 0.2, 0.5, 0.5, 0.9]);
        assert_eq!(count_le(&merged, 0.5), 4);
        assert_eq!(count_ge(&merged, 0.5), 3);
        assert_eq!(fraction_ge(&merged, 0.0), 1.0);
        assert_eq!(fraction_le(&merged, 0.05), 0.0);
    }

    #[test]
    fn order_statistic_convention() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(order_statistic(&v, 0.63), (7, 7.0));
        assert_eq!(order_statistic(&v, 0.0), (1, 1.0));
        assert_eq!(order_statistic(&v, 1.0), (10, 10.0));
    }

    #[test]
    fn quantile_error_of_uniform() {
        let n = 10_000;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        // density 1 → error is the binomial error
        assert_abs_diff_eq!(quantile_std_err(&v, 0.5), binomial_std_err(0.5, n), epsilon = 1e-6);
    }

    #[test]
    fn ks_distances() {
        let a = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &[10.0, 11.0]), 1.0);
        assert_abs_diff_eq!(ks_two_sample(&a, &[0.5, 1.5, 2.5, 3.5]), 0.25);
        let u: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert_abs_diff_eq!(ks_vs_cdf(&u, |x| x.clamp(0.0, 1.0)), 0.005, epsilon = 1e-12);
        assert_abs_diff_eq!(binomial_std_err(0.5, 100), 0.05);
    }
}
