//! Small statistics toolkit for the Monte Carlo checks.

use std::collections::BTreeMap;
use std::hash::Hash;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Standard error of the mean.
pub fn std_err(xs: &[f64]) -> f64 {
    let (_, v) = mean_var(xs);
    (v / xs.len() as f64).sqrt()
}

/// Counts of each distinct value.
pub fn histogram<K: Ord + Clone>(xs: &[K]) -> BTreeMap<K, usize> {
    let mut h = BTreeMap::new();
    for x in xs {
        *h.entry(x.clone()).or_insert(0) += 1;
    }
    h
}

/// Total-variation distance between two empirical samples.
pub fn tv_samples<K: Ord + Clone>(a: &[K], b: &[K]) -> f64 {
    tv_counts(&histogram(a), &histogram(b))
}

/// Total-variation distance between two count histograms.
pub fn tv_counts<K: Ord>(ha: &BTreeMap<K, usize>, hb: &BTreeMap<K, usize>) -> f64 {
    let na = ha.values().sum::<usize>() as f64;
    let nb = hb.values().sum::<usize>() as f64;
    let mut keys: Vec<&K> = ha.keys().collect();
    keys.extend(hb.keys());
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let pa = *ha.get(k).unwrap_or(&0) as f64 / na;
            let pb = *hb.get(k).unwrap_or(&0) as f64 / nb;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

/// Total-variation distance between two probability vectors.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Empirical frequencies of indices `0..k`.
pub fn frequencies(xs: &[usize], k: usize) -> Vec<f64> {
    let mut c = vec![0.0; k];
    for &x in xs {
        c[x] += 1.0;
    }
    let n = xs.len() as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Pearson chi-square goodness-of-fit p-value for observed counts against
/// expected probabilities.
pub fn chi_square_p(counts: &[usize], probs: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    let mut stat = 0.0;
    let mut dof = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        let e = p * n as f64;
        stat += (c as f64 - e).powi(2) / e;
        dof += 1;
    }
    if dof < 2 {
        return 1.0;
    }
    let d = ChiSquared::new((dof - 1) as f64).expect("dof > 0");
    1.0 - d.cdf(stat)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| p.partial_cmp(q).unwrap());
    y.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Least-squares line fit; returns (slope, intercept, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Distinct-key counting for hashable keys.
pub fn count_hash<K: Hash + Eq + Clone>(xs: &[K]) -> std::collections::HashMap<K, usize> {
    let mut h = std::collections::HashMap::new();
    for x in xs {
        *h.entry(x.clone()).or_insert(0) += 1;
    }
    h
}
