//! Empirical statistics for comparing simulated output with reference laws.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagValue {
    pub lag: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (1/(n-1)).
    pub variance: f64,
    pub zero_fraction: f64,
    /// Biased (1/n) autocovariance at multiples of the grid spacing.
    pub autocov: Vec<LagValue>,
    #[serde(skip)]
    pub ecdf: Vec<f64>,
}

impl EmpiricalSummary {
    pub fn autocov_at(&self, lag: f64) -> Option<f64> {
        self.autocov
            .iter()
            .find(|lv| (lv.lag - lag).abs() <= 1e-9 * lag.abs().max(1.0))
            .map(|lv| lv.value)
    }
}

pub fn summarize(samples: &[f64], dt: f64, max_lag: f64) -> Result<EmpiricalSummary> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(dt > 0.0) {
        return Err(domain("dt", dt, "must be positive"));
    }
    let n = samples.len();
    let max_index = (max_lag / dt + 1e-9).floor();
    if max_lag < 0.0 || max_index > (n - 1) as f64 {
        return Err(domain("max_lag", max_lag, "must lie in [0, (len - 1) dt]"));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = samples.iter().map(|x| x - mean).collect();
    let autocov: Vec<LagValue> = (0..=max_index as usize)
        .map(|k| LagValue {
            lag: k as f64 * dt,
            value: autocovariance(&centered, k),
        })
        .collect();
    let variance = if n > 1 {
        centered.iter().map(|c| c * c).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let zero_fraction = samples.iter().filter(|&&x| x == 0.0).count() as f64 / n as f64;
    let mut ecdf = samples.to_vec();
    ecdf.sort_by(f64::total_cmp);
    Ok(EmpiricalSummary {
        n,
        mean,
        variance,
        zero_fraction,
        autocov,
        ecdf,
    })
}

/// Biased autocovariance of an already-centered series at lag `k`.
pub fn autocovariance(centered: &[f64], k: usize) -> f64 {
    let n = centered.len();
    if k >= n {
        return 0.0;
    }
    centered[..n - k]
        .iter()
        .zip(&centered[k..])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / n as f64
}

/// Bartlett standard error of a biased autocovariance estimate at a lag
/// beyond the correlation support, `sqrt(sum_j c(j)^2 / n)` summed over
/// `|j| <= support`.
pub fn autocov_standard_error(centered: &[f64], support: usize) -> f64 {
    let n = centered.len() as f64;
    let c0 = autocovariance(centered, 0);
    let tail: f64 = (1..=support)
        .map(|j| autocovariance(centered, j).powi(2))
        .sum();
    ((c0 * c0 + 2.0 * tail) / n).sqrt()
}

/// Kolmogorov-Smirnov distance `sup |F_n - F|` for a continuous `F`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    ks_distance_with_atoms(samples, &cdf, &cdf)
}

/// Kolmogorov-Smirnov distance when `F` may jump: `cdf_left(x)` is the left
/// limit `F(x-)`. Both one-sided gaps are taken at every distinct sample.
pub fn ks_distance_with_atoms(
    samples: &[f64],
    cdf: impl Fn(f64) -> f64,
    cdf_left: impl Fn(f64) -> f64,
) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0_f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((at - cdf(x)).abs()).max((cdf_left(x) - below).abs());
        i = j;
    }
    d.min(1.0)
}

/// Two-sided Kolmogorov critical value for large `n` at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Total variation `(1/2) sum |emp - pmf|`; mass the reference puts outside
/// the observed support is counted through `1 - sum pmf(observed)`.
pub fn total_variation(empirical: &BTreeMap<u64, f64>, pmf: impl Fn(u64) -> f64) -> f64 {
    let mut abs_sum = 0.0;
    let mut ref_mass = 0.0;
    for (&n, &freq) in empirical {
        let p = pmf(n);
        ref_mass += p;
        abs_sum += (freq - p).abs();
    }
    let unseen = (1.0 - ref_mass).max(0.0);
    (0.5 * (abs_sum + unseen)).clamp(0.0, 1.0)
}

/// Expected total variation between an exact sample of size `n` and its own
/// law: the floor below which no sampler can go. Each cell contributes the
/// mean absolute deviation of its count, Poisson for small expected counts
/// and normal (with the binomial variance) for large ones.
pub fn tv_noise_floor(pmf: &[f64], n: usize) -> f64 {
    let n = n as f64;
    let mad: f64 = pmf
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let mu = n * p;
            if mu >= 30.0 {
                (2.0 * mu * (1.0 - p) / std::f64::consts::PI).sqrt()
            } else {
                let m = mu.floor();
                (std::f64::consts::LN_2 + (m + 1.0) * mu.ln()
                    - mu
                    - crate::special::ln_factorial(m as u64))
                .exp()
            }
        })
        .sum();
    0.5 * mad / n
}

/// Normalized frequencies of integer observations.
pub fn empirical_pmf(values: impl IntoIterator<Item = u64>) -> BTreeMap<u64, f64> {
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    for v in values {
        *counts.entry(v).or_insert(0u64) += 1;
        total += 1;
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub density: f64,
}

/// Density histogram over `[lo, hi)` with `bins` equal bins; samples outside
/// are counted in the normalization but not binned.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<HistogramBin> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if x >= lo && x < hi {
            let i = (((x - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
    }
    let n = samples.len().max(1) as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| HistogramBin {
            bin_left: lo + i as f64 * width,
            bin_right: lo + (i + 1) as f64 * width,
            density: c as f64 / (n * width),
        })
        .collect()
}

pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    use crate::export::fmt_f64;
    let mut out = String::from("bin_left,bin_right,density\n");
    for b in bins {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(b.bin_left),
            fmt_f64(b.bin_right),
            fmt_f64(b.density)
        ));
    }
    out
}

/// Excess kurtosis `m4 / m2^2 - 3`.
pub fn excess_kurtosis(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(a, b), x| {
        let d = (x - mean) * (x - mean);
        (a + d, b + d * d)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    m4 / (m2 * m2) - 3.0
}
