//! Special functions needed by the reference laws.

pub use statrs::function::gamma::ln_gamma;

/// Regularized lower incomplete gamma `P(a, x)`, extended to `x = 0` and `x = inf`.
pub fn gamma_lr(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        statrs::function::gamma::gamma_lr(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`, extended like [`gamma_lr`].
pub fn gamma_ur(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x == f64::INFINITY {
        0.0
    } else {
        statrs::function::gamma::gamma_ur(a, x)
    }
}

/// Exponentially scaled modified Bessel function of the first kind, order one:
/// `exp(-|x|) * I1(x)`.
///
/// The ascending series has only positive terms, so it stays accurate well
/// past the usual switch point; it is used below `SERIES_LIMIT` and the
/// Hankel asymptotic expansion above it.
pub fn bessel_i1e(x: f64) -> f64 {
    if x < 0.0 {
        return -bessel_i1e(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < SERIES_LIMIT {
        i1_series(x) * (-x).exp()
    } else {
        i1e_asymptotic(x)
    }
}

/// Natural log of `I1(x)` for `x > 0`, finite for arguments where `I1` itself overflows.
pub fn ln_bessel_i1(x: f64) -> f64 {
    bessel_i1e(x).ln() + x
}

const SERIES_LIMIT: f64 = 25.0;

fn i1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = half;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        term *= q / ((m + 1.0) * (m + 2.0));
        sum += term;
        m += 1.0;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn i1e_asymptotic(x: f64) -> f64 {
    // mu = 4 nu^2 with nu = 1
    let mu = 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0_f64;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (k * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            sum += next;
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `ln(sum(exp(terms)))` without overflow.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
