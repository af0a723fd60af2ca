//! Reference laws of the texture and of the window counts, plus the
//! second-order statistics they imply.

use serde::Serialize;

use crate::bernstein::{limit_transform, BernsteinModel, Builtin, LimitTransform};
use crate::error::{domain, Error, Result};
use crate::export::{csv_from_rows, fmt_f64};
use crate::numeric::{integrate, nth_derivative};
use crate::special::{bessel_i1e, gamma_lr, gamma_ur, ln_factorial, ln_gamma, log_sum_exp};

/// Quadrature tolerance for CDFs and normalization checks.
const QUAD_TOL: f64 = 1e-12;
/// Tail mass left beyond the upper quadrature limit.
const TAIL_MASS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TextureKind {
    /// Limit of the finite builtin: an atom `e^-nu` at zero plus a Bessel density.
    KTextureFinite { nu: f64 },
    /// Limit of the infinite builtin: gamma with shape `nu` and mean 1.
    GammaTexture { nu: f64 },
    /// Point mass at 1, the Gaussian limit.
    DegenerateUnit,
}

/// Marginal law of a unit-mean texture: an atom at zero plus a density on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TextureLaw {
    kind: TextureKind,
}

pub fn k_texture_law(nu: f64) -> Result<TextureLaw> {
    check_nu(nu)?;
    Ok(TextureLaw {
        kind: TextureKind::KTextureFinite { nu },
    })
}

pub fn gamma_texture_law(nu: f64) -> Result<TextureLaw> {
    check_nu(nu)?;
    Ok(TextureLaw {
        kind: TextureKind::GammaTexture { nu },
    })
}

pub fn degenerate_unit_law() -> TextureLaw {
    TextureLaw {
        kind: TextureKind::DegenerateUnit,
    }
}

/// The closed-form marginal for a builtin model, `None` for other models.
pub fn texture_law_for(model: &BernsteinModel, nu: f64) -> Result<Option<TextureLaw>> {
    match model.builtin() {
        Some(Builtin::Rational) => k_texture_law(nu).map(Some),
        Some(Builtin::Logarithmic) => gamma_texture_law(nu).map(Some),
        None => Ok(None),
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(domain("nu", nu, "must be positive and finite"))
    }
}

impl TextureLaw {
    pub fn kind(&self) -> TextureKind {
        self.kind
    }

    pub fn atom_at_zero(&self) -> f64 {
        match self.kind {
            TextureKind::KTextureFinite { nu } => (-nu).exp(),
            TextureKind::GammaTexture { .. } | TextureKind::DegenerateUnit => 0.0,
        }
    }

    /// Density of the continuous part at `tau >= 0`; at zero it returns the
    /// right limit (possibly infinite).
    pub fn density(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        match self.kind {
            TextureKind::KTextureFinite { nu } => {
                if tau == 0.0 {
                    return nu * nu * (-nu).exp();
                }
                // nu e^-nu e^-nu tau tau^-1/2 I1(2 nu sqrt tau), with the
                // exponent folded into -nu (1 - sqrt tau)^2.
                let r = tau.sqrt();
                let d = 1.0 - r;
                nu * bessel_i1e(2.0 * nu * r) * (-nu * d * d).exp() / r
            }
            TextureKind::GammaTexture { nu } => {
                if tau == 0.0 {
                    return match nu.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => 1.0,
                        _ => 0.0,
                    };
                }
                (nu * nu.ln() - ln_gamma(nu) + (nu - 1.0) * tau.ln() - nu * tau).exp()
            }
            TextureKind::DegenerateUnit => 0.0,
        }
    }

    /// `P(tau <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self.kind {
            TextureKind::KTextureFinite { nu } => {
                let upper = self.upper_limit();
                if x >= upper {
                    return 1.0;
                }
                (self.atom_at_zero() + integrate(&|u| k_integrand(nu, u), 0.0, x.sqrt(), QUAD_TOL))
                    .min(1.0)
            }
            TextureKind::GammaTexture { nu } => gamma_lr(nu, nu * x),
            TextureKind::DegenerateUnit => {
                if x >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(tau < x)`, which differs from the CDF at atoms.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self.kind {
            TextureKind::KTextureFinite { .. } if x <= 0.0 => 0.0,
            TextureKind::DegenerateUnit if x <= 1.0 => 0.0,
            _ => self.cdf(x),
        }
    }

    /// CDF at many points in one pass. `xs` need not be sorted.
    pub fn cdf_many(&self, xs: &[f64]) -> Vec<f64> {
        let TextureKind::KTextureFinite { nu } = self.kind else {
            return xs.iter().map(|&x| self.cdf(x)).collect();
        };
        // Accumulate the integral between consecutive sorted points.
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let upper = self.upper_limit();
        let mut out = vec![0.0; xs.len()];
        let mut u_prev = 0.0;
        let mut acc = self.atom_at_zero();
        for i in order {
            let x = xs[i];
            if x < 0.0 {
                continue;
            }
            if x >= upper {
                out[i] = 1.0;
                continue;
            }
            let u = x.sqrt();
            acc += integrate(&|v| k_integrand(nu, v), u_prev, u, QUAD_TOL);
            u_prev = u;
            out[i] = acc.min(1.0);
        }
        out
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn variance(&self) -> f64 {
        match self.kind {
            TextureKind::KTextureFinite { nu } => 2.0 / nu,
            TextureKind::GammaTexture { nu } => 1.0 / nu,
            TextureKind::DegenerateUnit => 0.0,
        }
    }

    /// A point beyond which the remaining mass is below `1e-10`.
    pub fn upper_limit(&self) -> f64 {
        match self.kind {
            // The integrand decays like exp(-nu (sqrt(tau) - 1)^2); six
            // "standard deviations" of sqrt(tau) leave under e^-36.
            TextureKind::KTextureFinite { nu } => {
                let r = 1.0 + 6.0 / nu.sqrt();
                r * r
            }
            TextureKind::GammaTexture { nu } => {
                let mut x = 2.0;
                while gamma_ur(nu, nu * x) > TAIL_MASS {
                    x *= 1.5;
                }
                x
            }
            TextureKind::DegenerateUnit => 1.0,
        }
    }

    /// `E[tau^k]` of the continuous part plus the atom, by quadrature over
    /// `sqrt(tau)`; the atom only contributes to `k = 0`.
    pub fn moment_by_quadrature(&self, k: u32) -> f64 {
        let atom = if k == 0 { self.atom_at_zero() } else { 0.0 };
        let hi = self.upper_limit().sqrt();
        let body = match self.kind {
            TextureKind::KTextureFinite { nu } => integrate(
                &|u| u.powi(2 * k as i32) * k_integrand(nu, u),
                0.0,
                hi,
                QUAD_TOL,
            ),
            TextureKind::GammaTexture { .. } => integrate(
                &|u| {
                    let tau = u * u;
                    2.0 * u * tau.powi(k as i32) * self.density(tau)
                },
                0.0,
                hi,
                QUAD_TOL,
            ),
            TextureKind::DegenerateUnit => return 1.0,
        };
        atom + body
    }

    /// `x,pdf,cdf` on `points + 1` equispaced nodes over `[0, x_max]`.
    pub fn table_csv(&self, x_max: f64, points: usize) -> String {
        let xs: Vec<f64> = (0..=points)
            .map(|i| x_max * i as f64 / points as f64)
            .collect();
        let cdf = self.cdf_many(&xs);
        csv_from_rows(
            &["x", "pdf", "cdf"],
            xs.iter().zip(cdf).map(|(&x, c)| [x, self.density(x), c]),
        )
    }
}

/// K-texture density mapped to `u = sqrt(tau)`: `2 nu e^-nu e^-nu u^2 I1(2 nu u)`.
fn k_integrand(nu: f64, u: f64) -> f64 {
    let d = 1.0 - u;
    2.0 * nu * bessel_i1e(2.0 * nu * u) * (-nu * d * d).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CountLaw {
    /// Poisson number of geometric clusters; `p` is the geometric success
    /// probability, `1 / (kappa + 1)` for the finite builtin.
    PolyaAeppli { nu: f64, p: f64 },
    /// Shape `nu`, mean `nbar`.
    NegativeBinomial { nu: f64, nbar: f64 },
}

/// Count mass target when tabulating.
pub const COUNT_MASS_TARGET: f64 = 1.0 - 1e-12;

/// Past the mean, a PMF term below this ends tabulation.
const NEGLIGIBLE_TERM: f64 = 1e-20;

impl CountLaw {
    pub fn polya_aeppli(nu: f64, p: f64) -> Result<Self> {
        check_nu(nu)?;
        if !(p > 0.0 && p < 1.0) {
            return Err(domain("p", p, "must lie in (0, 1)"));
        }
        Ok(Self::PolyaAeppli { nu, p })
    }

    pub fn negative_binomial(nu: f64, nbar: f64) -> Result<Self> {
        check_nu(nu)?;
        if !(nbar > 0.0 && nbar.is_finite()) {
            return Err(domain("nbar", nbar, "must be positive and finite"));
        }
        Ok(Self::NegativeBinomial { nu, nbar })
    }

    /// The window-count law of a builtin model at `(nu, kappa)`.
    pub fn for_model(model: &BernsteinModel, nu: f64, kappa: f64) -> Result<Self> {
        match model.builtin() {
            Some(Builtin::Rational) => Self::polya_aeppli(nu, 1.0 / (kappa + 1.0)),
            Some(Builtin::Logarithmic) => Self::negative_binomial(nu, nu * kappa),
            None => Err(Error::Unsupported(format!(
                "no closed-form count law for model '{}'",
                model.name()
            ))),
        }
    }

    pub fn pmf(&self, n: u64) -> f64 {
        match *self {
            Self::PolyaAeppli { nu, p } => polya_aeppli_pmf(nu, p, n),
            Self::NegativeBinomial { nu, nbar } => negbin_pmf(nu, nbar, n),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::PolyaAeppli { nu, p } => nu * (1.0 - p) / p,
            Self::NegativeBinomial { nbar, .. } => nbar,
        }
    }

    /// PMF values from 0 until the cumulative mass reaches [`COUNT_MASS_TARGET`].
    pub fn table(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut total = 0.0;
        let mut n = 0;
        // The mass target alone could stop early on a flat start, so also
        // require passing the mean. Rounding can leave the running total just
        // short of the target, so past the mean a negligible term also ends it.
        let mut terms = self.terms();
        loop {
            let p = terms.next().unwrap_or(0.0);
            total += p;
            out.push(p);
            n += 1;
            let past_mean = (n as f64) >= self.mean();
            if past_mean && (total >= COUNT_MASS_TARGET || p < NEGLIGIBLE_TERM) {
                break;
            }
        }
        out
    }

    /// The PMF as a sequence from `n = 0`, in O(1) per term.
    fn terms(&self) -> Box<dyn Iterator<Item = f64>> {
        match *self {
            Self::PolyaAeppli { nu, p } => Box::new(PolyaAeppliTerms::new(nu, p)),
            Self::NegativeBinomial { nu, nbar } => {
                Box::new((0..).map(move |n| negbin_pmf(nu, nbar, n)))
            }
        }
    }

    /// `n,pmf,cdf` rows.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("n,pmf,cdf\n");
        let mut cdf = 0.0;
        for (n, p) in self.table().into_iter().enumerate() {
            cdf += p;
            out.push_str(&format!("{n},{},{}\n", fmt_f64(p), fmt_f64(cdf)));
        }
        out
    }
}

/// Polya-Aeppli PMF with Poisson mean `nu (1 - p)` and geometric clusters of
/// success probability `p`, evaluated in log space.
pub fn polya_aeppli_pmf(nu: f64, p: f64, n: u64) -> f64 {
    let lambda = nu * (1.0 - p);
    if n == 0 {
        return (-lambda).exp();
    }
    let (ln_l, ln_p, ln_q) = (lambda.ln(), p.ln(), (1.0 - p).ln());
    let ln_fact_n1 = ln_factorial(n - 1);
    let terms: Vec<f64> = (1..=n)
        .map(|k| {
            let ln_binom = ln_fact_n1 - ln_factorial(k - 1) - ln_factorial(n - k);
            -lambda + k as f64 * ln_l - ln_factorial(k)
                + ln_binom
                + (n - k) as f64 * ln_q
                + k as f64 * ln_p
        })
        .collect();
    log_sum_exp(&terms).exp()
}

/// Polya-Aeppli PMF by the recursion that follows from
/// `(1 - qu)^2 G'(u) = lambda p G(u)`:
/// `(n + 1) P(n+1) = (2qn + lambda p) P(n) - q^2 (n - 1) P(n-1)`.
/// Values are kept relative to a running log scale so `e^-lambda` cannot
/// underflow.
struct PolyaAeppliTerms {
    lambda_p: f64,
    q: f64,
    n: u64,
    prev: f64,
    cur: f64,
    ln_scale: f64,
}

impl PolyaAeppliTerms {
    fn new(nu: f64, p: f64) -> Self {
        let q = 1.0 - p;
        Self {
            lambda_p: nu * q * p,
            q,
            n: 0,
            prev: 0.0,
            cur: 1.0,
            ln_scale: -nu * q,
        }
    }
}

impl Iterator for PolyaAeppliTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur * self.ln_scale.exp();
        let n = self.n as f64;
        let next = ((2.0 * self.q * n + self.lambda_p) * self.cur
            - self.q * self.q * (n - 1.0).max(0.0) * self.prev)
            / (n + 1.0);
        self.prev = self.cur;
        self.cur = next.max(0.0);
        self.n += 1;
        if self.cur > 1e100 || (self.cur > 0.0 && self.cur < 1e-100) {
            self.ln_scale += self.cur.ln();
            self.prev /= self.cur;
            self.cur = 1.0;
        }
        Some(out)
    }
}

/// Negative binomial PMF with shape `nu` and mean `nbar`, in log space.
pub fn negbin_pmf(nu: f64, nbar: f64, n: u64) -> f64 {
    let ratio = nbar / nu;
    let nf = n as f64;
    (ln_gamma(nf + nu) - ln_gamma(nu) - ln_factorial(n) + nf * ratio.ln()
        - (nu + nf) * ratio.ln_1p())
    .exp()
}

/// Texture autocovariance: `(-h2 / nu) (1 - s / T)` on `[0, T]`, zero beyond.
pub fn texture_cov(nu: f64, window: f64, h2: f64, s: f64) -> f64 {
    let s = s.abs();
    if s >= window {
        0.0
    } else {
        (-h2 / nu) * (1.0 - s / window)
    }
}

/// Grid resolution for [`gaussian_limit_distance`].
const LIMIT_GRID: usize = 10_000;

/// `sup |G(z) - e^-z|` over `z` in `[0, z_max]`.
pub fn gaussian_limit_distance(model: &BernsteinModel, nu: f64, z_max: f64) -> Result<f64> {
    let g = limit_transform(model, nu)?;
    if !(z_max >= 0.0 && z_max.is_finite()) {
        return Err(domain("z_max", z_max, "must be finite and nonnegative"));
    }
    if z_max == 0.0 {
        return Ok(0.0);
    }
    Ok((0..=LIMIT_GRID)
        .map(|i| {
            let z = z_max * i as f64 / LIMIT_GRID as f64;
            (g.value(z) - (-z).exp()).abs()
        })
        .fold(0.0, f64::max))
}

/// Raw moments `E[tau^m] = (-1)^m G^(m)(0)` for `m = 0..=order`, by
/// one-sided finite differences.
pub fn lst_moments(transform: &LimitTransform, order: u32) -> Result<Vec<f64>> {
    if order > 2 {
        return Err(Error::Unsupported(format!(
            "moments are differenced up to order 2, got {order}"
        )));
    }
    let f = |z: f64| transform.value(z);
    Ok((0..=order)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * nth_derivative(&f, m, 0.0)
        })
        .collect())
}
