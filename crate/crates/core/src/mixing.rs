//! The discrete cluster-size law `K(kappa)` induced by a Bernstein function and
//! the continuous cluster law `xi` of the finite-activity limit.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};

use crate::bernstein::{Activity, BernsteinModel, Builtin, MAX_DIFFERENCE_ORDER};
use crate::error::{domain, Error, Result};
use crate::numeric;
use crate::special::{gamma_lr, ln_factorial};

/// Cumulative mass the PMF table must reach.
pub const PMF_MASS_TARGET: f64 = 1.0 - 1e-10;
/// Hard ceiling on the PMF table length.
pub const PMF_MAX_N: usize = 10_000_000;

#[derive(Debug, Clone)]
pub struct PmfTable {
    /// `pmf[n] = p_K(n)`, with `pmf[0] = 0`.
    pub pmf: Vec<f64>,
    /// `cdf[n] = P(K <= n)`.
    pub cdf: Vec<f64>,
}

impl PmfTable {
    pub fn n_max(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn mass(&self) -> f64 {
        *self.cdf.last().unwrap_or(&0.0)
    }

    /// `(n, p)` rows with a header, for debugging.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p\n");
        for (n, p) in self.pmf.iter().enumerate() {
            out.push_str(&format!("{n},{}\n", crate::export::fmt_f64(*p)));
        }
        out
    }
}

#[derive(Debug)]
pub struct MixingLaw {
    model: BernsteinModel,
    kappa: f64,
    h_kappa: f64,
    mean_k: f64,
    second_moment: f64,
    table: OnceLock<PmfTable>,
    approx: OnceLock<DifferencedPmf>,
}

/// PMF of a model without closed-form derivatives: differenced terms while
/// they are numerically stable, then a continuation carrying the remaining
/// mass.
#[derive(Debug, Clone)]
struct DifferencedPmf {
    head: Vec<f64>,
    tail: Option<Tail>,
}

#[derive(Debug, Clone)]
enum Tail {
    /// Geometric, fitted to the remaining mass and the mean from the PGF.
    Geometric { mass: f64, ratio: f64 },
    /// Poisson mixture over a tabulated law of rates. Each cell is uniform in
    /// the rate, `(lo, hi, mass)`, and `scale` renormalizes the shape to the
    /// remaining mass.
    ///
    /// Finite activity: `K` is a Poisson count with rate `kappa xi / C`.
    /// Otherwise the rates follow the size-biased Levy measure `t mu(dt)`,
    /// whose transform is `h'`, and `p_K(n)` is proportional to
    /// `E[Poisson(kappa t) = n - 1] / n`.
    Mixture {
        cells: Vec<(f64, f64, f64)>,
        scale: f64,
        size_biased: bool,
    },
}

impl Tail {
    fn pmf(&self, n: u64, first: u64) -> f64 {
        match self {
            Tail::Geometric { mass, ratio } => {
                mass * (1.0 - ratio) * ratio.powf((n - first) as f64)
            }
            Tail::Mixture {
                cells,
                scale,
                size_biased: false,
            } => scale * poisson_mixture(cells, n),
            Tail::Mixture { cells, scale, .. } => scale * poisson_mixture(cells, n - 1) / n as f64,
        }
    }
}

fn rate_cells(points: &[f64], cdf: &[f64], rate: f64) -> Vec<(f64, f64, f64)> {
    (1..points.len())
        .map(|i| (rate * points[i - 1], rate * points[i], cdf[i] - cdf[i - 1]))
        .filter(|c| c.2 > 0.0 && c.1 > c.0)
        .collect()
}

/// `sum_cells mass * P(Poisson(lambda) = n)`, `lambda` uniform on each cell.
fn poisson_mixture(cells: &[(f64, f64, f64)], n: u64) -> f64 {
    let a = n as f64 + 1.0;
    cells
        .iter()
        .map(|&(lo, hi, mass)| {
            if hi - lo <= 1e-12 * hi {
                let ln_p = n as f64 * hi.ln() - hi - ln_factorial(n);
                return mass
                    * if hi > 0.0 {
                        ln_p.exp()
                    } else {
                        f64::from(n == 0)
                    };
            }
            // The integral of the Poisson mass over the rate is a gamma CDF difference.
            mass * (gamma_lr(a, hi) - gamma_lr(a, lo)) / (hi - lo)
        })
        .sum()
}

/// Relative disagreement between two difference steps beyond which an order
/// is treated as roundoff-dominated.
const DIFFERENCE_STABILITY: f64 = 1e-4;

impl MixingLaw {
    pub fn new(model: &BernsteinModel, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(domain("kappa", kappa, "must be positive and finite"));
        }
        let h_kappa = model.value(kappa);
        if !(h_kappa > 0.0 && h_kappa.is_finite()) {
            return Err(Error::InvalidModel(format!("h(kappa) = {h_kappa}")));
        }
        let mean_k = kappa * model.h1() / h_kappa;
        let second_moment = -kappa * kappa * model.h2() / h_kappa + mean_k;
        Ok(Self {
            model: model.clone(),
            kappa,
            h_kappa,
            mean_k,
            second_moment,
            table: OnceLock::new(),
            approx: OnceLock::new(),
        })
    }

    pub fn model(&self) -> &BernsteinModel {
        &self.model
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `kappa h1 / h(kappa)`.
    pub fn mean_k(&self) -> f64 {
        self.mean_k
    }

    /// `E[K^2] = -kappa^2 h''(0) / h(kappa) + E[K]`, from the second derivative
    /// of the PGF at `u = 1`.
    pub fn second_moment_k(&self) -> f64 {
        self.second_moment
    }

    /// `E[u^K] = 1 - h(kappa (1 - u)) / h(kappa)` for `0 < u <= 1`.
    pub fn pgf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(domain("u", u, "PGF argument must lie in (0, 1]"));
        }
        Ok(1.0 - self.model.value(self.kappa * (1.0 - u)) / self.h_kappa)
    }

    /// `p_K(n) = -(-kappa)^n h^(n)(kappa) / (n! h(kappa))`, zero at `n = 0`.
    ///
    /// Closed-form models are evaluated in log space. Finite-difference models
    /// use differencing while it is stable (at most [`MAX_DIFFERENCE_ORDER`])
    /// and an approximate geometric tail beyond it.
    pub fn pmf(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let order = n.min(u64::from(u32::MAX)) as u32;
        if let Some(ln_abs) = self.model.ln_abs_derivative(order, self.kappa) {
            let ln_p = n as f64 * self.kappa.ln() + ln_abs - ln_factorial(n) - self.h_kappa.ln();
            return ln_p.exp();
        }
        let approx = self.differenced();
        if let Some(&p) = approx.head.get(order as usize - 1) {
            return p;
        }
        match &approx.tail {
            Some(tail) => tail.pmf(n, approx.head.len() as u64 + 1),
            None => 0.0,
        }
    }

    fn differenced(&self) -> &DifferencedPmf {
        self.approx.get_or_init(|| {
            let mut head = Vec::new();
            for n in 1..=MAX_DIFFERENCE_ORDER.min(self.model.smooth_order()) {
                let d = self.model.derivative(n, self.kappa);
                let check = self.model.derivative_scaled(n, self.kappa, 1.5);
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                let stable = sign * d > 0.0 && (d - check).abs() <= DIFFERENCE_STABILITY * d.abs();
                if !stable && n > 1 {
                    break;
                }
                let ln_p = f64::from(n) * self.kappa.ln() + (sign * d).max(0.0).ln()
                    - ln_factorial(u64::from(n))
                    - self.h_kappa.ln();
                head.push(ln_p.exp());
            }
            let mass = 1.0 - head.iter().sum::<f64>();
            if mass <= 0.0 {
                return DifferencedPmf { head, tail: None };
            }
            if let Some(tail) = self.mixture_tail(head.len() as u64, mass) {
                return DifferencedPmf {
                    head,
                    tail: Some(tail),
                };
            }
            let mean = self.mean_k
                - head
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i + 1) as f64 * p)
                    .sum::<f64>();
            // Tail mean = mass * (n0 + r / (1 - r)), n0 the first tail index.
            let excess = mean / mass - (head.len() + 1) as f64;
            let tail = (excess > 0.0).then(|| Tail::Geometric {
                mass,
                ratio: excess / (1.0 + excess),
            });
            DifferencedPmf { head, tail }
        })
    }

    fn mixture_tail(&self, head_len: u64, mass: f64) -> Option<Tail> {
        let h1 = self.model.h1();
        let (cells, size_biased) = match self.model.activity() {
            Activity::Finite { limit } => {
                let ContinuousRepr::Tabulated { points, cdf } =
                    continuous_mixing(&self.model).ok()?.repr
                else {
                    return None;
                };
                // xi has unit mean and the cluster rate is kappa h1 xi / C.
                (rate_cells(&points, &cdf, self.kappa * h1 / limit), false)
            }
            Activity::Infinite => {
                let transform = |s: f64| self.model.derivative(1, s) / (h1 * s);
                let (points, cdf) = invert_cdf_table(&transform).ok()?;
                (rate_cells(&points, &cdf, self.kappa), true)
            }
        };
        let shape_at = |n: u64| match (size_biased, n) {
            (false, n) => poisson_mixture(&cells, n),
            (true, 0) => 0.0,
            (true, n) => poisson_mixture(&cells, n - 1) / n as f64,
        };
        let total = if size_biased {
            // sum_n P(Poisson(l) = n - 1)/n = (1 - e^-l)/l, averaged over cells.
            cells
                .iter()
                .map(|&(lo, hi, m)| {
                    m * numeric::integrate(&|l: f64| -(-l).exp_m1() / l, lo.max(1e-300), hi, 1e-12)
                        / (hi - lo)
                })
                .sum()
        } else {
            1.0
        };
        let shape = total - (0..=head_len).map(shape_at).sum::<f64>();
        (shape > 0.0).then(|| Tail::Mixture {
            scale: mass / shape,
            cells,
            size_biased,
        })
    }

    /// True when some part of the PMF comes from the fitted tail.
    pub fn pmf_is_approximate(&self) -> bool {
        !self.model.has_closed_form_derivatives()
    }

    /// Cumulative PMF table, grown until the mass reaches [`PMF_MASS_TARGET`]
    /// or the table hits [`PMF_MAX_N`].
    pub fn table(&self) -> &PmfTable {
        self.table.get_or_init(|| {
            let mut pmf = Vec::with_capacity(64);
            let mut cdf = Vec::with_capacity(64);
            pmf.push(0.0);
            cdf.push(0.0);
            let mut total = 0.0;
            let mut n = 1u64;
            while total < PMF_MASS_TARGET && (n as usize) <= PMF_MAX_N {
                if pmf.len() == pmf.capacity() {
                    let extra = pmf.capacity();
                    pmf.reserve(extra);
                    cdf.reserve(extra);
                }
                let p = self.pmf(n);
                total += p;
                pmf.push(p);
                cdf.push(total);
                n += 1;
            }
            PmfTable { pmf, cdf }
        })
    }

    /// Draws `K >= 1`.
    ///
    /// Builtins use exact geometric or logarithmic samplers; other models
    /// invert the cached CDF and fail if its mass is short of the target.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        match self.model.builtin() {
            Some(Builtin::Rational) => Ok(sample_geometric(1.0 / (self.kappa + 1.0), rng)),
            Some(Builtin::Logarithmic) => {
                Ok(sample_logarithmic(self.kappa / (1.0 + self.kappa), rng))
            }
            None => {
                let table = self.table();
                if table.mass() < PMF_MASS_TARGET {
                    return Err(Error::TruncatedPmf {
                        mass: table.mass(),
                        n_max: table.n_max(),
                    });
                }
                Ok(invert_cdf(&table.cdf, rng.random::<f64>()) as u64)
            }
        }
    }
}

/// Smallest index `n` with `cdf[n] >= u`.
pub(crate) fn invert_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c < u).min(cdf.len() - 1)
}

/// Geometric on `{1, 2, ...}` with success probability `p`, by inversion.
pub fn sample_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.sample(Open01);
    let n = 1.0 + (u.ln() / (-p).ln_1p()).floor();
    if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        n as u64
    }
}

/// Logarithmic series law `P(K = n) = -p^n / (n ln(1 - p))`, Kemp's LK algorithm.
pub fn sample_logarithmic<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    let r = (-p).ln_1p();
    loop {
        let v: f64 = rng.sample(Open01);
        if v >= p {
            return 1;
        }
        let u: f64 = rng.sample(Open01);
        let q = -(r * u).exp_m1();
        if v <= q * q {
            let n = (1.0 + v.ln() / q.ln()).floor();
            if n < 1.0 {
                continue;
            }
            return n as u64;
        }
        return if v >= q { 1 } else { 2 };
    }
}

/// The cluster law `xi` with transform `g(z) = 1 - h((C/h1) z)/C` and unit mean.
#[derive(Debug, Clone)]
pub struct ContinuousMixing {
    repr: ContinuousRepr,
}

#[derive(Debug, Clone)]
enum ContinuousRepr {
    Exponential,
    Tabulated { points: Vec<f64>, cdf: Vec<f64> },
}

/// Stehfest orders tried at each abscissa; the most self-consistent pair wins.
const STEHFEST_ORDERS: [usize; 6] = [6, 8, 10, 12, 14, 16];
/// Slack allowed outside `[0, 1]` before an inverted CDF value is discarded.
const CDF_SLACK: f64 = 0.01;
const TABLE_POINTS: usize = 600;
const TABLE_LO: f64 = 1e-4;
const TABLE_HI: f64 = 1e3;

/// The finite-activity cluster law. Infinite-activity models are rejected:
/// their scaled cluster sizes collapse to zero.
pub fn continuous_mixing(model: &BernsteinModel) -> Result<ContinuousMixing> {
    let limit = match model.activity() {
        Activity::Finite { limit } => limit,
        Activity::Infinite => {
            return Err(Error::InvalidModel(
                "infinite-activity model has no continuous cluster law".into(),
            ))
        }
    };
    if model.builtin() == Some(Builtin::Rational) {
        return Ok(ContinuousMixing {
            repr: ContinuousRepr::Exponential,
        });
    }
    let h1 = model.h1();
    let g = |z: f64| 1.0 - model.value(limit / h1 * z) / limit;
    // Laplace transform of the CDF is g(s)/s.
    let transform = |s: f64| g(s) / s;
    let (mut points, cdf) = invert_cdf_table(&transform)?;
    // Inversion bias would otherwise leak into the texture mean.
    let mean: f64 = (1..points.len())
        .map(|i| (cdf[i] - cdf[i - 1]) * 0.5 * (points[i] + points[i - 1]))
        .sum();
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::InvalidModel(format!(
            "inverted cluster law has mean {mean}"
        )));
    }
    if (mean - 1.0).abs() > 0.05 {
        log::warn!("inverted cluster law has mean {mean:.4}; rescaling to 1");
    }
    points.iter_mut().for_each(|x| *x /= mean);
    Ok(ContinuousMixing {
        repr: ContinuousRepr::Tabulated { points, cdf },
    })
}

/// CDF on a log grid from the Laplace transform of the CDF, made monotone and
/// closed at the last abscissa.
fn invert_cdf_table(transform: &dyn Fn(f64) -> f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let weights: Vec<Vec<f64>> = STEHFEST_ORDERS
        .iter()
        .map(|&n| numeric::stehfest_weights(n))
        .collect();
    let mut points = vec![0.0];
    let mut cdf = vec![0.0];
    for x in crate::bernstein::log_grid(TABLE_LO, TABLE_HI, TABLE_POINTS) {
        if let Some(f) = consensus_invert(transform, &weights, x) {
            points.push(x);
            cdf.push(f.clamp(0.0, 1.0));
        }
    }
    if points.len() < 3 {
        return Err(Error::InvalidModel(
            "numerical Laplace inversion failed".into(),
        ));
    }
    let mut cdf = numeric::isotonic(&cdf);
    *cdf.last_mut().unwrap() = 1.0;
    Ok((points, cdf))
}

/// Stehfest inversion at `x` using the pair of consecutive orders that agree
/// best among those giving a plausible CDF value.
fn consensus_invert(transform: &dyn Fn(f64) -> f64, weights: &[Vec<f64>], x: f64) -> Option<f64> {
    let values: Vec<f64> = weights
        .iter()
        .map(|w| numeric::stehfest_invert(transform, w, x))
        .collect();
    let plausible = |v: f64| (-CDF_SLACK..=1.0 + CDF_SLACK).contains(&v);
    values
        .windows(2)
        .filter(|pair| plausible(pair[0]) && plausible(pair[1]))
        .min_by(|a, b| (a[0] - a[1]).abs().total_cmp(&(b[0] - b[1]).abs()))
        .map(|pair| pair[1])
}

impl ContinuousMixing {
    /// Unit by construction.
    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.repr, ContinuousRepr::Exponential)
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.repr {
            ContinuousRepr::Exponential => -(-s).exp_m1(),
            ContinuousRepr::Tabulated { points, cdf } => {
                let i = points.partition_point(|&x| x <= s);
                if i >= points.len() {
                    return 1.0;
                }
                let (x0, x1) = (points[i - 1], points[i]);
                cdf[i - 1] + (cdf[i] - cdf[i - 1]) * (s - x0) / (x1 - x0)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.repr {
            ContinuousRepr::Exponential => Exp1.sample(rng),
            ContinuousRepr::Tabulated { points, cdf } => {
                let u: f64 = rng.random();
                let i = invert_cdf(cdf, u).max(1);
                let (c0, c1) = (cdf[i - 1], cdf[i]);
                if c1 <= c0 {
                    return points[i];
                }
                points[i - 1] + (points[i] - points[i - 1]) * (u - c0) / (c1 - c0)
            }
        }
    }
}
