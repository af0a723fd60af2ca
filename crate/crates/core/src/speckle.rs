//! Circular complex Gaussian speckle and compound-Gaussian composition
//! `z(t) = sqrt(tau(t)) x(t)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::export::fmt_f64;
use crate::texture::{sample_on_grid, TexturePath};

/// Longest series accepted for a custom correlation.
pub const CUSTOM_MAX_LEN: usize = 8192;
/// Slack allowed on reflection coefficients before a sequence counts as
/// not positive semidefinite.
const REFLECTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Correlation {
    White,
    /// Lag-`k` correlation `rho^k`.
    Ar1 {
        rho: f64,
    },
    /// Correlation coefficients at lags `0, 1, ...` (`acf[0] = 1`); zero
    /// beyond the list.
    Custom {
        acf: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeckleSpec {
    /// `E|x|^2`.
    pub variance: f64,
    pub correlation: Correlation,
    pub dt: f64,
}

impl SpeckleSpec {
    pub fn white(variance: f64, dt: f64) -> Self {
        Self {
            variance,
            correlation: Correlation::White,
            dt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(domain(
                "variance",
                self.variance,
                "must be positive and finite",
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(domain("dt", self.dt, "must be positive and finite"));
        }
        match &self.correlation {
            Correlation::White => Ok(()),
            Correlation::Ar1 { rho } => {
                if (0.0..1.0).contains(rho) {
                    Ok(())
                } else {
                    Err(domain("rho", *rho, "must lie in [0, 1)"))
                }
            }
            Correlation::Custom { acf } => {
                if acf.first().is_none_or(|&r0| (r0 - 1.0).abs() > 1e-12) {
                    return Err(Error::InvalidConfig("custom acf must start with 1".into()));
                }
                if acf.iter().any(|r| !r.is_finite()) {
                    return Err(Error::InvalidConfig("custom acf must be finite".into()));
                }
                // Running the recursion over the given lags checks them.
                Levinson::new(acf, acf.len()).try_for_each(|step| step.map(|_| ()))
            }
        }
    }
}

/// One order of the Levinson-Durbin recursion: the forward predictor
/// coefficients for the next sample and the innovation variance.
struct LevinsonStep<'a> {
    coefficients: &'a [f64],
    innovation: f64,
}

/// Levinson-Durbin recursion over a Toeplitz correlation, yielding the
/// order-`k` predictor for `k = 0..n`. Once the innovation variance vanishes
/// the process is determined by its past and the predictor is frozen.
struct Levinson<'a> {
    acf: &'a [f64],
    n: usize,
    order: usize,
    a: Vec<f64>,
    scratch: Vec<f64>,
    p: f64,
    frozen: bool,
}

impl<'a> Levinson<'a> {
    fn new(acf: &'a [f64], n: usize) -> Self {
        Self {
            acf,
            n,
            order: 0,
            a: Vec::with_capacity(n),
            scratch: Vec::with_capacity(n),
            p: 1.0,
            frozen: false,
        }
    }

    fn r(&self, lag: usize) -> f64 {
        self.acf.get(lag).copied().unwrap_or(0.0)
    }

    /// Feeds each order's predictor to `f`, stopping at the first error.
    fn try_for_each(
        mut self,
        mut f: impl FnMut(Result<LevinsonStep<'_>>) -> Result<()>,
    ) -> Result<()> {
        while self.order < self.n {
            if self.order > 0 && !self.frozen {
                let m = self.order;
                let mut num = self.r(m);
                for j in 1..m {
                    num -= self.a[j - 1] * self.r(m - j);
                }
                let k = num / self.p;
                if k.abs() > 1.0 + REFLECTION_SLACK {
                    return f(Err(Error::NotPositiveSemidefinite {
                        lag: m,
                        coefficient: k,
                    }));
                }
                let k = k.clamp(-1.0, 1.0);
                self.scratch.clear();
                self.scratch
                    .extend((1..m).map(|j| self.a[j - 1] - k * self.a[m - j - 1]));
                self.scratch.push(k);
                std::mem::swap(&mut self.a, &mut self.scratch);
                self.p *= 1.0 - k * k;
                if self.p <= 1e-12 {
                    self.p = 0.0;
                    self.frozen = true;
                }
            }
            f(Ok(LevinsonStep {
                coefficients: &self.a,
                innovation: self.p,
            }))?;
            self.order += 1;
        }
        Ok(())
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, std_per_component: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * std_per_component, im * std_per_component)
}

/// `n` samples of zero-mean circular complex Gaussian speckle with
/// `E|x|^2 = variance`.
pub fn gen_speckle<R: Rng + ?Sized>(
    spec: &SpeckleSpec,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let unit = (0.5 * spec.variance).sqrt();
    match &spec.correlation {
        Correlation::White => Ok((0..n).map(|_| complex_normal(rng, unit)).collect()),
        Correlation::Ar1 { rho } => {
            let innovation = unit * (1.0 - rho * rho).sqrt();
            let mut out = Vec::with_capacity(n);
            let mut x = complex_normal(rng, unit);
            out.push(x);
            for _ in 1..n {
                x = x * *rho + complex_normal(rng, innovation);
                out.push(x);
            }
            Ok(out)
        }
        Correlation::Custom { acf } => {
            if n > CUSTOM_MAX_LEN {
                return Err(Error::Unsupported(format!(
                    "custom correlation is limited to {CUSTOM_MAX_LEN} samples, got {n}"
                )));
            }
            let mut out: Vec<Complex64> = Vec::with_capacity(n);
            Levinson::new(acf, n).try_for_each(|step| {
                let step = step?;
                let k = out.len();
                let mut x = complex_normal(rng, unit * step.innovation.sqrt());
                for (j, a) in step.coefficients.iter().enumerate() {
                    x += out[k - 1 - j] * *a;
                }
                out.push(x);
                Ok(())
            })?;
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClutterSeries {
    pub t: Vec<f64>,
    pub z: Vec<Complex64>,
    pub tau: Vec<f64>,
}

impl ClutterSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `t,re,im,tau` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im,tau\n");
        for ((t, z), tau) in self.t.iter().zip(&self.z).zip(&self.tau) {
            for (i, v) in [*t, z.re, z.im, *tau].into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&fmt_f64(v));
            }
            out.push('\n');
        }
        out
    }
}

/// Number of grid points `i dt`, `i = 0..=floor(duration / dt)`.
pub fn grid_len(duration: f64, dt: f64) -> usize {
    (duration / dt + 1e-9).floor() as usize + 1
}

/// `z_i = sqrt(tau(i dt)) x_i`, with `tau` the normalized path sampled
/// right-continuously on the grid.
pub fn compose(path: &TexturePath, speckle: &[Complex64], dt: f64) -> Result<ClutterSeries> {
    if !(dt > 0.0) {
        return Err(domain("dt", dt, "must be positive"));
    }
    let expected = grid_len(path.duration(), dt);
    if speckle.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: speckle.len(),
        });
    }
    let norm = path.normalization();
    let tau: Vec<f64> = sample_on_grid(path, dt, path.duration())
        .into_iter()
        .map(|v| v / norm)
        .collect();
    let z = tau
        .iter()
        .zip(speckle)
        .map(|(tau, x)| x * tau.sqrt())
        .collect();
    let t = (0..expected).map(|i| i as f64 * dt).collect();
    Ok(ClutterSeries { t, z, tau })
}
