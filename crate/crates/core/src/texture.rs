//! Windowed compound-Poisson texture paths.
//!
//! A cluster arriving at time `a` with mark `m` contributes `m` to the path on
//! `[a - T, a)`, i.e. `tau(t)` sums the marks whose arrival lies in `(t, t + T]`.
//! Paths are piecewise constant and right-continuous; the change-point list is
//! the authoritative representation and grid samples are a view of it.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::bernstein::{Activity, BernsteinModel};
use crate::error::{domain, Error, Result};
use crate::export::{csv_from_rows, fmt_f64};
use crate::mixing::{continuous_mixing, MixingLaw};
use crate::rng;

/// Upper bound on the expected number of generated arrivals.
pub const ARRIVAL_GUARD: f64 = 1e9;
/// Smallest `kappa` accepted by the infinite-activity approximation.
pub const MIN_KAPPA: f64 = 10.0;
/// Below this `kappa` the approximation is flagged as coarse.
pub const COARSE_KAPPA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    /// Exact finite-activity limit: rate `gamma C`, marks `xi / (gamma C T)`.
    FiniteExact,
    /// Normalized integer process at finite `kappa`.
    InfiniteApprox,
    /// Raw integer counts `N_T(t)`; divide by `normalization` for `tau`.
    DiscreteWindowed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub gamma: f64,
    pub window: f64,
    pub kappa: f64,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    /// `nu = gamma T`.
    pub fn nu(&self) -> f64 {
        self.gamma * self.window
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("window", self.window),
            ("kappa", self.kappa),
            ("duration", self.duration),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} must be positive and finite"
                )));
            }
        }
        if self.dt >= self.window {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be smaller than the window T = {}",
                self.dt, self.window
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TexturePath {
    change_times: Vec<f64>,
    values: Vec<f64>,
    normalization: f64,
    duration: f64,
}

impl TexturePath {
    /// A path that holds `value` on `[0, duration]`.
    pub fn constant(value: f64, duration: f64) -> Self {
        Self {
            change_times: vec![0.0],
            values: vec![value],
            normalization: 1.0,
            duration,
        }
    }

    /// Builds a path from change points; `change_times` must start at 0 and
    /// increase strictly, and `values` must be nonnegative.
    pub fn from_parts(
        change_times: Vec<f64>,
        values: Vec<f64>,
        normalization: f64,
        duration: f64,
    ) -> Result<Self> {
        if change_times.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: change_times.len(),
                actual: values.len(),
            });
        }
        if change_times.first() != Some(&0.0) {
            return Err(Error::InvalidConfig("change times must start at 0".into()));
        }
        if change_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "change times must increase strictly".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig(
                "path values must be nonnegative".into(),
            ));
        }
        Ok(Self {
            change_times,
            values,
            normalization,
            duration,
        })
    }

    pub fn change_times(&self) -> &[f64] {
        &self.change_times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Divisor that turns `values` into `tau`: the mean window count for raw
    /// discrete paths, 1 otherwise.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Right-continuous value at `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.change_times.partition_point(|&c| c <= t);
        self.values[i.saturating_sub(1)]
    }

    /// The same path divided by its normalization.
    pub fn normalized(&self) -> Self {
        let norm = self.normalization;
        Self {
            change_times: self.change_times.clone(),
            values: self.values.iter().map(|v| v / norm).collect(),
            normalization: 1.0,
            duration: self.duration,
        }
    }

    /// `change_time,value` rows.
    pub fn to_event_csv(&self) -> String {
        csv_from_rows(
            &["change_time", "value"],
            self.change_times
                .iter()
                .zip(&self.values)
                .map(|(&t, &v)| [t, v]),
        )
    }

    /// `t,tau` rows on the grid `i dt`.
    pub fn to_grid_csv(&self, dt: f64) -> String {
        let tau = sample_on_grid(self, dt, self.duration);
        let norm = self.normalization;
        let mut out = String::from("t,tau\n");
        for (i, v) in tau.iter().enumerate() {
            out.push_str(&fmt_f64(i as f64 * dt));
            out.push(',');
            out.push_str(&fmt_f64(v / norm));
            out.push('\n');
        }
        out
    }
}

/// Poisson arrival times on `(0, t_end]` from exponential gaps.
pub fn poisson_arrivals<R: Rng + ?Sized>(rate: f64, t_end: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(domain("rate", rate, "must be positive and finite"));
    }
    let expected = rate * t_end;
    if !(expected < ARRIVAL_GUARD) {
        return Err(Error::ArrivalGuard {
            expected,
            limit: ARRIVAL_GUARD,
        });
    }
    let mut times = Vec::with_capacity((expected + 4.0 * expected.sqrt() + 16.0) as usize);
    let mut t = 0.0;
    loop {
        let gap: f64 = Exp1.sample(rng);
        t += gap / rate;
        if t > t_end {
            break;
        }
        times.push(t);
    }
    Ok(times)
}

fn check_clusters(arrivals: &[f64], marks: &[f64], window: f64) -> Result<()> {
    if arrivals.len() != marks.len() {
        return Err(Error::LengthMismatch {
            expected: arrivals.len(),
            actual: marks.len(),
        });
    }
    if !(window > 0.0) {
        return Err(domain("window", window, "must be positive"));
    }
    if arrivals.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("arrivals must be ascending".into()));
    }
    if marks.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::InvalidConfig("marks must be nonnegative".into()));
    }
    Ok(())
}

/// Exact resummation interval of the running window sum.
const RESUM_INTERVAL: usize = 256;

/// Sums marks of clusters active at `t` (entry `a - T <= t < a`) for
/// ascending query times. The sum is maintained incrementally, reset to an
/// exact zero whenever the window empties, and recomputed exactly every
/// [`RESUM_INTERVAL`] updates to bound roundoff drift.
struct WindowCursor<'a> {
    arrivals: &'a [f64],
    marks: &'a [f64],
    window: f64,
    lo: usize,
    hi: usize,
    sum: f64,
    updates: usize,
}

impl<'a> WindowCursor<'a> {
    fn new(arrivals: &'a [f64], marks: &'a [f64], window: f64) -> Self {
        Self {
            arrivals,
            marks,
            window,
            lo: 0,
            hi: 0,
            sum: 0.0,
            updates: 0,
        }
    }

    fn sum_at(&mut self, t: f64) -> f64 {
        while self.hi < self.arrivals.len() && self.arrivals[self.hi] - self.window <= t {
            self.sum += self.marks[self.hi];
            self.hi += 1;
            self.updates += 1;
        }
        while self.lo < self.arrivals.len() && self.arrivals[self.lo] <= t {
            self.sum -= self.marks[self.lo];
            self.lo += 1;
            self.updates += 1;
        }
        if self.hi <= self.lo {
            self.sum = 0.0;
            self.updates = 0;
        } else if self.updates >= RESUM_INTERVAL {
            self.sum = self.marks[self.lo..self.hi].iter().sum();
            self.updates = 0;
        }
        self.sum
    }
}

/// The windowed sum as a change-point path on `[0, duration]`.
pub fn windowed_process(
    arrivals: &[f64],
    marks: &[f64],
    window: f64,
    duration: f64,
) -> Result<TexturePath> {
    check_clusters(arrivals, marks, window)?;
    if !(duration > 0.0) {
        return Err(domain("duration", duration, "must be positive"));
    }
    let mut times = Vec::with_capacity(2 * arrivals.len() + 1);
    times.push(0.0);
    for &a in arrivals {
        for c in [a - window, a] {
            if c > 0.0 && c <= duration {
                times.push(c);
            }
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut cursor = WindowCursor::new(arrivals, marks, window);
    let mut change_times = Vec::with_capacity(times.len());
    let mut values: Vec<f64> = Vec::with_capacity(times.len());
    for t in times {
        let v = cursor.sum_at(t);
        // Drop change points where the value does not actually change.
        if values.last() == Some(&v) {
            continue;
        }
        change_times.push(t);
        values.push(v);
    }
    Ok(TexturePath {
        change_times,
        values,
        normalization: 1.0,
        duration,
    })
}

/// Window sums at ascending `times`, without building a path.
pub fn window_sums(
    arrivals: &[f64],
    marks: &[f64],
    window: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_clusters(arrivals, marks, window)?;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("query times must be ascending".into()));
    }
    let mut cursor = WindowCursor::new(arrivals, marks, window);
    Ok(times.iter().map(|&t| cursor.sum_at(t)).collect())
}

/// Right-continuous samples `tau(i dt)` for `i = 0..=floor(duration/dt)`,
/// in the path's own units (not divided by the normalization).
pub fn sample_on_grid(path: &TexturePath, dt: f64, duration: f64) -> Vec<f64> {
    let n = (duration / dt + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let t = i as f64 * dt;
        while j + 1 < path.change_times.len() && path.change_times[j + 1] <= t {
            j += 1;
        }
        out.push(path.values[j]);
    }
    out
}

/// Cluster arrivals and marks covering `(-T, duration + T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Clusters {
    pub arrivals: Vec<f64>,
    pub marks: Vec<f64>,
}

fn warm_arrivals<R: Rng + ?Sized>(rate: f64, cfg: &SimConfig, rng: &mut R) -> Result<Vec<f64>> {
    let mut arrivals = poisson_arrivals(rate, cfg.duration + 2.0 * cfg.window, rng)?;
    for a in &mut arrivals {
        *a -= cfg.window;
    }
    Ok(arrivals)
}

/// Clusters of the exact finite-activity process.
pub fn finite_exact_clusters<R: Rng + ?Sized>(
    model: &BernsteinModel,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Clusters> {
    cfg.validate()?;
    let xi = continuous_mixing(model)?;
    let limit = match model.activity() {
        Activity::Finite { limit } => limit,
        Activity::Infinite => unreachable!("continuous_mixing rejects infinite activity"),
    };
    let rate = cfg.gamma * limit;
    let scale = rate * cfg.window;
    let arrivals = warm_arrivals(rate, cfg, rng)?;
    let marks = arrivals.iter().map(|_| xi.sample(rng) / scale).collect();
    Ok(Clusters { arrivals, marks })
}

/// Clusters of the integer process at `cfg.kappa`: rate `gamma h(kappa)` and
/// marks `K ~ p_K(.; kappa)`.
pub fn discrete_clusters<R: Rng + ?Sized>(
    model: &BernsteinModel,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<Clusters> {
    cfg.validate()?;
    let law = MixingLaw::new(model, cfg.kappa)?;
    let rate = cfg.gamma * model.value(cfg.kappa);
    let arrivals = warm_arrivals(rate, cfg, rng)?;
    let marks = arrivals
        .iter()
        .map(|_| law.sample(rng).map(|k| k as f64))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Clusters { arrivals, marks })
}

/// Integer window counts `N_T(i spacing)` for `i = 0..snapshots`, from one
/// long run of the integer process. With `spacing > T` the snapshots are
/// independent.
pub fn count_snapshots<R: Rng + ?Sized>(
    model: &BernsteinModel,
    cfg: &SimConfig,
    snapshots: usize,
    spacing: f64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if !(spacing > 0.0) {
        return Err(domain("spacing", spacing, "must be positive"));
    }
    let cfg = SimConfig {
        duration: snapshots as f64 * spacing,
        ..cfg.clone()
    };
    let c = discrete_clusters(model, &cfg, rng)?;
    let times: Vec<f64> = (0..snapshots).map(|i| i as f64 * spacing).collect();
    Ok(window_sums(&c.arrivals, &c.marks, cfg.window, &times)?
        .into_iter()
        .map(|v| v.round() as u64)
        .collect())
}

/// `N_T = lambda T E[K] = nu kappa h1`, the mean window count.
pub fn mean_window_count(model: &BernsteinModel, cfg: &SimConfig) -> f64 {
    cfg.nu() * cfg.kappa * model.h1()
}

pub fn simulate_finite_exact<R: Rng + ?Sized>(
    model: &BernsteinModel,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<TexturePath> {
    let c = finite_exact_clusters(model, cfg, rng)?;
    windowed_process(&c.arrivals, &c.marks, cfg.window, cfg.duration)
}

/// Raw integer window counts with `normalization` set to the mean count.
pub fn simulate_discrete_windowed<R: Rng + ?Sized>(
    model: &BernsteinModel,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<TexturePath> {
    let c = discrete_clusters(model, cfg, rng)?;
    let mut path = windowed_process(&c.arrivals, &c.marks, cfg.window, cfg.duration)?;
    path.normalization = mean_window_count(model, cfg);
    Ok(path)
}

/// Integer process divided by its mean count; approximates the limit for
/// infinite-activity models as `kappa` grows.
pub fn simulate_infinite_approx<R: Rng + ?Sized>(
    model: &BernsteinModel,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<TexturePath> {
    if cfg.kappa < MIN_KAPPA {
        return Err(domain(
            "kappa",
            cfg.kappa,
            "the approximation needs kappa >= 10",
        ));
    }
    if cfg.kappa < COARSE_KAPPA {
        log::warn!(
            "kappa = {} < {COARSE_KAPPA}: the approximation is coarse",
            cfg.kappa
        );
    }
    Ok(simulate_discrete_windowed(model, cfg, rng)?.normalized())
}

/// Runs `cfg.mode` with an RNG seeded from `cfg.seed`.
pub fn simulate(model: &BernsteinModel, cfg: &SimConfig) -> Result<TexturePath> {
    simulate_with(model, cfg, &mut rng::seeded(cfg.seed))
}

pub fn simulate_with<R: Rng + ?Sized>(
    model: &BernsteinModel,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<TexturePath> {
    match cfg.mode {
        SimMode::FiniteExact => simulate_finite_exact(model, cfg, rng),
        SimMode::InfiniteApprox => simulate_infinite_approx(model, cfg, rng),
        SimMode::DiscreteWindowed => simulate_discrete_windowed(model, cfg, rng),
    }
}
