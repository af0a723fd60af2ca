//! Bernstein functions `h(z)` and the limit transform `G(z)` they define.
//!
//! A model is accepted for simulation when `h(0) = 0`, `h'` is completely
//! monotonic, `h(z)/z -> 0`, and `h'(0) = h1`, `h''(0) = h2` are finite.
//! [`check_bernstein`] probes those conditions numerically.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numeric;
use crate::special::ln_factorial;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type DerivativeFn = Arc<dyn Fn(u32, f64) -> f64 + Send + Sync>;

/// Highest derivative order computed by finite differences.
pub const MAX_DIFFERENCE_ORDER: u32 = 20;

const ACTIVITY_PROBES: [f64; 3] = [1e4, 1e6, 1e8];
const ACTIVITY_GROWTH: f64 = 1e-3;
const SUBLINEAR_PROBE: f64 = 1e8;
const SUBLINEAR_TOL: f64 = 1e-4;
const SIGN_TOL: f64 = 1e-9;

/// Whether `lim h(z)` as `z -> inf` is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "activity", rename_all = "snake_case")]
pub enum Activity {
    Finite { limit: f64 },
    Infinite,
}

/// The two closed-form models with known cluster laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `h(z) = z/(z+1)`: geometric clusters, K-distributed texture.
    Rational,
    /// `h(z) = ln(1+z)`: logarithmic clusters, gamma texture.
    Logarithmic,
}

#[derive(Clone)]
enum Repr {
    Builtin(Builtin),
    Generic {
        eval: RealFn,
        derivative: Option<DerivativeFn>,
    },
}

#[derive(Clone)]
pub struct BernsteinModel {
    name: String,
    repr: Repr,
    h1: f64,
    h2: f64,
    activity: Activity,
    smooth_order: u32,
}

impl fmt::Debug for BernsteinModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BernsteinModel")
            .field("name", &self.name)
            .field("h1", &self.h1)
            .field("h2", &self.h2)
            .field("activity", &self.activity)
            .finish()
    }
}

impl BernsteinModel {
    /// `h(z) = z/(z+1)`, finite activity with `C = 1`.
    pub fn finite_builtin() -> Self {
        Self {
            name: "finite-k".into(),
            repr: Repr::Builtin(Builtin::Rational),
            h1: 1.0,
            h2: -2.0,
            activity: Activity::Finite { limit: 1.0 },
            smooth_order: u32::MAX,
        }
    }

    /// `h(z) = ln(1+z)`, infinite activity.
    pub fn infinite_builtin() -> Self {
        Self {
            name: "infinite-gamma".into(),
            repr: Repr::Builtin(Builtin::Logarithmic),
            h1: 1.0,
            h2: -1.0,
            activity: Activity::Infinite,
            smooth_order: u32::MAX,
        }
    }

    /// Wraps an arbitrary function. Derivatives come from finite differences
    /// and `h1`, `h2` and the activity class are estimated numerically.
    ///
    /// Nothing is validated here; run [`check_bernstein`] before use.
    pub fn from_fn(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::generic(name.into(), Arc::new(eval), None)
    }

    /// Like [`from_fn`](Self::from_fn) with caller-supplied closed-form
    /// derivatives `(n, z) -> h^(n)(z)`.
    pub fn with_derivatives(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(u32, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::generic(name.into(), Arc::new(eval), Some(Arc::new(derivative)))
    }

    fn generic(name: String, eval: RealFn, derivative: Option<DerivativeFn>) -> Self {
        let smooth_order = if derivative.is_some() {
            u32::MAX
        } else {
            MAX_DIFFERENCE_ORDER
        };
        let mut model = Self {
            name,
            repr: Repr::Generic { eval, derivative },
            h1: f64::NAN,
            h2: f64::NAN,
            activity: Activity::Infinite,
            smooth_order,
        };
        model.h1 = model.derivative(1, 0.0);
        model.h2 = model.derivative(2, 0.0);
        model.activity = classify_activity(&|z| model.value(z));
        model
    }

    /// Builds `h(z) = -(1/nu) ln G(nu z)` from the Laplace-Stieltjes transform
    /// `G` of a unit-mean infinitely divisible variable, with `h1 = 1`.
    pub fn from_lst(g: impl Fn(f64) -> f64 + Send + Sync + 'static, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(domain("nu", nu, "must be positive and finite"));
        }
        let g0 = g(0.0);
        if (g0 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!("G(0) = {g0}, expected 1")));
        }
        let g = Arc::new(g);
        let eval = move |z: f64| -g(nu * z).ln() / nu;
        let mut model = Self::generic(format!("lst(nu={nu})"), Arc::new(eval), None);

        let probes = log_grid(1e-3, SUBLINEAR_PROBE, 67);
        let mut previous = 0.0_f64;
        for &z in &probes {
            let h = model.value(z);
            if h.is_nan() || h < 0.0 {
                return Err(Error::InvalidModel(format!("h({z}) = {h} is negative")));
            }
            if h < previous - 1e-12 * previous.abs() {
                return Err(Error::InvalidModel(format!("h decreases at z = {z}")));
            }
            previous = h;
        }
        let ratio = model.value(SUBLINEAR_PROBE) / SUBLINEAR_PROBE;
        if !(ratio < SUBLINEAR_TOL) {
            return Err(Error::InvalidModel(format!(
                "h(z)/z = {ratio} at z = {SUBLINEAR_PROBE:e}; h must grow sublinearly"
            )));
        }
        if (model.h1 - 1.0).abs() > 1e-4 {
            return Err(Error::InvalidModel(format!(
                "-G'(0) = {}, the transform must have unit mean",
                model.h1
            )));
        }
        // Fixed by convention; the difference estimate above only gates the mean.
        model.h1 = 1.0;
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    pub fn activity(&self) -> Activity {
        self.activity
    }

    /// Highest derivative order the representation resolves; beyond it
    /// derivative-based quantities are not trusted.
    pub fn smooth_order(&self) -> u32 {
        self.smooth_order
    }

    /// Caps [`Self::smooth_order`], e.g. at 1 for a C1 interpolant.
    pub fn with_smooth_order(mut self, order: u32) -> Self {
        self.smooth_order = order.min(self.smooth_order);
        self
    }

    pub fn builtin(&self) -> Option<Builtin> {
        match self.repr {
            Repr::Builtin(b) => Some(b),
            Repr::Generic { .. } => None,
        }
    }

    /// True when derivatives of every order are available without differencing.
    pub fn has_closed_form_derivatives(&self) -> bool {
        match &self.repr {
            Repr::Builtin(_) => true,
            Repr::Generic { derivative, .. } => derivative.is_some(),
        }
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        check_argument(z)?;
        Ok(self.value(z))
    }

    /// `h^(n)(z)`. Finite-difference models refuse orders above
    /// [`MAX_DIFFERENCE_ORDER`].
    pub fn nth_derivative(&self, n: u32, z: f64) -> Result<f64> {
        check_argument(z)?;
        if !self.has_closed_form_derivatives() && n > MAX_DIFFERENCE_ORDER {
            return Err(Error::Unsupported(format!(
                "finite-difference derivative of order {n} (limit {MAX_DIFFERENCE_ORDER})"
            )));
        }
        Ok(self.derivative(n, z))
    }

    pub(crate) fn value(&self, z: f64) -> f64 {
        match &self.repr {
            Repr::Builtin(Builtin::Rational) => z / (z + 1.0),
            Repr::Builtin(Builtin::Logarithmic) => z.ln_1p(),
            Repr::Generic { eval, .. } => eval(z),
        }
    }

    pub(crate) fn derivative(&self, n: u32, z: f64) -> f64 {
        self.derivative_scaled(n, z, 1.0)
    }

    /// Derivative with the difference step scaled by `scale`; closed forms
    /// ignore the scale.
    pub(crate) fn derivative_scaled(&self, n: u32, z: f64, scale: f64) -> f64 {
        if n == 0 {
            return self.value(z);
        }
        match &self.repr {
            Repr::Builtin(_) => {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                sign * self
                    .ln_abs_derivative(n, z)
                    .unwrap_or(f64::NEG_INFINITY)
                    .exp()
            }
            Repr::Generic {
                derivative: Some(d),
                ..
            } => d(n, z),
            Repr::Generic { eval, .. } => {
                let f = |x: f64| eval(x);
                numeric::nth_derivative_scaled(&f, n, z, scale)
            }
        }
    }

    /// `ln |h^(n)(z)|` for `n >= 1`, available for closed-form models only.
    pub(crate) fn ln_abs_derivative(&self, n: u32, z: f64) -> Option<f64> {
        debug_assert!(n >= 1);
        match &self.repr {
            Repr::Builtin(Builtin::Rational) => {
                Some(ln_factorial(u64::from(n)) - f64::from(n + 1) * z.ln_1p())
            }
            Repr::Builtin(Builtin::Logarithmic) => {
                Some(ln_factorial(u64::from(n - 1)) - f64::from(n) * z.ln_1p())
            }
            Repr::Generic {
                derivative: Some(d),
                ..
            } => Some(d(n, z).abs().ln()),
            Repr::Generic { .. } => None,
        }
    }

    /// Rough magnitude of the roundoff in a differenced derivative; zero for
    /// closed forms.
    fn derivative_noise(&self, n: u32, z: f64) -> f64 {
        if self.has_closed_form_derivatives() {
            return 0.0;
        }
        let step = numeric::difference_step(n, z);
        1e3 * f64::EPSILON * self.value(z).abs().max(1.0) * 2f64.powi(n as i32)
            / step.powi(n as i32)
    }
}

fn check_argument(z: f64) -> Result<()> {
    if z >= 0.0 {
        Ok(())
    } else {
        Err(domain(
            "z",
            z,
            "Bernstein functions are evaluated on z >= 0",
        ))
    }
}

fn classify_activity(h: &dyn Fn(f64) -> f64) -> Activity {
    let values: Vec<f64> = ACTIVITY_PROBES.iter().map(|&z| h(z)).collect();
    let bounded = values.iter().all(|v| v.is_finite())
        && values
            .windows(2)
            .all(|w| ((w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE)).abs() < ACTIVITY_GROWTH);
    if bounded {
        Activity::Finite { limit: values[2] }
    } else {
        Activity::Infinite
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// One probed condition: positive margins pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub condition: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub probe_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub conditions: Vec<ConditionResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionResult> {
        self.conditions.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, condition: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.condition == condition)
    }
}

/// Probes the side conditions on `h` over `grid` with sign checks of
/// `(-1)^n h^(n+1)` for `n = 0..=max_order`.
pub fn check_bernstein(
    model: &BernsteinModel,
    grid: &[f64],
    max_order: u32,
) -> Result<ValidationReport> {
    if max_order > 6 {
        return Err(Error::Unsupported(format!("max_order {max_order} > 6")));
    }
    if let Some(&z) = grid.iter().find(|&&z| !(z > 0.0 && z.is_finite())) {
        return Err(domain("grid point", z, "grid must lie in (0, inf)"));
    }
    let mut conditions = Vec::new();

    let h0 = model.value(0.0);
    conditions.push(ConditionResult {
        condition: "h(0) = 0".into(),
        passed: h0.abs() <= 1e-12,
        worst_margin: 1e-12 - h0.abs(),
        probe_z: 0.0,
    });

    let (neg_z, neg_margin) =
        grid.iter()
            .map(|&z| (z, model.value(z)))
            .fold((f64::NAN, f64::INFINITY), |acc, (z, v)| {
                if v < acc.1 {
                    (z, v)
                } else {
                    acc
                }
            });
    conditions.push(ConditionResult {
        condition: "h >= 0".into(),
        passed: neg_margin >= 0.0,
        worst_margin: neg_margin,
        probe_z: neg_z,
    });

    for n in 0..=max_order {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let (z, margin) = grid
            .iter()
            .map(|&z| {
                (
                    z,
                    sign * model.derivative(n + 1, z) + model.derivative_noise(n + 1, z),
                )
            })
            .fold((f64::NAN, f64::INFINITY), |acc, (z, m)| {
                if m < acc.1 || m.is_nan() {
                    (z, m)
                } else {
                    acc
                }
            });
        conditions.push(ConditionResult {
            condition: format!("sign alternation order {n}"),
            passed: margin >= -SIGN_TOL,
            worst_margin: margin,
            probe_z: z,
        });
    }

    let ratio = model.value(SUBLINEAR_PROBE) / SUBLINEAR_PROBE;
    conditions.push(ConditionResult {
        condition: "h(z)/z -> 0".into(),
        passed: ratio < SUBLINEAR_TOL,
        worst_margin: SUBLINEAR_TOL - ratio,
        probe_z: SUBLINEAR_PROBE,
    });

    let h1 = model.h1;
    conditions.push(ConditionResult {
        condition: "h1 finite and positive".into(),
        passed: h1 > 0.0 && h1.is_finite(),
        worst_margin: if h1.is_finite() { h1 } else { f64::MIN },
        probe_z: 0.0,
    });

    let h2 = model.h2;
    let noise = model.derivative_noise(2, 0.0);
    conditions.push(ConditionResult {
        condition: "h2 finite and nonpositive".into(),
        passed: h2.is_finite() && h2 <= noise.max(SIGN_TOL),
        worst_margin: if h2.is_finite() { -h2 } else { f64::MIN },
        probe_z: 0.0,
    });

    if let Activity::Finite { limit } = model.activity {
        let gap = (model.value(SUBLINEAR_PROBE) - limit).abs();
        conditions.push(ConditionResult {
            condition: "finite activity limit".into(),
            passed: limit > 0.0 && gap < 1e-3 * limit,
            worst_margin: 1e-3 * limit - gap,
            probe_z: SUBLINEAR_PROBE,
        });
    }

    Ok(ValidationReport { conditions })
}

/// `G(z) = exp(-nu h(z / (nu h1)))`, the transform of the unit-mean marginal of the texture.
#[derive(Debug, Clone)]
pub struct LimitTransform {
    nu: f64,
    model: BernsteinModel,
}

pub fn limit_transform(model: &BernsteinModel, nu: f64) -> Result<LimitTransform> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(domain("nu", nu, "must be positive and finite"));
    }
    Ok(LimitTransform {
        nu,
        model: model.clone(),
    })
}

impl LimitTransform {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn model(&self) -> &BernsteinModel {
        &self.model
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        check_argument(z)?;
        Ok(self.value(z))
    }

    pub(crate) fn value(&self, z: f64) -> f64 {
        (-self.nu * self.model.value(z / (self.nu * self.model.h1))).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const GRID: [f64; 3] = [0.1, 1.0, 10.0];

    #[test]
    fn finite_builtin_values() {
        let h = BernsteinModel::finite_builtin();
        assert_eq!(h.eval(0.0).unwrap(), 0.0);
        assert_eq!(h.eval(1.0).unwrap(), 0.5);
        assert_eq!(h.h1(), 1.0);
        assert_eq!(h.h2(), -2.0);
        assert_eq!(h.activity(), Activity::Finite { limit: 1.0 });
        // h^(n)(z) = (-1)^(n+1) n! (z+1)^-(n+1)
        assert_relative_eq!(
            h.nth_derivative(3, 1.0).unwrap(),
            6.0 / 16.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            h.nth_derivative(2, 0.0).unwrap(),
            -2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn infinite_builtin_values() {
        let h = BernsteinModel::infinite_builtin();
        assert_eq!(h.eval(0.0).unwrap(), 0.0);
        assert_eq!(h.h2(), -1.0);
        assert_relative_eq!(
            h.nth_derivative(2, 0.0).unwrap(),
            -1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(h.nth_derivative(1, 1.0).unwrap(), 0.5, max_relative = 1e-14);
        assert_eq!(h.activity(), Activity::Infinite);
    }

    #[test]
    fn negative_arguments_are_rejected() {
        let h = BernsteinModel::finite_builtin();
        assert!(matches!(h.eval(-1.0), Err(Error::Domain { .. })));
        assert!(h.nth_derivative(1, -0.5).is_err());
    }

    #[test]
    fn generic_model_estimates_constants() {
        let h = BernsteinModel::from_fn("ln1p", |z: f64| z.ln_1p());
        assert_relative_eq!(h.h1(), 1.0, epsilon = 1e-8);
        assert_relative_eq!(h.h2(), -1.0, epsilon = 1e-6);
        assert_eq!(h.activity(), Activity::Infinite);
        let r = BernsteinModel::from_fn("rational", |z: f64| z / (z + 1.0));
        match r.activity() {
            Activity::Finite { limit } => assert_relative_eq!(limit, 1.0, epsilon = 1e-7),
            other => panic!("{other:?}"),
        }
        assert!(r.nth_derivative(21, 1.0).is_err());
        assert!(r.nth_derivative(20, 1.0).is_ok());
    }

    #[test]
    fn check_accepts_builtins() {
        for model in [
            BernsteinModel::finite_builtin(),
            BernsteinModel::infinite_builtin(),
        ] {
            let report = check_bernstein(&model, &GRID, 4).unwrap();
            assert!(
                report.passed(),
                "{:?}",
                report.failures().collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn check_accepts_differenced_builtins() {
        let r = BernsteinModel::from_fn("rational", |z: f64| z / (z + 1.0));
        let report = check_bernstein(&r, &GRID, 4).unwrap();
        assert!(
            report.passed(),
            "{:?}",
            report.failures().collect::<Vec<_>>()
        );
    }

    #[test]
    fn check_rejects_square() {
        let sq = BernsteinModel::from_fn("square", |z: f64| z * z);
        let report = check_bernstein(&sq, &GRID, 4).unwrap();
        assert!(!report.passed());
        assert!(report.get("sign alternation order 0").unwrap().passed);
        assert!(!report.get("sign alternation order 1").unwrap().passed);
    }

    #[test]
    fn check_rejects_linear() {
        let lin = BernsteinModel::from_fn("linear", |z: f64| z);
        let report = check_bernstein(&lin, &GRID, 4).unwrap();
        assert!(!report.get("h(z)/z -> 0").unwrap().passed);
        assert!(!report.passed());
    }

    #[test]
    fn check_rejects_bad_arguments() {
        let h = BernsteinModel::finite_builtin();
        assert!(check_bernstein(&h, &[0.0, 1.0], 4).is_err());
        assert!(check_bernstein(&h, &GRID, 7).is_err());
    }

    #[test]
    fn report_serializes_flat() {
        let report = check_bernstein(&BernsteinModel::finite_builtin(), &GRID, 1).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        let first = &json.as_array().unwrap()[0];
        assert_eq!(first["condition"], "h(0) = 0");
        assert_eq!(first["passed"], true);
        assert!(first["worst_margin"].is_number());
        assert!(first["probe_z"].is_number());
    }

    #[test]
    fn from_lst_recovers_logarithm() {
        let nu = 2.0;
        let h = BernsteinModel::from_lst(move |z: f64| (1.0 + z / nu).powf(-nu), nu).unwrap();
        for i in 0..=100 {
            let z = i as f64 * 0.1;
            assert!((h.eval(z).unwrap() - z.ln_1p()).abs() < 1e-9);
        }
        assert_eq!(h.activity(), Activity::Infinite);
        assert_eq!(h.h1(), 1.0);
    }

    #[test]
    fn from_lst_recovers_rational() {
        let nu = 1.0;
        let h = BernsteinModel::from_lst(move |z: f64| (-nu * z / (z + nu)).exp(), nu).unwrap();
        for i in 0..=100 {
            let z = i as f64 * 0.1;
            assert!((h.eval(z).unwrap() - z / (z + 1.0)).abs() < 1e-9);
        }
        assert!(matches!(h.activity(), Activity::Finite { .. }));
        assert_relative_eq!(h.h2(), -2.0, epsilon = 1e-5);
    }

    #[test]
    fn from_lst_rejects_degenerate_and_unnormalized() {
        let err = BernsteinModel::from_lst(|z: f64| (-z).exp(), 1.0).unwrap_err();
        assert!(err.to_string().contains("sublinearly"), "{err}");
        assert!(BernsteinModel::from_lst(|z: f64| 0.9 * (-z).exp(), 1.0).is_err());
        assert!(BernsteinModel::from_lst(|z: f64| 1.0 / (1.0 + z), 0.0).is_err());
        // Increasing G gives negative h.
        assert!(BernsteinModel::from_lst(|z: f64| 1.0 + z, 1.0).is_err());
        // Mean 2 instead of 1.
        assert!(BernsteinModel::from_lst(|z: f64| 1.0 / (1.0 + 2.0 * z), 1.0).is_err());
    }

    #[test]
    fn limit_transform_values() {
        let g = limit_transform(&BernsteinModel::finite_builtin(), 2.0).unwrap();
        assert_relative_eq!(g.eval(2.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-14);
        assert_eq!(g.eval(0.0).unwrap(), 1.0);
        let g = limit_transform(&BernsteinModel::infinite_builtin(), 2.0).unwrap();
        assert_relative_eq!(g.eval(2.0).unwrap(), 0.25, max_relative = 1e-14);
        assert_eq!(g.eval(0.0).unwrap(), 1.0);
        assert!(limit_transform(&BernsteinModel::infinite_builtin(), -1.0).is_err());
    }

    #[test]
    fn limit_transform_has_unit_slope_and_is_completely_monotonic() {
        for model in [
            BernsteinModel::finite_builtin(),
            BernsteinModel::infinite_builtin(),
        ] {
            let g = limit_transform(&model, 2.0).unwrap();
            let f = |z: f64| g.value(z);
            assert_relative_eq!(-numeric::nth_derivative(&f, 1, 0.0), 1.0, epsilon = 1e-6);
            for n in 0..=4u32 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                for z in [0.1, 0.5, 1.0, 3.0, 10.0] {
                    assert!(
                        sign * numeric::nth_derivative(&f, n, z) >= -1e-9,
                        "order {n} at {z}"
                    );
                }
            }
        }
    }
}
