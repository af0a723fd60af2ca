//! Tabulated Laplace-Stieltjes transforms `G(z)` loaded from `(z, G)` pairs.
//!
//! `ln G` is interpolated with a monotone piecewise-cubic Hermite scheme
//! (Fritsch-Carlson), which keeps the transform monotone and smooth enough
//! for the second derivative at zero to be meaningful. Beyond the last node
//! `G` is held constant, so a table always describes a finite-activity model
//! whose activity limit is set by the last tabulated value.

use std::path::Path;

use crate::bernstein::BernsteinModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstTable {
    z: Vec<f64>,
    ln_g: Vec<f64>,
    slopes: Vec<f64>,
}

impl LstTable {
    /// Nodes must start at `z = 0` with `G(0) = 1`, increase strictly, and
    /// carry nonincreasing `G` in `(0, 1]`.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidModel(
                "a transform table needs at least 3 rows".into(),
            ));
        }
        if points[0].0 != 0.0 {
            return Err(Error::InvalidModel(
                "the first tabulated z must be 0".into(),
            ));
        }
        if (points[0].1 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!(
                "G(0) = {}, expected 1",
                points[0].1
            )));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidModel(format!(
                    "z must increase strictly (at z = {})",
                    w[1].0
                )));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::InvalidModel(format!(
                    "G increases at z = {}",
                    w[1].0
                )));
            }
        }
        if points
            .iter()
            .any(|&(z, g)| !z.is_finite() || !(g > 0.0 && g <= 1.0 + 1e-9))
        {
            return Err(Error::InvalidModel(
                "G must lie in (0, 1] and z must be finite".into(),
            ));
        }
        let z: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ln_g: Vec<f64> = points.iter().map(|p| p.1.min(1.0).ln()).collect();
        let slopes = pchip_slopes(&z, &ln_g);
        Ok(Self { z, ln_g, slopes })
    }

    /// Parses CSV rows `z,G`; a non-numeric first line is taken as a header.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match cells.as_slice() {
                [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => points.push(p),
                None if i == 0 => continue,
                None => {
                    return Err(Error::InvalidModel(format!(
                        "line {}: expected 'z,G'",
                        i + 1
                    )))
                }
            }
        }
        Self::new(&points)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }

    pub fn z_max(&self) -> f64 {
        *self.z.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.ln_eval(z).exp()
    }

    fn ln_eval(&self, z: f64) -> f64 {
        let n = self.z.len();
        if z <= 0.0 {
            return 0.0;
        }
        if z >= self.z[n - 1] {
            return self.ln_g[n - 1];
        }
        let i = self.z.partition_point(|&x| x <= z) - 1;
        let h = self.z[i + 1] - self.z[i];
        let t = (z - self.z[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ln_g[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ln_g[i + 1]
            + h11 * h * self.slopes[i + 1]
    }

    /// The Bernstein model with this limit transform at shape `nu`.
    pub fn into_model(self, nu: f64) -> Result<BernsteinModel> {
        // The interpolant is only C1.
        Ok(BernsteinModel::from_lst(move |z| self.eval(z), nu)?.with_smooth_order(1))
    }
}

/// Fritsch-Carlson slopes with the three-point end condition.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(
        h[n - 2],
        h[n - 3.min(n - 1)],
        delta[n - 2],
        delta[n - 3.min(n - 1)],
    );
    d
}
