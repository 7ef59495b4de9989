//! Quadratic energy norm and its order-ν gradient.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fractional::{rl_derivative_power, FractionalOrder};
use crate::special::ComplexScalar;

/// `E(s) = e_min + eta (s − s_star)²`, stored together with its expansion
/// `c0 + c1 s + c2 s²` in powers of `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyNorm {
    pub e_min: f64,
    pub eta: f64,
    pub s_star: f64,
    c: [f64; 3],
}

impl EnergyNorm {
    pub fn new(e_min: f64, eta: f64, s_star: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "eta must be positive, got {eta}"
            )));
        }
        if !e_min.is_finite() || !s_star.is_finite() {
            return Err(Error::InvalidConfig(
                "energy parameters must be finite".into(),
            ));
        }
        let c = [e_min + eta * s_star * s_star, -2.0 * eta * s_star, eta];
        Ok(Self {
            e_min,
            eta,
            s_star,
            c,
        })
    }

    /// Expansion coefficients `[c0, c1, c2]`.
    pub fn coefficients(&self) -> [f64; 3] {
        self.c
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        let d = s - self.s_star;
        self.e_min + self.eta * d * d
    }

    pub fn classical_gradient(&self, s: f64) -> f64 {
        2.0 * self.eta * (s - self.s_star)
    }

    /// Order-ν left Riemann–Liouville derivative (terminal 0) of `E` at `s`,
    /// taken term by term over the power expansion.
    ///
    /// `nu = 0` returns `E(s)` itself. At `s = 0` the value is singular as soon
    /// as a term with a non-zero coefficient carries a negative exponent, which
    /// is the case for every non-integer `nu > 0` with `c0 != 0`.
    pub fn fractional_gradient(
        &self,
        nu: FractionalOrder,
        s: ComplexScalar,
    ) -> Result<ComplexScalar> {
        if nu.value() == 0.0 {
            let d = s - self.s_star;
            return Ok(d * d * self.eta + self.e_min);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &c) in self.c.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            acc += rl_derivative_power(p as f64, nu, s)? * c;
        }
        Ok(acc)
    }

    /// Samples the order-ν gradient on `n_points` evenly spaced points of
    /// `[lo, hi]`. Points where the gradient is singular are kept with
    /// `value: None`.
    pub fn sample_gradient_curve(
        &self,
        nu: FractionalOrder,
        lo: f64,
        hi: f64,
        n_points: usize,
        exec: Execution,
    ) -> Result<Vec<CurvePoint>> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "domain needs lo < hi, got {lo}..{hi}"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidConfig(
                "domain needs at least 2 points".into(),
            ));
        }
        let grid = linspace(lo, hi, n_points);
        exec.map(&grid, |&s| {
            match self.fractional_gradient(nu, Complex64::new(s, 0.0)) {
                Ok(v) => Ok(CurvePoint { s, value: Some(v) }),
                Err(Error::SingularInput(_)) => Ok(CurvePoint { s, value: None }),
                Err(e) => Err(e),
            }
        })
        .into_iter()
        .collect()
    }
}

/// One sample of a gradient curve; `value` is `None` at a singular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub s: f64,
    pub value: Option<ComplexScalar>,
}

impl CurvePoint {
    pub fn is_singular(&self) -> bool {
        self.value.is_none()
    }
}

/// `n` points from `lo` to `hi` inclusive; interior points are computed as
/// `lo + (hi − lo)·i/(n − 1)` so grids like −4..8 land on 0 exactly.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = hi - lo;
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + span * (i as f64) / last
            }
        })
        .collect()
}
