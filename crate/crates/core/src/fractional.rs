//! Left Riemann–Liouville derivatives (lower terminal 0) of power functions,
//! plus a Grünwald–Letnikov finite-difference oracle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::special::{complex_pow, gamma, is_gamma_pole, ComplexScalar};

/// Distance from 1, 2 or 3 below which an order is rejected by the descent step.
const INTEGER_ORDER_TOL: f64 = 1e-12;

/// Differentiation order ν ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "fractional order must be finite and non-negative, got {nu}"
            )));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The descent update is only defined for ν ∉ {1, 2, 3}.
    pub fn fal_valid(self) -> bool {
        [1.0, 2.0, 3.0]
            .iter()
            .all(|n| (self.0 - n).abs() > INTEGER_ORDER_TOL)
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(nu: f64) -> Result<Self> {
        Self::new(nu)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(nu: FractionalOrder) -> f64 {
        nu.0
    }
}

/// Coefficient Γ(p+1)/Γ(p+1−ν) of the power-rule derivative; exactly 0 when
/// the denominator sits on a gamma pole.
pub fn power_rule_coefficient(p: f64, nu: FractionalOrder) -> Result<f64> {
    let lower = p + 1.0 - nu.value();
    if is_gamma_pole(lower) {
        return Ok(0.0);
    }
    Ok(gamma(p + 1.0)? / gamma(lower)?)
}

/// `D^ν s^p = Γ(p+1)/Γ(p+1−ν) · s^(p−ν)` on the principal branch.
///
/// When ν − p is a positive integer the coefficient vanishes and the result
/// is exactly zero, matching the classical derivative of a lower-degree power.
pub fn rl_derivative_power(p: f64, nu: FractionalOrder, s: ComplexScalar) -> Result<ComplexScalar> {
    if !(p >= 0.0) {
        return Err(Error::Domain(format!(
            "power must be non-negative, got {p}"
        )));
    }
    let coeff = power_rule_coefficient(p, nu)?;
    if coeff == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pw = complex_pow(s, p - nu.value()).map_err(|_| {
        Error::SingularInput(format!("D^{} s^{p} is singular at s = 0", nu.value()))
    })?;
    Ok(pw * coeff)
}

/// Truncated Grünwald–Letnikov sum
/// `h^(−ν) Σ_{j=0}^{⌊s/h⌋} (−1)^j C(ν, j) f(s − jh)` for the polynomial
/// `f(x) = Σ coeffs[i] x^i`.
///
/// The sum is accumulated in double-double arithmetic: for ν > 1 the terms
/// cancel by many orders of magnitude before the `h^(−ν)` rescaling.
pub fn gl_oracle(coeffs: &[f64], nu: FractionalOrder, s: f64, h: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("oracle needs s > 0, got {s}")));
    }
    if !(h > 0.0) || h > s / 100.0 {
        return Err(Error::Domain(format!(
            "step h = {h} must lie in (0, s/100]"
        )));
    }
    let nu = nu.value();
    let n = (s / h).floor() as u64;
    let nu_plus_one = Dd::from_f64(nu) + Dd::from_f64(1.0);
    let eval = |x: Dd| {
        coeffs
            .iter()
            .rev()
            .fold(Dd::ZERO, |acc, &c| acc * x + Dd::from_f64(c))
    };

    let mut weight = Dd::from_f64(1.0);
    let mut sum = Dd::ZERO;
    for j in 0..=n {
        let jf = j as f64;
        if j > 0 {
            // w_j = w_{j-1} (j − ν − 1) / j
            weight = weight * (Dd::from_f64(jf) - nu_plus_one).div_f64(jf);
        }
        let x = Dd::from_f64(s) - Dd::from_f64(h) * Dd::from_f64(jf);
        sum = sum + weight * eval(x);
    }
    Ok(sum.to_f64() * h.powf(-nu))
}
