//! Gamma function and principal-branch powers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used for every derivative value and iterate.
pub type ComplexScalar = Complex64;

/// Distance from a non-positive integer below which an argument counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Returns true when `x` lies within [`POLE_TOL`] of a non-positive integer.
pub fn is_gamma_pole(x: f64) -> bool {
    x <= POLE_TOL && (x - x.round()).abs() <= POLE_TOL
}

/// sin(πx) with exact argument reduction, so that values near the integers
/// keep full relative accuracy.
pub fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let r = x - n;
    let s = (PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Gamma function on the real line.
///
/// Arguments below 1/2 go through the reflection formula, so negative
/// non-integers are supported. Non-positive integers are poles.
pub fn gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("gamma of NaN".into()));
    }
    if is_gamma_pole(x) {
        return Err(Error::Pole(x));
    }
    if (1.0..=171.0).contains(&x) && x.fract() == 0.0 {
        return Ok(factorial(x as u32 - 1));
    }
    if x < 0.5 {
        Ok(PI / (sin_pi(x) * lanczos(1.0 - x)))
    } else {
        Ok(lanczos(x))
    }
}

/// 1/Γ(x), which is entire: returns exactly 0 at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    match gamma(x) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// Principal-branch power `base^p = exp(p (ln|base| + i Arg base))`, Arg in (−π, π].
///
/// A real positive base takes a real fast path and the result has `im == 0.0`
/// exactly. A real negative base always uses Arg = +π regardless of the sign
/// of a zero imaginary part. `0^0 = 1`.
pub fn complex_pow(base: ComplexScalar, p: f64) -> Result<ComplexScalar> {
    if base.re == 0.0 && base.im == 0.0 {
        return if p == 0.0 {
            Ok(Complex64::new(1.0, 0.0))
        } else if p > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::SingularInput(format!(
                "0 raised to negative power {p}"
            )))
        };
    }
    if base.im == 0.0 {
        if base.re > 0.0 {
            return Ok(Complex64::new(base.re.powf(p), 0.0));
        }
        // Negative real axis: |b|^p (cos pπ + i sin pπ).
        let m = (-base.re).powf(p);
        return Ok(Complex64::new(m * sin_pi(p + 0.5), m * sin_pi(p)));
    }
    let ln_abs = base.norm().ln();
    let arg = base.im.atan2(base.re);
    let mag = (p * ln_abs).exp();
    let theta = p * arg;
    Ok(Complex64::new(mag * theta.cos(), mag * theta.sin()))
}

/// Real-argument convenience wrapper around [`complex_pow`].
pub fn real_pow(base: f64, p: f64) -> Result<ComplexScalar> {
    complex_pow(Complex64::new(base, 0.0), p)
}
