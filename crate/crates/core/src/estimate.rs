//! Closed-form trajectory estimates for the continuous surrogate
//! `ds/dt = −χ (s − s*)² / s`.
//!
//! Two estimates are provided: the exponential decay `s* + exp(−χk)` and the
//! exact separated-variables solution
//! `ln|s − s*| − s*/(s − s*) = −χk + C`, solved for `s` by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::FractionalOrder;
use crate::special::gamma;

/// Residual tolerance for the implicit solve.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Hard cap on bisection halvings.
pub const MAX_BISECTIONS: usize = 200;

/// Step size, curvature, order, minimizer and start of a rate experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub mu: f64,
    pub eta: f64,
    pub nu: FractionalOrder,
    pub s_star: f64,
    pub s0: f64,
}

impl RateConfig {
    /// Builds a configuration from the rate constant, back-solving
    /// `μ = χ Γ(3−ν) ν (s*)^(ν−1) / (2η)`.
    pub fn from_chi(chi: f64, eta: f64, nu: FractionalOrder, s_star: f64, s0: f64) -> Result<Self> {
        if !(chi > 0.0) || !chi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "chi must be positive, got {chi}"
            )));
        }
        if !(eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "eta must be positive, got {eta}"
            )));
        }
        if !(s_star > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "s_star must be positive, got {s_star}"
            )));
        }
        let v = nu.value();
        let mu = chi * gamma(3.0 - v)? * v * s_star.powf(v - 1.0) / (2.0 * eta);
        let cfg = Self {
            mu,
            eta,
            nu,
            s_star,
            s0,
        };
        cfg.chi()?;
        Ok(cfg)
    }

    /// Rate constant `χ = 2μη / (Γ(3−ν) ν (s*)^(ν−1))`.
    pub fn chi(&self) -> Result<f64> {
        rate_constant_chi(self)
    }
}

pub fn rate_constant_chi(cfg: &RateConfig) -> Result<f64> {
    if !(cfg.s_star > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "s_star must be positive, got {}",
            cfg.s_star
        )));
    }
    let v = cfg.nu.value();
    let chi = 2.0 * cfg.mu * cfg.eta / (gamma(3.0 - v)? * v * cfg.s_star.powf(v - 1.0));
    if !(chi > 0.0) || !chi.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "rate constant must be positive and finite, got {chi}"
        )));
    }
    Ok(chi)
}

/// Integration constant `C = ln|s0 − s*| − s*/(s0 − s*)`.
pub fn integration_constant(s0: f64, s_star: f64) -> Result<f64> {
    let gap = s0 - s_star;
    if gap == 0.0 {
        return Err(Error::DegenerateInput("s0 equals s_star".into()));
    }
    Ok(separated_lhs(gap, s_star))
}

/// `ln|d| − s*/d`, strictly increasing in `d` on `(0, ∞)` for `s* > 0`.
fn separated_lhs(gap: f64, s_star: f64) -> f64 {
    gap.abs().ln() - s_star / gap
}

/// Exponential-decay estimate `s* + exp(−χk)`.
pub fn naive_estimate(chi: f64, s_star: f64, k: usize) -> f64 {
    s_star + (-chi * k as f64).exp()
}

/// Signed residual of the separated relation at `s`:
/// `ln|s − s*| − s*/(s − s*) − (−χk + C)`.
pub fn implicit_residual(s: f64, k: f64, chi: f64, c: f64, s_star: f64) -> Result<f64> {
    implicit_residual_gap(s - s_star, k, chi, c, s_star)
}

/// Same residual expressed in the gap `d = s − s*`, which keeps full relative
/// precision when `s` is close to `s*`.
pub fn implicit_residual_gap(gap: f64, k: f64, chi: f64, c: f64, s_star: f64) -> Result<f64> {
    if gap == 0.0 {
        return Err(Error::DegenerateInput("s equals s_star".into()));
    }
    Ok(separated_lhs(gap, s_star) + chi * k - c)
}

/// A solved point of the implicit estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedPoint {
    pub k: usize,
    pub value: f64,
    /// `value − s*`, carried separately at full precision.
    pub gap: f64,
    pub residual: f64,
}

/// Solver for the implicit estimate on the branch `s0 > s* > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedEstimator {
    chi: f64,
    s_star: f64,
    s0: f64,
    c: f64,
    tol: f64,
    gap_floor: f64,
}

impl CorrectedEstimator {
    pub fn new(chi: f64, s_star: f64, s0: f64, tol: f64) -> Result<Self> {
        if !(chi > 0.0) || !chi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "chi must be positive, got {chi}"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {tol}"
            )));
        }
        if !(s_star > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "implicit estimate needs s_star > 0, got {s_star}"
            )));
        }
        if s0 == s_star {
            return Err(Error::DegenerateInput("s0 equals s_star".into()));
        }
        if !(s0 > s_star) {
            return Err(Error::InvalidConfig(format!(
                "implicit estimate needs s0 > s_star, got s0 = {s0}, s_star = {s_star}"
            )));
        }
        Ok(Self {
            chi,
            s_star,
            s0,
            c: integration_constant(s0, s_star)?,
            tol,
            gap_floor: 1e-12 * s_star.max(1.0),
        })
    }

    pub fn integration_constant(&self) -> f64 {
        self.c
    }

    /// Root of the separated relation at step `k`, in `(s*, s0]`.
    pub fn at(&self, k: usize) -> Result<CorrectedPoint> {
        let target = -self.chi * k as f64 + self.c;
        let residual = |d: f64| separated_lhs(d, self.s_star) - target;
        // The target itself carries rounding of order |target|·eps.
        let tol = self.tol.max(8.0 * f64::EPSILON * target.abs());

        let mut hi = self.s0 - self.s_star;
        let mut lo = self.gap_floor;
        let r_hi = residual(hi);
        if r_hi.abs() <= tol {
            return Ok(self.point(k, hi, r_hi));
        }
        if residual(lo) > 0.0 || r_hi < 0.0 {
            return Err(Error::Bracket(format!(
                "no sign change on (s* + {lo:e}, s0] at k = {k}"
            )));
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (r_lo, r_hi) = (residual(lo), residual(hi));
        let (gap, r) = if r_lo.abs() <= r_hi.abs() {
            (lo, r_lo)
        } else {
            (hi, r_hi)
        };
        if r.abs() > tol {
            return Err(Error::Bracket(format!(
                "bisection stalled at k = {k} with residual {r:e}"
            )));
        }
        Ok(self.point(k, gap, r))
    }

    fn point(&self, k: usize, gap: f64, residual: f64) -> CorrectedPoint {
        let value = if gap == self.s0 - self.s_star {
            self.s0
        } else {
            self.s_star + gap
        };
        CorrectedPoint {
            k,
            value,
            gap,
            residual,
        }
    }
}

/// Value of the implicit estimate at step `k`.
pub fn corrected_estimate(chi: f64, s_star: f64, s0: f64, k: usize, tol: f64) -> Result<f64> {
    Ok(CorrectedEstimator::new(chi, s_star, s0, tol)?.at(k)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    const S_STAR: f64 = 4.2856;
    const S0: f64 = 15.0;

    fn order(nu: f64) -> FractionalOrder {
        FractionalOrder::new(nu).unwrap()
    }

    #[test]
    fn chi_at_unit_minimizer() {
        for eps in [1e-3, 1e-6] {
            let cfg = RateConfig {
                mu: 0.5,
                eta: 1.0,
                nu: order(2.0 - eps),
                s_star: 1.0,
                s0: 2.0,
            };
            let want = 1.0 / (gamma(1.0 + eps).unwrap() * (2.0 - eps));
            assert!((cfg.chi().unwrap() - want).abs() < 1e-12);
            assert!((cfg.chi().unwrap() - 0.5).abs() < 10.0 * eps);
        }
    }

    #[test]
    fn chi_round_trip() {
        let cfg = RateConfig::from_chi(0.25, 2.0, order(0.5), S_STAR, S0).unwrap();
        assert!((cfg.chi().unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn chi_rejects_zero_step() {
        let cfg = RateConfig {
            mu: 0.0,
            eta: 2.0,
            nu: order(0.5),
            s_star: S_STAR,
            s0: S0,
        };
        assert!(matches!(cfg.chi(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn integration_constant_values() {
        assert_eq!(integration_constant(S_STAR + 1.0, S_STAR).unwrap(), -S_STAR);
        let c = integration_constant(15.0, 4.2856).unwrap();
        assert!((c - 1.971_603_564_264_821_5).abs() < 1e-12);
        let c = integration_constant(0.0, 5.0).unwrap();
        assert!((c - 2.609_437_912_434_100_4).abs() < 1e-12);
        assert!(matches!(
            integration_constant(3.0, 3.0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn naive_estimate_values() {
        assert_eq!(naive_estimate(0.25, S_STAR, 0), S_STAR + 1.0);
        let v = naive_estimate(0.25, S_STAR, 29);
        assert!((v - S_STAR - (-7.25f64).exp()).abs() < 1e-15);
        assert!((v - S_STAR).abs() < 1e-3);
        assert!((naive_estimate(1.75, S_STAR, 5) - S_STAR).abs() < 1e-3);
    }

    #[test]
    fn residual_zero_at_start() {
        let c = integration_constant(S0, S_STAR).unwrap();
        assert!(implicit_residual(S0, 0.0, 0.25, c, S_STAR).unwrap().abs() < 1e-12);
        assert_eq!(
            implicit_residual(S_STAR + 1.0, 0.0, 0.25, -S_STAR, S_STAR).unwrap(),
            0.0
        );
        assert!(implicit_residual(S_STAR, 0.0, 0.25, c, S_STAR).is_err());
    }

    #[test]
    fn near_root_residual() {
        let c = integration_constant(S0, S_STAR).unwrap();
        // The root sits at s* + 0.043555..; the residual slope there is ~2300.
        let r = implicit_residual(4.32915, 414.0, 0.25, c, S_STAR).unwrap();
        assert!(r.abs() < 0.1, "{r}");
        let r = implicit_residual(4.329, 414.0, 0.25, c, S_STAR).unwrap();
        assert!(r < 0.0 && r.abs() < 0.5, "{r}");
    }

    #[test]
    fn start_of_corrected_trajectory() {
        let v = corrected_estimate(0.25, S_STAR, S0, 0, DEFAULT_TOL).unwrap();
        assert_eq!(v, S0);
    }

    #[test]
    fn estimator_preconditions() {
        assert!(CorrectedEstimator::new(0.25, S_STAR, 3.0, DEFAULT_TOL).is_err());
        assert!(CorrectedEstimator::new(0.25, -1.0, 3.0, DEFAULT_TOL).is_err());
        assert!(matches!(
            CorrectedEstimator::new(0.25, S_STAR, S_STAR, DEFAULT_TOL),
            Err(Error::DegenerateInput(_))
        ));
        assert!(CorrectedEstimator::new(0.0, S_STAR, S0, DEFAULT_TOL).is_err());
        assert!(CorrectedEstimator::new(0.25, S_STAR, S0, 0.0).is_err());
    }

    #[test]
    fn bracket_error_past_the_gap_floor() {
        let est = CorrectedEstimator::new(0.25, S_STAR, S0, DEFAULT_TOL).unwrap();
        // ln d − s*/d at d = 1e-12·s* is about −1e12
        assert!(matches!(est.at(1usize << 50), Err(Error::Bracket(_))));
    }
}
