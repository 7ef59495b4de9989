//! Named parameter bundles for the reference experiments.
//!
//! Steady-state thresholds and the descent order for the rate experiments are
//! reverse-engineered: the target iteration counts do not state the rule
//! that produced them. They are chosen so the target counts come out
//! exactly, and are not authoritative.

use crate::convergence::SteadyStateCriterion;
use crate::energy::EnergyNorm;
use crate::error::{Error, Result};
use crate::estimate::RateConfig;
use crate::fractional::FractionalOrder;

pub const DERIVATIVE_E_MIN: f64 = 10.0;
pub const DERIVATIVE_ETA: f64 = 2.0;
pub const DERIVATIVE_S_STAR: f64 = 5.0;
pub const DERIVATIVE_DOMAIN: (f64, f64, usize) = (-4.0, 8.0, 121);

pub const RATE_S_STAR: f64 = 4.2856;
pub const RATE_S0: f64 = 15.0;
pub const RATE_ETA: f64 = 2.0;
pub const RATE_CHI_SLOW: f64 = 0.25;
pub const RATE_CHI_FAST: f64 = 1.75;
/// Order whose descent run gives `s_1948 ≈ 4.315` at χ = 0.25, closest on a
/// 0.05 grid to the target 4.316.
pub const RATE_NU: f64 = 0.3;

/// First-passage threshold giving indices 29 (χ = 0.25) and 5 (χ = 1.75) on
/// the exponential estimate. Any value in `[e^{−7.25}, e^{−7})` works.
pub const FIRST_PASSAGE_TAU: f64 = 7.2e-4;
/// Plateau threshold giving index 414 at χ = 0.25 on the implicit estimate;
/// the admissible window is roughly `[1.0983e-4, 1.1038e-4)`.
pub const PLATEAU_DELTA_SLOW: f64 = 1.1e-4;
/// Plateau threshold giving index 56 at χ = 1.75; window `[8.750e-4, 9.087e-4)`.
pub const PLATEAU_DELTA_FAST: f64 = 9.0e-4;

/// Target iteration counts at χ = 0.25 and χ = 1.75.
pub const COUNTS_SLOW: TargetCounts = TargetCounts {
    naive: 29,
    corrected: 414,
    actual: 1948,
};
pub const COUNTS_FAST: TargetCounts = TargetCounts {
    naive: 5,
    corrected: 56,
    actual: 1741,
};
/// Target value of the descent iterate at k = 1948, χ = 0.25.
pub const ACTUAL_VALUE_AT_1948: f64 = 4.316;

/// Negative-minimizer experiment: s* = −0.6406 started from −0.25.
pub const NEGATIVE_S_STAR: f64 = -0.6406;
pub const NEGATIVE_S0: f64 = -0.25;
pub const NEGATIVE_MU: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetCounts {
    pub naive: usize,
    pub corrected: usize,
    pub actual: usize,
}

/// A derivative-curve preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePreset {
    pub energy: EnergyNorm,
    pub nu: FractionalOrder,
    pub domain: (f64, f64, usize),
}

/// A rate-comparison preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePreset {
    pub chi: f64,
    pub config: RateConfig,
    pub first_passage: SteadyStateCriterion,
    pub plateau: SteadyStateCriterion,
    pub counts: TargetCounts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Curve(CurvePreset),
    Rate(RatePreset),
}

pub const PRESET_NAMES: [&str; 4] = ["fig1a", "fig1b", "fig2a", "fig2b"];

pub fn derivative_energy() -> EnergyNorm {
    EnergyNorm::new(DERIVATIVE_E_MIN, DERIVATIVE_ETA, DERIVATIVE_S_STAR).expect("valid preset")
}

fn curve(nu: f64) -> CurvePreset {
    CurvePreset {
        energy: derivative_energy(),
        nu: FractionalOrder::new(nu).expect("valid preset"),
        domain: DERIVATIVE_DOMAIN,
    }
}

/// Rate preset at a given order; `chi` selects the slow or fast experiment.
pub fn rate_preset(chi: f64, nu: f64) -> Result<RatePreset> {
    let (delta, counts) = if chi == RATE_CHI_SLOW {
        (PLATEAU_DELTA_SLOW, COUNTS_SLOW)
    } else if chi == RATE_CHI_FAST {
        (PLATEAU_DELTA_FAST, COUNTS_FAST)
    } else {
        return Err(Error::InvalidConfig(format!(
            "no rate preset for chi = {chi}"
        )));
    };
    let config = RateConfig::from_chi(
        chi,
        RATE_ETA,
        FractionalOrder::new(nu)?,
        RATE_S_STAR,
        RATE_S0,
    )?;
    Ok(RatePreset {
        chi,
        config,
        first_passage: SteadyStateCriterion::FirstPassage {
            tau: FIRST_PASSAGE_TAU,
        },
        plateau: SteadyStateCriterion::Plateau { delta },
        counts,
    })
}

pub fn fig2a() -> RatePreset {
    rate_preset(RATE_CHI_SLOW, RATE_NU).expect("valid preset")
}

pub fn fig2b() -> RatePreset {
    rate_preset(RATE_CHI_FAST, RATE_NU).expect("valid preset")
}

pub fn lookup(name: &str) -> Result<Preset> {
    match name {
        "fig1a" => Ok(Preset::Curve(curve(0.5))),
        "fig1b" => Ok(Preset::Curve(curve(1.5))),
        "fig2a" => Ok(Preset::Rate(fig2a())),
        "fig2b" => Ok(Preset::Rate(fig2b())),
        other => Err(Error::InvalidConfig(format!(
            "unknown preset `{other}` (expected one of {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
