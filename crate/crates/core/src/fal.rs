//! The fractional steepest-descent iteration over complex arithmetic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyNorm;
use crate::error::{Error, Result};
use crate::fractional::FractionalOrder;
use crate::special::{complex_pow, gamma, ComplexScalar};

pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// Step size, energy norm and order of one descent configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalParams {
    mu: f64,
    energy: EnergyNorm,
    nu: FractionalOrder,
    coefficient: f64,
}

impl FalParams {
    pub fn new(mu: f64, energy: EnergyNorm, nu: FractionalOrder) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive, got {mu}"
            )));
        }
        if !nu.fal_valid() {
            return Err(Error::InvalidConfig(format!(
                "descent step undefined for integer order {}",
                nu.value()
            )));
        }
        let coefficient = 2.0 * mu * energy.eta / gamma(3.0 - nu.value())?;
        Ok(Self {
            mu,
            energy,
            nu,
            coefficient,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn energy(&self) -> &EnergyNorm {
        &self.energy
    }

    pub fn nu(&self) -> FractionalOrder {
        self.nu
    }

    /// `2 μ η / Γ(3 − ν)`.
    pub fn step_coefficient(&self) -> f64 {
        self.coefficient
    }
}

/// Limits that end a run early.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guards {
    pub overflow_bound: f64,
    pub imag_tol: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            overflow_bound: 1e12,
            imag_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIters,
    /// `|s_k|` exceeded the overflow bound or became infinite.
    Diverged,
    SteadyState,
    /// NaN, or an iterate landed exactly on the singular point 0.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<ComplexScalar>,
    pub complexification_index: Option<usize>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> ComplexScalar {
        *self.iterates.last().expect("trajectory is never empty")
    }

    /// Number of updates performed.
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.iterates.iter().map(|z| z.re).collect()
    }
}

/// One update `s_{k+1} = s_k − 2μη/Γ(3−ν) · (s_k − s*)² · s_k^(−ν)`.
///
/// Positive real iterates stay in real arithmetic, so the imaginary part is
/// exactly zero until a negative or complex iterate shows up.
pub fn fal_step(params: &FalParams, s_k: ComplexScalar) -> Result<ComplexScalar> {
    if s_k.re == 0.0 && s_k.im == 0.0 {
        return Err(Error::SingularInput("descent step at s = 0".into()));
    }
    let s_star = params.energy.s_star;
    let nu = params.nu.value();
    if s_k.im == 0.0 && s_k.re > 0.0 {
        let s = s_k.re;
        let d = s - s_star;
        return Ok(Complex64::new(
            s - params.coefficient * d * d * s.powf(-nu),
            0.0,
        ));
    }
    let d = s_k - s_star;
    Ok(s_k - d * d * complex_pow(s_k, -nu)? * params.coefficient)
}

/// Iterates [`fal_step`] from `s0`.
///
/// `steady` sees the iterates recorded so far after every update (and once on
/// `[s0]`) and stops the run with [`Termination::SteadyState`] when it
/// returns true. Non-finite iterates are not recorded.
pub fn run_fal<F>(
    params: &FalParams,
    s0: ComplexScalar,
    max_iters: usize,
    guards: Guards,
    mut steady: F,
) -> Result<Trajectory>
where
    F: FnMut(&[ComplexScalar]) -> bool,
{
    if s0.re == 0.0 && s0.im == 0.0 {
        return Err(Error::SingularInput("initial iterate s0 = 0".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    let mut iterates = Vec::with_capacity(max_iters.min(1 << 16) + 1);
    iterates.push(s0);
    let mut complexification_index = (s0.im.abs() > guards.imag_tol).then_some(0);
    if steady(&iterates) {
        return Ok(Trajectory {
            iterates,
            complexification_index,
            termination: Termination::SteadyState,
        });
    }

    let mut termination = Termination::MaxIters;
    for k in 1..=max_iters {
        let prev = iterates[k - 1];
        let next = match fal_step(params, prev) {
            Ok(z) => z,
            Err(_) => {
                termination = Termination::NumericalFailure;
                break;
            }
        };
        if next.re.is_nan() || next.im.is_nan() {
            termination = Termination::NumericalFailure;
            break;
        }
        if !next.re.is_finite() || !next.im.is_finite() {
            termination = Termination::Diverged;
            break;
        }
        iterates.push(next);
        if complexification_index.is_none() && next.im.abs() > guards.imag_tol {
            complexification_index = Some(k);
        }
        if next.norm() > guards.overflow_bound {
            termination = Termination::Diverged;
            break;
        }
        if steady(&iterates) {
            termination = Termination::SteadyState;
            break;
        }
    }
    Ok(Trajectory {
        iterates,
        complexification_index,
        termination,
    })
}

/// Smallest `k` with `|im(iterates[k])| > imag_tol`.
pub fn detect_complexification(iterates: &[ComplexScalar], imag_tol: f64) -> Option<usize> {
    iterates.iter().position(|z| z.im.abs() > imag_tol)
}
